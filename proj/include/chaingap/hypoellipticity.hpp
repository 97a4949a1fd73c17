#pragma once

#include "chaingap/chain_model.hpp"
#include "chaingap/eigensolver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace chaingap {

struct KalmanResult {
  int rank{0};
  int dim{0};
  double weakest_accepted{0};  // smallest accepted new direction, relative
  double strongest_rejected{0};  // largest deflated direction, relative
  bool borderline{false};
};

// rank of [D, K D, K^2 D, ...] with D D^T = sigma2, via an orthonormal block Krylov basis
KalmanResult kalman_rank(const RealMatrix& K, const RealMatrix& sigma2);

struct VanishingMode {
  double eigenvalue{0};
  RealVector vector;
  double max_end_abs{0};
  int cluster_size{1};
};

std::optional<VanishingMode> vanishing_eigenvector_check(const RealMatrix& interaction, const std::vector<int>& ends);

struct DegenerateOmega {
  int i{0}, j{0};  // 0-based mode pair, i < j
  double omega{0};
};

struct DegenerateSet {
  std::vector<DegenerateOmega> values;
  std::vector<std::pair<int, int>> excluded;  // i + j = N + 1 in 1-based labels
};

DegenerateSet degenerate_omega_enumerate(int n);

enum class Verdict { Hypoelliptic, NotHypoelliptic, Inconclusive };
std::string to_string(Verdict v);

struct ConstructedMode {
  DegenerateOmega pair;
  RealVector vector;  // v_j(1) v_i - v_i(1) v_j, normalised
  double residual{0};
  double first{0};
  double last{0};
};

struct HypoReport {
  ChainConfig cfg;
  KalmanResult kalman;
  int full_rank_needed{0};
  std::optional<VanishingMode> vanishing_mode;
  std::vector<DegenerateOmega> degenerate_omega_hits;
  std::optional<ConstructedMode> constructed;
  std::optional<cplx> friction_invariant_eigenvalue;
  bool zero_gap_flag{false};
  bool interaction_psd{true};
  Verdict verdict{Verdict::Inconclusive};
};

HypoReport hypo_verdict(const ChainConfig& cfg);
std::string format_report(const HypoReport& rep);

}  // namespace chaingap
