#pragma once

#include "chaingap/types.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chaingap {

enum class Boundary { Dirichlet, Neumann };
enum class NnnRank { RankOne, RankTwo };

struct ChainConfig {
  int n_osc{1};
  double mass{1.0};
  double coupling{1.0};
  double pinning{0.0};
  double magnetic{0.0};
  double nnn{0.0};
  double friction{0.5};
  std::vector<int> friction_set{1};  // 1-based sites, subset of {1, n_osc}
  double temp_left{1.0};
  double temp_right{1.0};
  Boundary boundary{Boundary::Dirichlet};
  NnnRank nnn_rank{NnnRank::RankOne};
};

// throws ConfigError
void validate(const ChainConfig& cfg);

// sorted, deduplicated, 0-based
std::vector<int> frictional_sites(const ChainConfig& cfg);
double temperature_at(const ChainConfig& cfg, int site0);

// magnetic chains live in the plane: 4N phase space
inline bool is_planar(const ChainConfig& cfg) { return cfg.magnetic != 0.0; }
inline int phase_dim(const ChainConfig& cfg) { return (is_planar(cfg) ? 4 : 2) * cfg.n_osc; }

std::string to_string(Boundary b);
std::string to_string(NnnRank r);
std::string summary(const ChainConfig& cfg);

// ------ builders ------

RealMatrix build_laplacian(Boundary bc, int n, double xi);

// nearest + next-to-nearest interaction, pinning and magnetic shift folded in
RealMatrix build_interaction(const ChainConfig& cfg);

// NNN part without the boundary correction P
RealMatrix nnn_bulk_operator(const ChainConfig& cfg);
// boundary correction P (zero when nnn = 0)
RealMatrix nnn_boundary_correction(const ChainConfig& cfg);

RealMatrix friction_matrix(const ChainConfig& cfg);

// M with generator -<z, M grad>, z = (p, q)
RealMatrix build_drift(const ChainConfig& cfg);
// K = M^T, the matrix of dz = -K z dt + D dW
RealMatrix dynamics_matrix(const ChainConfig& cfg);

// blocks (Gamma + i s B0/m, -1/m; B, -i s B0/m), s = +1 / -1
ComplexMatrix magnetic_block(const ChainConfig& cfg, int sign, bool with_friction = true);
std::pair<ComplexMatrix, ComplexMatrix> reduce_magnetic(const ChainConfig& cfg);

// Sigma^2 = diag(2 Gamma m theta, 0)
RealMatrix build_noise(const ChainConfig& cfg);
// D with D D^T = Sigma^2, one column per driven momentum component
RealMatrix noise_factor(const ChainConfig& cfg);

// ------ configuration files ------

ChainConfig parse_config(std::string_view text);
ChainConfig load_config(const std::string& path);

}  // namespace chaingap
