#pragma once

#include "chaingap/chain_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chaingap {

// dz = -drift z dt + noise dW
struct LinearSde {
  RealMatrix drift;
  RealMatrix noise;
};

LinearSde make_sde(const ChainConfig& cfg);
LinearSde frictionless_sde(const ChainConfig& cfg);  // friction and noise removed

// standard normal keyed by (seed, trajectory, step, component)
double counter_normal(std::uint64_t seed, std::uint64_t traj, std::uint64_t step, std::uint64_t comp);

enum class InitialKind { Zero, GaussianFromS, Custom };

struct SimOptions {
  double dt{0.01};
  long n_steps{1000};
  int n_traj{1};
  std::uint64_t seed{0};
  InitialKind initial{InitialKind::Zero};
  RealVector custom_initial;
  long burn_in{0};       // steps skipped before statistics
  long sample_every{1};  // statistics stride
  long dump_every{0};    // thinned path of trajectory 0, 0 disables
  RealVector observable; // optional linear functional, ensemble-averaged
  long observe_every{1};
  bool exact_ou{false};  // exact one-step Gaussian transition instead of Euler-Maruyama
  int threads{1};
};

struct SimSpec {
  ChainConfig cfg;
  SimOptions options;
};

struct DumpRow {
  long step{0};
  double t{0};
  RealVector state;
};

struct SimStats {
  long samples{0};  // per trajectory
  RealVector mean;
  RealMatrix covariance;
  RealMatrix second_moment;
  std::vector<RealMatrix> per_traj_second_moment;
  std::vector<double> observe_times;
  RealVector observable_mean;
  RealVector observable_se;
  std::vector<DumpRow> dump;
  std::vector<std::string> warnings;
};

SimStats simulate(const SimSpec& spec);
SimStats simulate(const LinearSde& sde, const SimOptions& opt, const RealMatrix* stationary = nullptr);

// exp(-t K) by scaling and squaring
RealMatrix propagator(const RealMatrix& K, double t);

// noiseless Euler-Maruyama
RealVector euler_path(const RealMatrix& K, RealVector x0, double dt, long steps);

struct BootstrapInterval {
  double estimate{0};
  double lo{0};
  double hi{0};
};

// relative Frobenius error of the trajectory-averaged second moment against ref
BootstrapInterval bootstrap_relative_error(const std::vector<RealMatrix>& per_traj, const RealMatrix& ref,
                                           int resamples = 1000, std::uint64_t seed = 7);

struct RelaxationFit {
  double rate{0};
  double ci_low{0};
  double ci_high{0};
  double prefactor{0};
  double frequency{0};
  bool undamped{false};
  int points{0};
  std::vector<std::string> warnings;
};

RelaxationFit relaxation_fit(const SimSpec& spec, const RealVector& observable);

// projection on the slowest mode (left eigenvector) and a matching initial state
struct SlowMode {
  RealVector observable;
  RealVector initial;
  cplx eigenvalue;
};
SlowMode slow_mode(const ChainConfig& cfg);
RealVector site_observable(const ChainConfig& cfg, int site1);

}  // namespace chaingap
