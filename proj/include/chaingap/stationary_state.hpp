#pragma once

#include "chaingap/chain_model.hpp"
#include "chaingap/eigensolver.hpp"

#include <vector>

namespace chaingap {

// K S + S K^T = C for stable K (all eigenvalues with positive real part)
RealMatrix lyapunov_solve(const RealMatrix& K, const RealMatrix& C);
// the two solvers behind lyapunov_solve; no stability check
RealMatrix lyapunov_kronecker(const RealMatrix& K, const RealMatrix& C);
RealMatrix lyapunov_schur(const RealMatrix& K, const RealMatrix& C);
double lyapunov_residual(const RealMatrix& K, const RealMatrix& S, const RealMatrix& C);

struct SteadyState {
  RealMatrix covariance;
  RealVector kinetic_temperature;  // per site, S_pp / m
  double residual{0};              // relative
};

SteadyState invariant_covariance(const ChainConfig& cfg);

struct LatticePoint {
  cplx value;
  int degree{0};
};

struct LatticeSpectrum {
  ComplexVector base;  // distinct drift eigenvalues
  int max_degree{3};
  double cutoff{0};
  std::vector<LatticePoint> points;  // sorted by (Re, Im)
};

// cutoff <= 0 selects 10x the base gap
LatticeSpectrum spectrum_lattice(const ComplexVector& base, int d = 3, double cutoff = 0.0);
double lattice_gap(const LatticeSpectrum& L);

GapResult fp_gap(const ChainConfig& cfg);

}  // namespace chaingap
