#pragma once

#include "chaingap/types.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace chaingap {

struct EigenSystem {
  ComplexVector eigenvalues;
  std::optional<ComplexMatrix> eigenvectors;  // unit-norm columns
  RealVector residuals;                       // |M v - lambda v| / |M|
  bool converged{false};
};

struct EigenConvergenceError : NumericalError {
  EigenConvergenceError(const std::string& what, EigenSystem partial_result)
      : NumericalError(what), partial(std::move(partial_result)) {}
  EigenSystem partial;
};

struct SymmetricEigensystem {
  RealVector values;   // ascending
  RealMatrix vectors;  // orthonormal columns
};

// Parlett-Reinsch scaling by powers of two; A <- D^-1 A D, returns diag(D)
template <class Scalar>
RealVector balance(Mat<Scalar>& A) {
  const Eigen::Index n = A.rows();
  RealVector d = RealVector::Ones(n);
  constexpr double radix = 2.0, sq = radix * radix;
  bool done = false;
  for (int sweep = 0; !done && sweep < 1000; ++sweep) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0, r = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(A(j, i));
        r += std::abs(A(i, j));
      }
      if (c == 0 || r == 0) continue;
      const double s = c + r;
      double f = 1, g = r / radix;
      while (c < g) { f *= radix; c *= sq; }
      g = r * radix;
      while (c > g) { f /= radix; c /= sq; }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        d(i) *= f;
        A.row(i) /= f;
        A.col(i) *= f;
      }
    }
  }
  return d;
}

EigenSystem eigen_all(const RealMatrix& M, bool want_vectors = false, bool balanced = true);
EigenSystem eigen_all(const ComplexMatrix& M, bool want_vectors = false, bool balanced = true);

SymmetricEigensystem dense_symmetric(const RealMatrix& S);

struct ResidualReport {
  RealVector residuals;
  double max_residual{0};
};

template <class Derived>
ResidualReport residual_check(const Eigen::MatrixBase<Derived>& M, const EigenSystem& es) {
  if (!es.eigenvectors) throw PreconditionError("residual_check: eigenvectors not present");
  const ComplexMatrix A = M.template cast<cplx>();
  const ComplexMatrix& V = *es.eigenvectors;
  const double scale = A.norm() > 0 ? A.norm() : 1.0;
  ResidualReport rep;
  rep.residuals.resize(V.cols());
  for (Eigen::Index k = 0; k < V.cols(); ++k) {
    rep.residuals(k) = (A * V.col(k) - es.eigenvalues(k) * V.col(k)).norm() / scale;
    rep.max_residual = std::max(rep.max_residual, rep.residuals(k));
  }
  return rep;
}

// ascending by real part, then imaginary part
ComplexVector sorted_spectrum(ComplexVector v);

struct SpectrumMatch {
  double max_distance{0};
  std::vector<int> assignment;  // a[i] <-> b[assignment[i]]
  bool used_hungarian{false};
};

// multiset matching: greedy nearest neighbour, optimal assignment when ambiguous
SpectrumMatch match_spectra(const ComplexVector& a, const ComplexVector& b, double tol);

// min-cost perfect assignment on a square cost matrix
std::vector<int> hungarian(const RealMatrix& cost);

struct GapResult {
  double gap{0};
  bool zero_gap{false};
  bool unstable{false};
  bool has_zero_mode{false};
  cplx achieving{0};
};

// the zero eigenvalue (|z| <= zero_mode_tol) is a conserved mode and is skipped
GapResult gap_from_spectrum(const ComplexVector& ev, double flag_tol = 1e-10, double zero_mode_tol = 1e-9);

}  // namespace chaingap
