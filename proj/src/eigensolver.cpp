#include "chaingap/eigensolver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <numeric>

namespace chaingap {

namespace {

std::vector<Eigen::Index> spectrum_order(const ComplexVector& v) {
  std::vector<Eigen::Index> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    if (v(a).real() != v(b).real()) return v(a).real() < v(b).real();
    return v(a).imag() < v(b).imag();
  });
  return idx;
}

template <class MatrixT>
EigenSystem finish(const MatrixT& M, const ComplexVector& values, const ComplexMatrix* vectors,
                   const RealVector& scaling, bool converged) {
  EigenSystem es;
  es.converged = converged;
  const auto order = spectrum_order(values);
  const Eigen::Index n = values.size();
  es.eigenvalues.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) es.eigenvalues(k) = values(order[k]);
  if (vectors) {
    ComplexMatrix V(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      ComplexVector x = scaling.cast<cplx>().cwiseProduct(vectors->col(order[k]));
      V.col(k) = x / x.norm();
    }
    es.eigenvectors = std::move(V);
    es.residuals = residual_check(M, es).residuals;
  }
  return es;
}

}  // namespace

EigenSystem eigen_all(const RealMatrix& M, bool want_vectors, bool balanced) {
  if (M.rows() != M.cols()) throw PreconditionError("eigen_all: matrix must be square");
  if (!M.allFinite()) throw PreconditionError("eigen_all: non-finite entries");
  const Eigen::Index n = M.rows();
  RealMatrix A = M;
  RealVector d = balanced ? balance(A) : RealVector::Ones(n);
  Eigen::EigenSolver<RealMatrix> solver;
  solver.setMaxIterations(std::max<Eigen::Index>(30 * n, 30));
  solver.compute(A, want_vectors);
  const bool ok = solver.info() == Eigen::Success;
  ComplexVector values = solver.eigenvalues();
  if (!ok) {
    EigenSystem partial = finish(M, values, nullptr, d, false);
    throw EigenConvergenceError("eigen_all: QR iteration did not converge", partial);
  }
  if (!want_vectors) return finish(M, values, nullptr, d, true);
  const ComplexMatrix V = solver.eigenvectors();
  return finish(M, values, &V, d, true);
}

EigenSystem eigen_all(const ComplexMatrix& M, bool want_vectors, bool balanced) {
  if (M.rows() != M.cols()) throw PreconditionError("eigen_all: matrix must be square");
  if (!M.allFinite()) throw PreconditionError("eigen_all: non-finite entries");
  const Eigen::Index n = M.rows();
  ComplexMatrix A = M;
  RealVector d = balanced ? balance(A) : RealVector::Ones(n);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver;
  solver.setMaxIterations(std::max<Eigen::Index>(30 * n, 30));
  solver.compute(A, want_vectors);
  const bool ok = solver.info() == Eigen::Success;
  ComplexVector values = solver.eigenvalues();
  if (!ok) {
    EigenSystem partial = finish(M, values, nullptr, d, false);
    throw EigenConvergenceError("eigen_all: complex QR iteration did not converge", partial);
  }
  if (!want_vectors) return finish(M, values, nullptr, d, true);
  const ComplexMatrix V = solver.eigenvectors();
  return finish(M, values, &V, d, true);
}

SymmetricEigensystem dense_symmetric(const RealMatrix& S) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("dense_symmetric: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

ComplexVector sorted_spectrum(ComplexVector v) {
  const auto order = spectrum_order(v);
  ComplexVector out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = v(order[k]);
  return out;
}

// ------ matching ------

std::vector<int> hungarian(const RealMatrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

SpectrumMatch match_spectra(const ComplexVector& a, const ComplexVector& b, double tol) {
  if (a.size() != b.size()) throw PreconditionError("match_spectra: multisets differ in size");
  const int n = static_cast<int>(a.size());
  SpectrumMatch out;
  out.assignment.assign(n, -1);
  std::vector<char> taken(n, 0);
  bool ambiguous = false;
  for (int i = 0; i < n && !ambiguous; ++i) {
    int best = -1;
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    for (int j = 0; j < n; ++j) {
      if (taken[j]) continue;
      const double d = std::abs(a(i) - b(j));
      if (d < d1) { d2 = d1; d1 = d; best = j; }
      else if (d < d2) d2 = d;
    }
    if (d2 <= tol && d2 > 0 && d1 > 0) ambiguous = true;
    if (d1 > tol) ambiguous = true;
    taken[best] = 1;
    out.assignment[i] = best;
  }
  if (ambiguous) {
    RealMatrix cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = std::abs(a(i) - b(j));
    out.assignment = hungarian(cost);
    out.used_hungarian = true;
  }
  for (int i = 0; i < n; ++i) out.max_distance = std::max(out.max_distance, std::abs(a(i) - b(out.assignment[i])));
  return out;
}

GapResult gap_from_spectrum(const ComplexVector& ev, double flag_tol, double zero_mode_tol) {
  GapResult g;
  double min_re = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const cplx z = ev(k);
    if (std::abs(z) <= zero_mode_tol) {
      g.has_zero_mode = true;
      continue;
    }
    if (std::abs(z.real()) < flag_tol) g.zero_gap = true;
    if (z.real() < -flag_tol) g.unstable = true;
    if (z.real() < min_re) {
      min_re = z.real();
      g.achieving = z;
    }
  }
  g.gap = (g.zero_gap || g.unstable || !std::isfinite(min_re)) ? 0.0 : min_re;
  if (g.zero_gap && !g.unstable) {
    for (Eigen::Index k = 0; k < ev.size(); ++k)
      if (std::abs(ev(k)) > zero_mode_tol && std::abs(ev(k).real()) < flag_tol) { g.achieving = ev(k); break; }
  }
  return g;
}

}  // namespace chaingap
