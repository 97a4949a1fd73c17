#include "chaingap/stationary_state.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <limits>

namespace chaingap {

// ------ Lyapunov ------

RealMatrix lyapunov_kronecker(const RealMatrix& K, const RealMatrix& C) {
  const int n = static_cast<int>(K.rows());
  const int m = n * (n + 1) / 2;
  auto idx = [n](int i, int j) {
    if (i > j) std::swap(i, j);
    return i * n - i * (i - 1) / 2 + (j - i);
  };
  RealMatrix A = RealMatrix::Zero(m, m);
  RealVector rhs(m);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const int row = idx(i, j);
      rhs(row) = C(i, j);
      for (int k = 0; k < n; ++k) {
        A(row, idx(k, j)) += K(i, k);
        A(row, idx(i, k)) += K(j, k);
      }
    }
  const RealVector x = A.partialPivLu().solve(rhs);
  RealMatrix S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) S(i, j) = S(j, i) = x(idx(i, j));
  return S;
}

RealMatrix lyapunov_schur(const RealMatrix& K, const RealMatrix& C) {
  const Eigen::Index n = K.rows();
  Eigen::ComplexSchur<ComplexMatrix> schur(K.cast<cplx>());
  if (schur.info() != Eigen::Success) throw NumericalError("lyapunov_schur: Schur decomposition failed");
  const ComplexMatrix& U = schur.matrixU();
  const ComplexMatrix& T = schur.matrixT();
  const ComplexMatrix F = U.adjoint() * C.cast<cplx>() * U;
  ComplexMatrix Y = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    ComplexVector f = F.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) f -= std::conj(T(j, k)) * Y.col(k);
    ComplexMatrix Tj = T;
    Tj.diagonal().array() += std::conj(T(j, j));
    Y.col(j) = Tj.triangularView<Eigen::Upper>().solve(f);
  }
  RealMatrix S = (U * Y * U.adjoint()).real();
  return 0.5 * (S + S.transpose());
}

double lyapunov_residual(const RealMatrix& K, const RealMatrix& S, const RealMatrix& C) {
  const double scale = C.norm() > 0 ? C.norm() : 1.0;
  return (K * S + S * K.transpose() - C).norm() / scale;
}

RealMatrix lyapunov_solve(const RealMatrix& K, const RealMatrix& C) {
  if (K.rows() != K.cols() || C.rows() != K.rows() || C.cols() != K.cols())
    throw PreconditionError("lyapunov_solve: dimension mismatch");
  const GapResult g = gap_from_spectrum(eigen_all(K).eigenvalues, 1e-10, 0.0);
  if (g.zero_gap || g.unstable || g.has_zero_mode)
    throw NoSteadyState("lyapunov_solve: drift is not strictly stable, no steady state");
  RealMatrix S = K.rows() <= 40 ? lyapunov_kronecker(K, C) : lyapunov_schur(K, C);
  S = 0.5 * (S + S.transpose());
  if (!S.allFinite()) throw NumericalError("lyapunov_solve: non-finite solution");
  const RealVector ev = dense_symmetric(S).values;
  if (ev.size() && ev.minCoeff() < -1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff()))
    throw NumericalError("lyapunov_solve: indefinite covariance, problem is ill-conditioned");
  return S;
}

SteadyState invariant_covariance(const ChainConfig& cfg) {
  const RealMatrix K = dynamics_matrix(cfg);
  const RealMatrix C = build_noise(cfg);
  SteadyState out;
  out.covariance = lyapunov_solve(K, C);
  out.residual = lyapunov_residual(K, out.covariance, C);
  const int n = cfg.n_osc;
  out.kinetic_temperature.resize(n);
  for (int i = 0; i < n; ++i) {
    if (is_planar(cfg))
      out.kinetic_temperature(i) = 0.5 * (out.covariance(2 * i, 2 * i) + out.covariance(2 * i + 1, 2 * i + 1)) / cfg.mass;
    else
      out.kinetic_temperature(i) = out.covariance(i, i) / cfg.mass;
  }
  return out;
}

// ------ lattice ------

namespace {

std::vector<LatticePoint> dedupe(std::vector<LatticePoint> pts, double tol) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    if (a.value.imag() != b.value.imag()) return a.value.imag() < b.value.imag();
    return a.degree < b.degree;
  });
  std::vector<LatticePoint> kept;
  for (const auto& p : pts) {
    bool dup = false;
    for (auto it = kept.rbegin(); it != kept.rend() && p.value.real() - it->value.real() <= tol; ++it)
      if (std::abs(p.value - it->value) <= tol) {
        it->degree = std::min(it->degree, p.degree);
        dup = true;
        break;
      }
    if (!dup) kept.push_back(p);
  }
  return kept;
}

}  // namespace

LatticeSpectrum spectrum_lattice(const ComplexVector& base, int d, double cutoff) {
  if (base.size() == 0) throw PreconditionError("spectrum_lattice: empty base");
  if (d < 1) throw PreconditionError("spectrum_lattice: degree must be >= 1");
  constexpr double tol = 1e-10;
  std::vector<LatticePoint> b;
  for (Eigen::Index k = 0; k < base.size(); ++k) {
    if (!(base(k).real() > 0)) throw PreconditionError("spectrum_lattice: base eigenvalues need positive real part");
    b.push_back({base(k), 1});
  }
  b = dedupe(b, tol);
  LatticeSpectrum L;
  L.base.resize(static_cast<Eigen::Index>(b.size()));
  for (std::size_t k = 0; k < b.size(); ++k) L.base(k) = b[k].value;
  L.max_degree = d;
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& p : b) gap = std::min(gap, p.value.real());
  L.cutoff = cutoff > 0 ? cutoff : 10 * gap;

  struct Node {
    cplx value;
    int degree;
    std::size_t last;
  };
  std::vector<LatticePoint> all{{cplx(0), 0}};
  std::vector<Node> frontier{{cplx(0), 0, 0}};
  for (int level = 1; level <= d && !frontier.empty(); ++level) {
    std::vector<Node> next;
    for (const auto& node : frontier)
      for (std::size_t k = node.last; k < b.size(); ++k) {
        const cplx v = node.value + b[k].value;
        if (v.real() > L.cutoff + tol) continue;
        next.push_back({v, level, k});
        all.push_back({v, level});
      }
    if (all.size() > 5'000'000) throw NumericalError("spectrum_lattice: truncation too generous");
    frontier = std::move(next);
  }
  L.points = dedupe(std::move(all), tol);
  return L;
}

double lattice_gap(const LatticeSpectrum& L) {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& p : L.points)
    if (std::abs(p.value) > 1e-10) g = std::min(g, p.value.real());
  return g;
}

GapResult fp_gap(const ChainConfig& cfg) { return gap_from_spectrum(eigen_all(build_drift(cfg)).eigenvalues); }

}  // namespace chaingap
