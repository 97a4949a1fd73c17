#include "chaingap/hypoellipticity.hpp"

#include "chaingap/analytic_spectra.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace chaingap {

// ------ Kalman rank ------

KalmanResult kalman_rank(const RealMatrix& K, const RealMatrix& sigma2) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || sigma2.rows() != n || sigma2.cols() != n)
    throw PreconditionError("kalman_rank: dimension mismatch");
  constexpr double tol = 1e-9, band_lo = 1e-11, band_hi = 1e-7;

  const auto noise = dense_symmetric(sigma2);
  const double top = noise.values.cwiseAbs().maxCoeff();
  std::vector<RealVector> start;
  for (Eigen::Index k = 0; k < n; ++k)
    if (top > 0 && noise.values(k) > 1e-14 * top) start.push_back(std::sqrt(noise.values(k)) * noise.vectors.col(k));

  KalmanResult out;
  out.dim = static_cast<int>(n);
  out.weakest_accepted = std::numeric_limits<double>::infinity();
  if (start.empty()) return out;

  double k_scale = 0;
  for (Eigen::Index j = 0; j < n; ++j) k_scale = std::max(k_scale, K.col(j).norm());
  double d_scale = 0;
  for (const auto& d : start) d_scale = std::max(d_scale, d.norm());

  RealMatrix Q(n, 0);
  auto offer = [&](RealVector w, double scale) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index c = 0; c < Q.cols(); ++c) w -= Q.col(c).dot(w) * Q.col(c);
    const double rel = w.norm() / scale;
    if (rel > tol) {
      Q.conservativeResize(Eigen::NoChange, Q.cols() + 1);
      Q.col(Q.cols() - 1) = w / w.norm();
      out.weakest_accepted = std::min(out.weakest_accepted, rel);
      if (rel < band_hi) out.borderline = true;
    } else {
      out.strongest_rejected = std::max(out.strongest_rejected, rel);
      if (rel > band_lo) out.borderline = true;
    }
  };
  for (const auto& d : start) offer(d, d_scale);
  for (Eigen::Index p = 0; p < Q.cols() && Q.cols() < n; ++p) offer(K * Q.col(p), k_scale > 0 ? k_scale : 1.0);
  out.rank = static_cast<int>(Q.cols());
  return out;
}

// ------ vanishing eigenvectors ------

std::optional<VanishingMode> vanishing_eigenvector_check(const RealMatrix& interaction, const std::vector<int>& ends) {
  constexpr double cluster_tol = 1e-9, vanish_tol = 1e-9;
  const auto es = dense_symmetric(interaction);
  const Eigen::Index n = es.values.size();
  Eigen::Index c0 = 0;
  while (c0 < n) {
    Eigen::Index c1 = c0 + 1;
    while (c1 < n && es.values(c1) - es.values(c1 - 1) <= cluster_tol * std::max(1.0, std::abs(es.values(c1)))) ++c1;
    const Eigen::Index k = c1 - c0;
    const RealMatrix Q = es.vectors.middleCols(c0, k);
    RealMatrix C(static_cast<Eigen::Index>(ends.size()), k);
    for (std::size_t r = 0; r < ends.size(); ++r) C.row(r) = Q.row(ends[r]);

    RealVector w;
    if (k == 1) {
      w = Q.col(0);
    } else if (k == 2 && ends.size() == 1) {
      const int e = ends[0];
      w = Q(e, 1) * Q.col(0) - Q(e, 0) * Q.col(1);
    } else {
      Eigen::JacobiSVD<RealMatrix> svd(C, Eigen::ComputeFullV);
      w = Q * svd.matrixV().col(k - 1);
    }
    if (w.norm() > 0) {
      w /= w.norm();
      double end_abs = 0;
      for (int e : ends) end_abs = std::max(end_abs, std::abs(w(e)));
      if (end_abs <= vanish_tol) {
        double lam = es.values.segment(c0, k).mean();
        return VanishingMode{lam, w, end_abs, static_cast<int>(k)};
      }
    }
    c0 = c1;
  }
  return std::nullopt;
}

// ------ degenerate omega set ------

DegenerateSet degenerate_omega_enumerate(int n) {
  if (n < 1) throw std::invalid_argument("degenerate_omega_enumerate: invalid dimension");
  DegenerateSet out;
  const double h = std::numbers::pi / (2.0 * (n + 1));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (i + j + 2 == n + 1) {
        out.excluded.emplace_back(i, j);
        continue;
      }
      const double ti = h * (i + 1), tj = h * (j + 1);
      const double s = -4 * std::cos(ti + tj) * std::cos(tj - ti);
      if (std::abs(s) <= 1e-12) {
        out.excluded.emplace_back(i, j);
        continue;
      }
      out.values.push_back({i, j, 1.0 / s});
    }
  std::stable_sort(out.values.begin(), out.values.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.omega) < std::abs(b.omega); });
  return out;
}

// ------ verdict ------

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Hypoelliptic: return "hypoelliptic";
    case Verdict::NotHypoelliptic: return "not_hypoelliptic";
    default: return "inconclusive";
  }
}

// common eigenpair of the drift at friction g and 2g, tested per eigenvalue cluster
static std::optional<cplx> friction_invariant_pair(const ChainConfig& cfg, const RealMatrix& M, const ComplexVector& ev) {
  ChainConfig stiffer = cfg;
  stiffer.friction *= 2;
  const Eigen::Index d = M.rows();
  const RealMatrix M2 = build_drift(stiffer);
  const ComplexVector ev2 = eigen_all(M2).eigenvalues;
  ComplexMatrix stack(2 * d, d);
  stack.topRows(d) = M.cast<cplx>();
  stack.bottomRows(d) = M2.cast<cplx>();
  const double scale = std::max(1.0, M.cwiseAbs().rowwise().sum().maxCoeff());
  std::vector<bool> used(ev.size(), false);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (used[k]) continue;
    cplx centre = 0;
    int members = 0;
    for (Eigen::Index l = k; l < ev.size(); ++l)
      if (!used[l] && std::abs(ev(l) - ev(k)) <= 1e-6 * std::max(1.0, std::abs(ev(k)))) {
        used[l] = true;
        centre += ev(l);
        ++members;
      }
    centre /= static_cast<double>(members);
    const double loose = 1e-6 * std::max(1.0, std::abs(centre));
    if (((ev2.array() - centre).abs() > loose).all()) continue;
    ComplexMatrix shifted = stack;
    shifted.topRows(d).diagonal().array() -= centre;
    shifted.bottomRows(d).diagonal().array() -= centre;
    const double smin = Eigen::JacobiSVD<ComplexMatrix>(shifted).singularValues()(d - 1);
    if (smin <= 1e-9 * scale) return centre;
  }
  return std::nullopt;
}

HypoReport hypo_verdict(const ChainConfig& cfg) {
  validate(cfg);
  HypoReport rep;
  rep.cfg = cfg;
  rep.full_rank_needed = phase_dim(cfg);
  rep.kalman = kalman_rank(dynamics_matrix(cfg), build_noise(cfg));

  const RealMatrix B = build_interaction(cfg);
  rep.vanishing_mode = vanishing_eigenvector_check(B, frictional_sites(cfg));
  const RealVector bvals = dense_symmetric(B).values;
  rep.interaction_psd = bvals.minCoeff() >= -1e-12 * std::max(1.0, bvals.cwiseAbs().maxCoeff());

  const RealMatrix M = build_drift(cfg);
  const ComplexVector ev = eigen_all(M).eigenvalues;
  rep.friction_invariant_eigenvalue = friction_invariant_pair(cfg, M, ev);
  rep.zero_gap_flag = gap_from_spectrum(ev).zero_gap;

  if (cfg.boundary == Boundary::Dirichlet && cfg.nnn != 0.0) {
    const auto set = degenerate_omega_enumerate(cfg.n_osc);
    for (const auto& d : set.values)
      if (std::abs(cfg.nnn - d.omega) <= 1e-10 * std::max(1.0, std::abs(d.omega))) rep.degenerate_omega_hits.push_back(d);
    if (!rep.degenerate_omega_hits.empty()) {
      const auto& hit = rep.degenerate_omega_hits.front();
      const auto lap = laplacian_eigensystem(Boundary::Dirichlet, cfg.n_osc, 1.0);
      RealVector w = lap.vectors(0, hit.j) * lap.vectors.col(hit.i) - lap.vectors(0, hit.i) * lap.vectors.col(hit.j);
      w /= w.norm();
      const double nu = nnn_base_eigenvalues(cfg)(hit.i);
      rep.constructed = ConstructedMode{hit, w, (B * w - nu * w).norm(), w(0), w(cfg.n_osc - 1)};
    }
  }

  const bool deficient = rep.kalman.rank < rep.full_rank_needed;
  const bool vanishing = rep.vanishing_mode.has_value();
  const bool invariant = rep.friction_invariant_eigenvalue.has_value();
  if (rep.kalman.borderline) {
    rep.verdict = Verdict::Inconclusive;
    return rep;
  }
  if (deficient != vanishing || vanishing != invariant)
    throw InternalConsistencyError("hypo_verdict: criteria disagree for " + summary(cfg) + " (kalman " +
                                   std::to_string(rep.kalman.rank) + "/" + std::to_string(rep.full_rank_needed) +
                                   ", vanishing " + std::to_string(vanishing) + ", friction-invariant " +
                                   std::to_string(invariant) + ")");
  rep.verdict = deficient ? Verdict::NotHypoelliptic : Verdict::Hypoelliptic;
  return rep;
}

std::string format_report(const HypoReport& rep) {
  std::ostringstream os;
  os.precision(12);
  os << "config: " << summary(rep.cfg) << "\n";
  os << "kalman_rank=" << rep.kalman.rank << "/" << rep.full_rank_needed
     << " weakest_accepted=" << rep.kalman.weakest_accepted << " strongest_rejected=" << rep.kalman.strongest_rejected
     << " borderline=" << rep.kalman.borderline << "\n";
  if (rep.vanishing_mode) {
    os << "vanishing_mode eigenvalue=" << rep.vanishing_mode->eigenvalue
       << " max_end_abs=" << rep.vanishing_mode->max_end_abs << " vector=";
    for (Eigen::Index k = 0; k < rep.vanishing_mode->vector.size(); ++k)
      os << (k ? "," : "") << rep.vanishing_mode->vector(k);
    os << "\n";
  } else {
    os << "vanishing_mode=none\n";
  }
  if (rep.friction_invariant_eigenvalue)
    os << "friction_invariant_eigenvalue=" << rep.friction_invariant_eigenvalue->real() << ","
       << rep.friction_invariant_eigenvalue->imag() << "\n";
  else
    os << "friction_invariant_eigenvalue=none\n";
  os << "zero_gap=" << rep.zero_gap_flag << " interaction_psd=" << rep.interaction_psd << "\n";
  for (const auto& d : rep.degenerate_omega_hits)
    os << "degenerate_omega_hit i=" << d.i + 1 << " j=" << d.j + 1 << " omega=" << d.omega << "\n";
  if (rep.constructed)
    os << "constructed_mode residual=" << rep.constructed->residual << " first=" << rep.constructed->first
       << " last=" << rep.constructed->last << "\n";
  os << "verdict=" << to_string(rep.verdict) << "\n";
  return os.str();
}

}  // namespace chaingap
