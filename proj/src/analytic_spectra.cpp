#include "chaingap/analytic_spectra.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chaingap {

namespace {

constexpr double pi = std::numbers::pi;

double dirichlet_angle(int n, int j) { return pi * (j + 1) / (2.0 * (n + 1)); }

// lambda_k - lambda_j for the unit Dirichlet Laplacian without cancellation
double dirichlet_difference(int n, int k, int j) {
  const double a = dirichlet_angle(n, k), b = dirichlet_angle(n, j);
  return 4 * std::sin(a - b) * std::sin(a + b);
}

}  // namespace

double dirichlet_eigenvalue(int n, int j) {
  const double s = std::sin(dirichlet_angle(n, j));
  return 4 * s * s;
}

double dirichlet_first_weight(int n, int j) {
  const double s = std::sin(pi * (j + 1) / (n + 1));
  return 2.0 / (n + 1) * s * s;
}

SymmetricEigensystem laplacian_eigensystem(Boundary bc, int n, double xi) {
  if (n < 1) throw std::invalid_argument("laplacian_eigensystem: invalid dimension");
  SymmetricEigensystem out{RealVector(n), RealMatrix(n, n)};
  if (bc == Boundary::Dirichlet) {
    const double c = std::sqrt(2.0 / (n + 1));
    for (int j = 0; j < n; ++j) {
      out.values(j) = xi * dirichlet_eigenvalue(n, j);
      for (int i = 0; i < n; ++i) out.vectors(i, j) = c * std::sin((i + 1) * (j + 1) * pi / (n + 1));
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double s = std::sin(pi * j / (2.0 * n));
      out.values(j) = 4 * xi * s * s;
      const double c = j == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int i = 0; i < n; ++i) out.vectors(i, j) = c * std::cos(pi * j * (2 * i + 1) / (2.0 * n));
    }
  }
  return out;
}

InteractionModes interaction_modes(const ChainConfig& cfg) {
  validate(cfg);
  if (cfg.nnn == 0.0) {
    auto sys = laplacian_eigensystem(cfg.boundary, cfg.n_osc, cfg.coupling);
    sys.values.array() += cfg.pinning + cfg.magnetic * cfg.magnetic / (2 * cfg.mass);
    return {std::move(sys), ModeSource::ClosedForm};
  }
  if (cfg.boundary == Boundary::Dirichlet && cfg.nnn_rank == NnnRank::RankOne) {
    try {
      const auto roots = secular_solve(cfg);
      SymmetricEigensystem sys{RealVector(cfg.n_osc), perturbed_vectors(cfg, roots)};
      for (int j = 0; j < cfg.n_osc; ++j) sys.values(j) = roots[j].value;
      return {std::move(sys), ModeSource::Secular};
    } catch (const NumericalError&) {
    }
  }
  return {dense_symmetric(build_interaction(cfg)), ModeSource::Dense};
}

std::vector<ModePair> modes_from(const SymmetricEigensystem& sys, double mass, double a) {
  const int n = static_cast<int>(sys.values.size());
  std::vector<ModePair> out;
  out.reserve(2 * n);
  for (int j = 0; j < n; ++j) {
    const cplx root = std::sqrt(cplx(a * a + sys.values(j) / mass));
    const double v1 = sys.vectors(0, j);
    for (int s : {+1, -1}) {
      ModePair mp;
      mp.index = j;
      mp.sign = s;
      mp.eigenvalue = cplx(0, s) * root;
      ComplexVector V(2 * n);
      V.head(n) = sys.vectors.col(j).cast<cplx>();
      V.tail(n) = (mass * (cplx(0, a) - mp.eigenvalue)) * sys.vectors.col(j).cast<cplx>();
      V /= V.norm();
      mp.eigenvector = std::move(V);
      mp.first_component_sq = std::norm(mp.eigenvector(0));
      const cplx res = std::abs(root) < 1e-300 ? cplx(0.5) : (mp.eigenvalue + cplx(0, a)) / (2.0 * mp.eigenvalue);
      mp.residue_weight = v1 * v1 * res;
      out.push_back(std::move(mp));
    }
  }
  return out;
}

std::vector<ModePair> unforced_modes(const ChainConfig& cfg) {
  return modes_from(interaction_modes(cfg).system, cfg.mass, cfg.magnetic / cfg.mass);
}

RealVector nnn_base_eigenvalues(const ChainConfig& cfg) {
  validate(cfg);
  if (cfg.boundary != Boundary::Dirichlet) throw ConfigError("nnn_base_eigenvalues: Dirichlet boundary required");
  const int n = cfg.n_osc;
  RealVector nu(n);
  for (int j = 0; j < n; ++j) {
    const double l = dirichlet_eigenvalue(n, j);
    nu(j) = (cfg.coupling + 4 * cfg.nnn) * l - cfg.nnn * l * l + cfg.pinning;
  }
  return nu;
}

SymmetricEigensystem nnn_base_system(const ChainConfig& cfg) {
  auto sys = laplacian_eigensystem(Boundary::Dirichlet, cfg.n_osc, 1.0);
  sys.values = nnn_base_eigenvalues(cfg);
  return sys;
}

std::vector<ModePair> nnn_unperturbed_modes(const ChainConfig& cfg) {
  return modes_from(nnn_base_system(cfg), cfg.mass, 0.0);
}

// ------ secular equation ------

namespace {

struct Secular {
  int n;
  double omega, xi, eta;
  RealVector z;

  explicit Secular(const ChainConfig& cfg)
      : n(cfg.n_osc), omega(cfg.nnn), xi(cfg.coupling), eta(cfg.pinning), z(cfg.n_osc) {
    for (int k = 0; k < n; ++k) z(k) = dirichlet_first_weight(n, k);
  }

  double nu(int k) const {
    const double l = dirichlet_eigenvalue(n, k);
    return (xi + 4 * omega) * l - omega * l * l + eta;
  }
  // nu_k - nu_a
  double diff(int k, int a) const {
    if (k == a) return 0.0;
    const double lk = dirichlet_eigenvalue(n, k), la = dirichlet_eigenvalue(n, a);
    return dirichlet_difference(n, k, a) * ((xi + 4 * omega) - omega * (lk + la));
  }
  RealVector diffs(int a) const {
    RealVector d(n);
    for (int k = 0; k < n; ++k) d(k) = diff(k, a);
    return d;
  }
  // W and dW/dxi at xi = nu_a + s
  std::pair<double, double> eval(const RealVector& d, double s) const {
    double w = 0, dw = 0;
    for (int k = 0; k < n; ++k) {
      const double den = d(k) - s;
      w += z(k) / den;
      dw += z(k) / (den * den);
    }
    return {2 * omega * w, 2 * omega * dw};
  }
};

}  // namespace

std::vector<SecularRoot> secular_solve(const ChainConfig& cfg) {
  validate(cfg);
  if (cfg.boundary != Boundary::Dirichlet || cfg.nnn_rank != NnnRank::RankOne)
    throw ConfigError("secular_solve: Dirichlet rank-one configuration required");
  const Secular sec(cfg);
  const int n = sec.n;
  std::vector<SecularRoot> roots(n);
  if (cfg.nnn == 0.0) {
    for (int j = 0; j < n; ++j) roots[j] = {sec.nu(j), 0.0, j, 0.0};
    return roots;
  }
  for (int k = 0; k + 1 < n; ++k)
    if (sec.diff(k + 1, k) < 1e-10)
      throw UnsupportedRegime("secular_solve: base eigenvalues not strictly increasing (nnn too large)");

  const bool increasing = sec.omega > 0;
  const double outer = 2 * std::abs(sec.omega) + 1e-9;
  for (int j = 0; j < n; ++j) {
    const int lo = increasing ? j - 1 : j;
    const int hi = increasing ? j : (j + 1 < n ? j + 1 : -1);
    int near;
    int dir;  // value = nu_near + dir * u
    double umax;
    double span = 0;
    if (lo >= 0 && hi >= 0) {
      span = sec.diff(hi, lo);
      const double fmid = sec.eval(sec.diffs(lo), span / 2).first - 1;
      const bool lower_half = increasing ? fmid > 0 : fmid < 0;
      near = lower_half ? lo : hi;
      dir = lower_half ? +1 : -1;
      umax = span / 2;
    } else if (hi >= 0) {
      near = hi, dir = -1, umax = outer;
    } else {
      near = lo, dir = +1, umax = outer;
    }
    const RealVector d = sec.diffs(near);
    auto g = [&](double u) { return sec.eval(d, dir * u).first - 1; };
    // sign of g as u -> 0+
    const double s0 = (sec.omega > 0 ? 1.0 : -1.0) * (-dir);
    double a = 0, b = umax;
    const double gb = g(b);
    if (gb * s0 > 0) throw NumericalError("secular_solve: bracket lost for root " + std::to_string(j));
    for (int it = 0; it < 400 && (b - a) > 1e-15 * b; ++it) {
      const double m = 0.5 * (a + b);
      if (g(m) * s0 > 0) a = m;
      else b = m;
    }
    double u = 0.5 * (a + b);
    for (int it = 0; it < 4; ++it) {
      const auto [w, dw] = sec.eval(d, dir * u);
      const double step = (w - 1) / (dir * dw);
      const double next = u - step;
      if (!(next > 0) || next > umax) break;
      if (std::abs(next - u) <= 4e-16 * u) {
        u = next;
        break;
      }
      u = next;
    }
    SecularRoot r;
    r.anchor = near;
    r.offset = dir * u;
    r.value = sec.nu(near) + r.offset;
    r.gap_to_base = near == j ? u : span - u;
    roots[j] = r;
  }
  return roots;
}

double secular_function(const ChainConfig& cfg, const SecularRoot& root) {
  const Secular sec(cfg);
  return sec.eval(sec.diffs(root.anchor), root.offset).first;
}

RealMatrix perturbed_vectors(const ChainConfig& cfg, const std::vector<SecularRoot>& roots) {
  const Secular sec(cfg);
  const int n = sec.n;
  const auto base = laplacian_eigensystem(Boundary::Dirichlet, n, 1.0);
  RealMatrix W(n, static_cast<Eigen::Index>(roots.size()));
  for (std::size_t j = 0; j < roots.size(); ++j) {
    if (cfg.nnn == 0.0) {
      W.col(j) = base.vectors.col(j);
      continue;
    }
    const RealVector d = sec.diffs(roots[j].anchor);
    RealVector coef(n);
    for (int k = 0; k < n; ++k) {
      const double den = d(k) - roots[j].offset;
      if (std::abs(den) < 1e-14)
        throw IllConditionedMode("perturbed_vectors: root " + std::to_string(j) + " collides with base mode " +
                                 std::to_string(k));
      coef(k) = base.vectors(0, k) / den;
    }
    RealVector w = base.vectors * coef;
    W.col(j) = w / w.norm();
  }
  return W;
}

// ------ spacing ------

const ModePair& find_mode(const std::vector<ModePair>& modes, int i, int sign) {
  for (const auto& m : modes)
    if (m.index == i && m.sign == sign) return m;
  throw std::out_of_range("find_mode: no mode (" + std::to_string(i) + "," + std::to_string(sign) + ")");
}

SpacingReport eigen_spacing(const std::vector<ModePair>& modes, int i, int sign) {
  const ModePair& ref = find_mode(modes, i, sign);
  SpacingReport rep;
  rep.kappa.resize(static_cast<Eigen::Index>(modes.size()) - 1);
  rep.min_spacing = std::numeric_limits<double>::infinity();
  Eigen::Index k = 0;
  for (const auto& m : modes) {
    if (m.index == i && m.sign == sign) continue;
    rep.kappa(k++) = cplx(0, -1) * (m.eigenvalue - ref.eigenvalue);
    rep.labels.emplace_back(m.index, m.sign);
    rep.min_spacing = std::min(rep.min_spacing, std::abs(m.eigenvalue - ref.eigenvalue));
  }
  rep.anchor_scale = ref.first_component_sq;
  rep.spacing_violation = rep.min_spacing < rep.anchor_scale;
  return rep;
}

// ------ Riemann bracket ------

RiemannBracket riemann_bracket(const std::function<double(double)>& f, int n, int k1, int k2) {
  if (n < 1 || k1 < 1 || k2 < 1 || k1 > n - k2)
    throw PreconditionError("riemann_bracket: need n >= 1, k1, k2 >= 1 and k1 <= n - k2");
  const double a_lo = (k1 - 1.0) / n, b_lo = 1.0 - static_cast<double>(k2) / n;
  const double a_up = static_cast<double>(k1) / n, b_up = 1.0 - (k2 - 1.0) / n;

  RiemannBracket out;
  const int samples = 16 * n + 1;
  double prev = f(a_lo);
  const double scale = std::max({1.0, std::abs(prev), std::abs(f(b_up))});
  for (int s = 1; s < samples; ++s) {
    const double t = a_lo + (b_up - a_lo) * s / (samples - 1);
    const double cur = f(t);
    if (!std::isfinite(cur)) throw PreconditionError("riemann_bracket: non-finite sample");
    if (cur < prev - 1e-14 * scale) throw PreconditionError("riemann_bracket: function is not increasing");
    if (cur <= prev + 1e-14 * scale) out.weakly_monotone = true;
    prev = cur;
  }

  using boost::math::quadrature::gauss_kronrod;
  out.lower = gauss_kronrod<double, 31>::integrate(f, a_lo, b_lo, 15, 1e-12);
  out.upper = gauss_kronrod<double, 31>::integrate(f, a_up, b_up, 15, 1e-12);
  double s = 0;
  for (int i = k1; i <= n - k2; ++i) s += f(static_cast<double>(i) / n);
  out.sum = s / n;
  return out;
}

}  // namespace chaingap
