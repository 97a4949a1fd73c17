#include "chaingap/wigner.hpp"

#include "chaingap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace chaingap {

namespace {

constexpr cplx I1(0.0, 1.0);
constexpr double inf = std::numeric_limits<double>::infinity();

RealMatrix project(const std::vector<Port>& ports, const RealMatrix& V, Slot slot) {
  RealMatrix out = RealMatrix::Zero(static_cast<Eigen::Index>(ports.size()), V.cols());
  for (std::size_t r = 0; r < ports.size(); ++r)
    for (const auto& t : ports[r])
      if (t.slot == slot) out.row(r) += t.coeff * V.row(t.site);
  return out;
}

}  // namespace

ModalResolvent::ModalResolvent(const SymmetricEigensystem& sys, double mass, double a, std::vector<Port> inputs,
                               std::vector<Port> outputs)
    : modes_(static_cast<int>(sys.values.size())),
      ports_(static_cast<int>(inputs.size())),
      mass_(mass),
      a_(a),
      lambda_(sys.values),
      first_sq_(sys.vectors.row(0).transpose().array().square()),
      root_(sys.values.size()) {
  if (inputs.size() != outputs.size() || inputs.empty())
    throw PreconditionError("ModalResolvent: need matching, nonempty input and output ports");
  for (int j = 0; j < modes_; ++j) root_(j) = std::sqrt(cplx(a * a + lambda_(j) / mass));
  const RealMatrix op = project(outputs, sys.vectors, Slot::P), oq = project(outputs, sys.vectors, Slot::Q);
  const RealMatrix ip = project(inputs, sys.vectors, Slot::P), iq = project(inputs, sys.vectors, Slot::Q);
  alpha_.resize(static_cast<std::size_t>(ports_) * ports_ * modes_);
  beta_.resize(alpha_.size());
  for (int r = 0; r < ports_; ++r)
    for (int s = 0; s < ports_; ++s)
      for (int j = 0; j < modes_; ++j) {
        const std::size_t k = (static_cast<std::size_t>(r) * ports_ + s) * modes_ + j;
        const double pp = op(r, j) * ip(s, j), qq = oq(r, j) * iq(s, j);
        alpha_[k] = pp + qq;
        beta_[k] = I1 * a * (pp - qq) - op(r, j) * iq(s, j) / mass + lambda_(j) * oq(r, j) * ip(s, j);
      }
}

ComplexVector ModalResolvent::poles() const {
  ComplexVector p(2 * modes_);
  for (int j = 0; j < modes_; ++j) {
    p(2 * j) = pole(j, +1);
    p(2 * j + 1) = pole(j, -1);
  }
  return p;
}

ComplexMatrix ModalResolvent::eval(cplx z) const {
  ComplexMatrix G = ComplexMatrix::Zero(ports_, ports_);
  std::vector<cplx> inv(modes_);
  for (int j = 0; j < modes_; ++j) inv[j] = 1.0 / denom(z, j);
  for (int r = 0; r < ports_; ++r)
    for (int s = 0; s < ports_; ++s) {
      const std::size_t base = (static_cast<std::size_t>(r) * ports_ + s) * modes_;
      cplx acc = 0;
      for (int j = 0; j < modes_; ++j) acc += (alpha_[base + j] * z + beta_[base + j]) * inv[j];
      G(r, s) = acc;
    }
  return G;
}

ComplexMatrix ModalResolvent::derivative(cplx z) const {
  ComplexMatrix D = ComplexMatrix::Zero(ports_, ports_);
  std::vector<cplx> inv(modes_), dd(modes_);
  for (int j = 0; j < modes_; ++j) {
    inv[j] = 1.0 / denom(z, j);
    dd[j] = 2.0 * z;
  }
  for (int r = 0; r < ports_; ++r)
    for (int s = 0; s < ports_; ++s) {
      const std::size_t base = (static_cast<std::size_t>(r) * ports_ + s) * modes_;
      cplx acc = 0;
      for (int j = 0; j < modes_; ++j) {
        const cplx num = alpha_[base + j] * z + beta_[base + j];
        acc += (alpha_[base + j] - num * dd[j] * inv[j]) * inv[j];
      }
      D(r, s) = acc;
    }
  return D;
}

ComplexMatrix ModalResolvent::residue(int j, int sign) const {
  ComplexMatrix R(ports_, ports_);
  const cplx mu = pole(j, sign), other = pole(j, -sign);
  const bool merged = std::abs(root_(j)) < 1e-300;
  for (int r = 0; r < ports_; ++r)
    for (int s = 0; s < ports_; ++s) {
      const std::size_t k = (static_cast<std::size_t>(r) * ports_ + s) * modes_ + j;
      R(r, s) = merged ? alpha_[k] / 2.0 : (alpha_[k] * mu + beta_[k]) / (mu - other);
    }
  return R;
}

ComplexMatrix ModalResolvent::regular_part(cplx z, int j, int sign) const {
  ComplexMatrix G = ComplexMatrix::Zero(ports_, ports_);
  for (int r = 0; r < ports_; ++r)
    for (int s = 0; s < ports_; ++s) {
      const std::size_t base = (static_cast<std::size_t>(r) * ports_ + s) * modes_;
      cplx acc = 0;
      for (int k = 0; k < modes_; ++k)
        if (k != j) acc += (alpha_[base + k] * z + beta_[base + k]) / denom(z, k);
      G(r, s) = acc;
    }
  const cplx other = pole(j, -sign);
  if (std::abs(root_(j)) >= 1e-300) G += residue(j, -sign) / (z - other);
  return G;
}

double ModalResolvent::anchor_scale(int j, int sign) const {
  const cplx mu = pole(j, sign);
  const cplx res = std::abs(root_(j)) < 1e-300 ? cplx(0.5) : (mu + I1 * a_) / (2.0 * mu);
  return first_sq_(j) * std::abs(res);
}

double ModalResolvent::nearest_pole(cplx z, int* jj, int* ss) const {
  double best = inf;
  for (int j = 0; j < modes_; ++j)
    for (int s : {+1, -1}) {
      const double d = std::abs(z - pole(j, s));
      if (d < best) {
        best = d;
        if (jj) *jj = j;
        if (ss) *ss = s;
      }
    }
  return best;
}

cplx ModalResolvent::det_reduced(cplx z) const {
  return (ComplexMatrix::Identity(ports_, ports_) - eval(z)).determinant();
}

cplx ModalResolvent::log_derivative(cplx z) const {
  const ComplexMatrix H = ComplexMatrix::Identity(ports_, ports_) - eval(z);
  const ComplexMatrix Gp = derivative(z);
  cplx acc;
  if (ports_ == 1) acc = -Gp(0, 0) / H(0, 0);
  else acc = -(H.partialPivLu().solve(Gp)).trace();
  for (int j = 0; j < modes_; ++j) acc += 1.0 / (z - pole(j, +1)) + 1.0 / (z - pole(j, -1));
  return acc;
}

// ------ builders ------

ModalResolvent friction_resolvent(const ChainConfig& cfg, const SymmetricEigensystem& sys, int block_sign) {
  std::vector<Port> ports;
  const double g = std::sqrt(cfg.friction);
  for (int s : frictional_sites(cfg)) ports.push_back({{Slot::P, s, g}});
  return ModalResolvent(sys, cfg.mass, block_sign * cfg.magnetic / cfg.mass, ports, ports);
}

ModalResolvent friction_resolvent(const ChainConfig& cfg, int block_sign) {
  return friction_resolvent(cfg, interaction_modes(cfg).system, block_sign);
}

ModalResolvent critical_resolvent(const ChainConfig& cfg) {
  validate(cfg);
  if (cfg.boundary != Boundary::Dirichlet) throw ConfigError("critical_resolvent: Dirichlet boundary required");
  const int n = cfg.n_osc;
  std::vector<int> sites = frictional_sites(cfg);
  std::vector<int> ends{0};
  if (cfg.nnn_rank == NnnRank::RankTwo) ends.push_back(n - 1);
  for (int e : ends)
    if (std::find(sites.begin(), sites.end(), e) == sites.end()) sites.push_back(e);
  std::sort(sites.begin(), sites.end());
  const auto fr = frictional_sites(cfg);
  std::vector<Port> inputs, outputs;
  for (int s : sites) {
    Port in;
    if (std::find(fr.begin(), fr.end(), s) != fr.end()) in.push_back({Slot::P, s, cfg.friction});
    if (std::find(ends.begin(), ends.end(), s) != ends.end() && cfg.nnn != 0.0)
      in.push_back({Slot::Q, s, (n == 1 && ends.size() == 2 ? -4.0 : -2.0) * cfg.nnn});
    inputs.push_back(in);
    outputs.push_back({{Slot::P, s, 1.0}});
  }
  return ModalResolvent(nnn_base_system(cfg), cfg.mass, 0.0, inputs, outputs);
}

ComplexMatrix wigner_eval(cplx lambda, const ModalResolvent& res) {
  const cplx z = -I1 * lambda;
  int j = 0, s = 0;
  if (res.nearest_pole(z, &j, &s) < 1e-12)
    throw PoleProximityError("wigner_eval: spectral parameter at a pole of the unforced block", j);
  return -I1 * res.eval(z);
}

// ------ contour counting ------

ContourCount contour_count(const ModalResolvent& res, cplx center, double radius) {
  ContourCount out;
  const ComplexVector P = res.poles();
  for (Eigen::Index k = 0; k < P.size(); ++k)
    if (std::abs(P(k) - center) < radius) ++out.poles;
  double prev0 = inf;
  cplx s1;
  for (int K = 128; K <= (1 << 16); K *= 2) {
    cplx s0 = 0;
    s1 = 0;
    for (int k = 0; k < K; ++k) {
      const cplx e = std::polar(radius, 2 * std::numbers::pi * (k + 0.5) / K);
      const cplx z = center + e;
      const cplx L = res.log_derivative(z);
      s0 += L * e;
      s1 += L * z * e;
    }
    s0 /= double(K);
    s1 /= double(K);
    const double c = s0.real();
    if (std::isfinite(c) && std::abs(c - prev0) < 1e-6 && std::abs(c - std::round(c)) < 1e-3 &&
        std::abs(s0.imag()) < 1e-3) {
      out.zeros = static_cast<int>(std::lround(c));
      if (out.zeros == 1) out.single_zero = s1;
      return out;
    }
    prev0 = c;
  }
  throw LocalizationFailure("contour_count: argument principle did not stabilise");
}

// ------ localisation ------

namespace {

struct NewtonOutcome {
  cplx z;
  bool converged{false};
};

NewtonOutcome scalar_newton(const ModalResolvent& res, cplx z) {
  for (int it = 0; it < 100; ++it) {
    const cplx G = res.eval(z)(0, 0), Gp = res.derivative(z)(0, 0);
    if (!std::isfinite(std::abs(G)) || !std::isfinite(std::abs(Gp)) || Gp == cplx(0)) return {z, false};
    cplx step = (1.0 - G) / (-Gp);
    const double limit = 0.9 * res.nearest_pole(z);
    if (std::abs(step) > limit) step *= limit / std::abs(step);
    z -= step;
    if (std::abs(step) <= 4e-16 * std::max(std::abs(z), 1e-300)) return {z, true};
  }
  return {z, false};
}

}  // namespace

RootLocalization localize_root(int i, int sign, const ModalResolvent& res) {
  if (res.ports() != 1) throw PreconditionError("localize_root: scalar Wigner function required");
  if (i < 0 || i >= res.modes()) throw std::out_of_range("localize_root: mode index");
  RootLocalization out;
  out.index = i;
  out.sign = sign;
  const cplx mu = res.pole(i, sign);
  out.reference = mu;
  out.anchor_scale = res.anchor_scale(i, sign);

  auto owned = [&](cplx z) {
    int j = -1, s = 0;
    res.nearest_pole(z, &j, &s);
    return j == i && s == sign;
  };
  auto finish = [&](cplx z, const char* method) {
    out.root = z;
    out.distance = std::abs(z - mu);
    out.residual = std::abs(1.0 - res.eval(z)(0, 0));
    out.ratio = out.distance / out.anchor_scale;
    out.real_part_ratio = z.real() / out.anchor_scale;
    out.method = method;
    // 1e-10, relaxed to the rounding floor of 1 - G where G is steep
    const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::abs(z) * std::abs(res.derivative(z)(0, 0));
    out.verified = out.residual <= std::max(1e-10, floor) && owned(z);
    return out.verified;
  };

  const cplx c = res.residue(i, sign)(0, 0);
  if (c != cplx(0)) {
    const cplx rest = res.regular_part(mu, i, sign)(0, 0);
    const cplx seed = mu + c / (1.0 - rest);
    if (std::isfinite(std::abs(seed))) {
      const auto nt = scalar_newton(res, seed);
      if (nt.converged && finish(nt.z, "newton")) {
        const double r = 1.5 * out.distance;
        try {
          if (contour_count(res, mu, r).zeros == 1) return out;
        } catch (const LocalizationFailure&) {
        }
        out.verified = false;
      }
    }
  }

  double spacing = inf;
  for (int j = 0; j < res.modes(); ++j)
    for (int s : {+1, -1})
      if (j != i || s != sign) spacing = std::min(spacing, std::abs(res.pole(j, s) - mu));
  double scale = out.anchor_scale > 0 ? out.anchor_scale : std::abs(c);
  if (spacing > 0) scale = std::min(scale, spacing);
  if (scale > 0) {
    for (double f : {1.0, 2.0, 4.0, 8.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625}) {
      ContourCount cc;
      try {
        cc = contour_count(res, mu, f * scale);
      } catch (const LocalizationFailure&) {
        continue;
      }
      if (cc.zeros != 1 || !cc.single_zero) continue;
      const auto nt = scalar_newton(res, *cc.single_zero);
      const cplx z = nt.converged ? nt.z : *cc.single_zero;
      if (std::abs(z - mu) < f * scale && finish(z, "contour")) return out;
    }
  }
  throw LocalizationFailure("localize_root: no isolated root near mode (" + std::to_string(i) + "," +
                            std::to_string(sign) + ")");
}

std::vector<RootLocalization> localize_all(const ModalResolvent& res, int threads) {
  const int n = res.modes();
  std::vector<RootLocalization> out(2 * n);
  parallel_for(2 * n, threads, [&](int k) { out[k] = localize_root(k / 2, k % 2 == 0 ? +1 : -1, res); });
  for (std::size_t a = 0; a < out.size(); ++a)
    for (std::size_t b = a + 1; b < out.size(); ++b)
      if (std::abs(out[a].root - out[b].root) <= 1e-13 * std::max(1.0, std::abs(out[a].root)))
        throw InternalConsistencyError("localize_all: one root claimed by two reference modes");
  return out;
}

// ------ all roots ------

ComplexVector all_roots(const ModalResolvent& res) {
  const ComplexVector P = res.poles();
  const int n = static_cast<int>(P.size());
  ComplexVector z(n);
  for (int k = 0; k < n; ++k) {
    const int j = k / 2, s = k % 2 == 0 ? +1 : -1;
    const cplx shift = res.residue(j, s).trace();
    const cplx jitter = std::polar(1e-9 * (1.0 + std::abs(P(k))), 0.7 + 2.399963 * k);
    z(k) = P(k) + (std::isfinite(std::abs(shift)) ? shift : cplx(0)) + jitter;
  }
  double worst = inf;
  for (int it = 0; it < 3000; ++it) {
    worst = 0;
    for (int k = 0; k < n; ++k) {
      cplx L = res.log_derivative(z(k));
      if (!std::isfinite(std::abs(L))) {
        z(k) += std::polar(1e-14 * (1.0 + std::abs(z(k))), 1.0 + k);
        worst = inf;
        continue;
      }
      const cplx w = 1.0 / L;
      cplx S = 0;
      for (int l = 0; l < n; ++l)
        if (l != k) S += 1.0 / (z(k) - z(l));
      const cplx corr = w / (1.0 - w * S);
      if (!std::isfinite(std::abs(corr))) continue;
      z(k) -= corr;
      worst = std::max(worst, std::abs(corr) / std::max(1.0, std::abs(z(k))));
    }
    if (worst < 1e-15) break;
  }
  if (!(worst < 1e-9)) throw NumericalError("all_roots: Aberth iteration did not converge");
  return sorted_spectrum(z);
}

ComplexVector wigner_spectrum(const ChainConfig& cfg) {
  validate(cfg);
  const auto sys = interaction_modes(cfg).system;
  const ComplexVector r = all_roots(friction_resolvent(cfg, sys, +1));
  if (!is_planar(cfg)) return r;
  ComplexVector out(2 * r.size());
  out << r, r.conjugate();
  return sorted_spectrum(out);
}

WignerGap gap_from_wigner(const ChainConfig& cfg) {
  WignerGap out;
  out.gap = gap_from_spectrum(wigner_spectrum(cfg));
  const ModalResolvent res = friction_resolvent(cfg, +1);
  int j = -1, s = 0, j2 = -1, s2 = 0;
  const double d1 = res.nearest_pole(out.gap.achieving, &j, &s);
  const double d2 = res.nearest_pole(std::conj(out.gap.achieving), &j2, &s2);
  out.mode_index = d1 <= d2 ? j : j2;
  out.mode_sign = d1 <= d2 ? s : s2;
  return out;
}

RootLocalization critical_localization(const ChainConfig& cfg) {
  const ModalResolvent res = critical_resolvent(cfg);
  return localize_root(cfg.n_osc - 1, +1, res);
}

}  // namespace chaingap
