#include "chaingap/stationary_state.hpp"
#include "chaingap/wigner.hpp"

#include <doctest.h>

#include <cmath>

using namespace chaingap;

namespace {

ChainConfig chain(int n, double gamma, double eta, double b0 = 0.0) {
  ChainConfig c;
  c.n_osc = n;
  c.friction = gamma;
  c.pinning = eta;
  c.magnetic = b0;
  return c;
}

// multiset distance between a computed spectrum and the dense eigensolver
double mismatch(const ComplexVector& a, const ComplexVector& b) {
  if (a.size() != b.size()) return 1e300;
  return match_spectra(a, b, 1e-8).max_distance;
}

}  // namespace

TEST_CASE("single oscillator") {
  const auto c = chain(1, 0.5, 1.0);
  const auto res = friction_resolvent(c);
  const ComplexVector roots = all_roots(res);
  CHECK(mismatch(roots, eigen_all(build_drift(c)).eigenvalues) < 1e-10);

  // W_F(lambda) = -i at lambda = i z
  for (Eigen::Index k = 0; k < roots.size(); ++k) {
    const ComplexMatrix W = wigner_eval(cplx(0, 1) * roots(k), res);
    CHECK(std::abs(W(0, 0) + cplx(0, 1)) < 1e-10);
  }

  // explicit two-pole form of G for N = 1
  const cplx z(0.3, 0.7);
  const double g = 0.5, s = std::sqrt(3.0);
  const cplx explicit_g = g * (z / ((z - cplx(0, s)) * (z + cplx(0, s))));
  CHECK(std::abs(res.eval(z)(0, 0) - explicit_g) < 1e-14);

  CHECK_THROWS_AS(wigner_eval(cplx(0, 1) * res.pole(0, +1), res), PoleProximityError);
}

TEST_CASE("switched-off friction gives a vanishing Wigner function") {
  const auto sys = laplacian_eigensystem(Boundary::Dirichlet, 6, 1.0);
  const std::vector<Port> ports{{{Slot::P, 0, 0.0}}};
  const ModalResolvent res(sys, 1.0, 0.0, ports, ports);
  for (cplx z : {cplx(0.1, 0.2), cplx(-1, 3), cplx(2, -0.5)}) CHECK(std::abs(res.eval(z)(0, 0)) == 0.0);
}

TEST_CASE("two-port reduction reproduces the drift spectrum") {
  auto c = chain(5, 0.7, 0.3);
  c.friction_set = {1, 5};
  CHECK(mismatch(wigner_spectrum(c), eigen_all(build_drift(c)).eigenvalues) < 1e-8);

  c.magnetic = 1.2;
  CHECK(mismatch(wigner_spectrum(c), eigen_all(build_drift(c)).eigenvalues) < 1e-8);

  c = chain(9, 0.4, 0.0);
  c.nnn = 0.2;
  c.friction_set = {1, 9};
  CHECK(mismatch(wigner_spectrum(c), eigen_all(build_drift(c)).eigenvalues) < 1e-8);
}

TEST_CASE("root localisation in annuli") {
  for (double b0 : {0.0, 1.0}) {
    const auto c = chain(50, 0.1, b0 == 0.0 ? 1.0 : 0.0, b0);
    const auto res = friction_resolvent(c, +1);
    const auto locs = localize_all(res, 4);
    REQUIRE(locs.size() == 100);
    double lo = 1e300, hi = 0, rlo = 1e300, rhi = 0;
    ComplexVector roots(100);
    for (std::size_t k = 0; k < locs.size(); ++k) {
      CHECK(locs[k].verified);
      lo = std::min(lo, locs[k].ratio);
      hi = std::max(hi, locs[k].ratio);
      rlo = std::min(rlo, locs[k].real_part_ratio);
      rhi = std::max(rhi, locs[k].real_part_ratio);
      roots(k) = locs[k].root;
    }
    CHECK(lo > 0.01);
    CHECK(hi < 100);
    CHECK(rlo > 0.01);
    CHECK(rhi < 100);
    CHECK(mismatch(roots, eigen_all(magnetic_block(c, +1)).eigenvalues) < 1e-8);
  }
}

TEST_CASE("contour counting") {
  const auto c = chain(8, 0.3, 1.0);
  const auto res = friction_resolvent(c);
  const auto loc = localize_root(3, +1, res);
  const auto one = contour_count(res, loc.reference, 1.5 * loc.distance);
  CHECK(one.zeros == 1);
  REQUIRE(one.single_zero);
  CHECK(std::abs(*one.single_zero - loc.root) < 1e-8);
  const auto all = contour_count(res, cplx(0), 100.0);
  CHECK(all.zeros == 16);
  CHECK(all.poles == 16);
}

TEST_CASE("gap from the Wigner roots") {
  const auto c = chain(20, 0.5, 1.0);
  const WignerGap w = gap_from_wigner(c);
  CHECK(std::abs(w.gap.gap - fp_gap(c).gap) < 1e-8);
  CHECK(w.mode_index >= 0);

  ChainConfig neu;
  neu.n_osc = 5;
  neu.boundary = Boundary::Neumann;
  neu.nnn_rank = NnnRank::RankTwo;
  neu.nnn = 0.5;
  neu.pinning = 0.0;
  neu.friction_set = {1, 5};
  const ComplexVector ev = eigen_all(build_drift(neu)).eigenvalues;
  CHECK(gap_from_spectrum(ev).zero_gap);
  int hits = 0;
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (std::abs(ev(k) - cplx(0, 2)) < 1e-8 || std::abs(ev(k) - cplx(0, -2)) < 1e-8) ++hits;
  CHECK(hits == 2);
}

TEST_CASE("critical-case localisation decays like N^-4") {
  std::vector<double> ln, ld;
  for (int n : {20, 40, 80, 160}) {
    ChainConfig c;
    c.n_osc = n;
    c.nnn = 0.25;
    c.pinning = 0.5;
    const auto loc = critical_localization(c);
    CHECK(loc.verified);
    ln.push_back(std::log(n));
    ld.push_back(std::log(loc.distance));
  }
  const double slope = (ld.back() - ld.front()) / (ln.back() - ln.front());
  CHECK(slope < -3.5);
  CHECK(slope > -4.5);
}
