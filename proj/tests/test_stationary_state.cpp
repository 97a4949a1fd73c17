#include "chaingap/stationary_state.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace chaingap;

namespace {

ChainConfig chain(int n) {
  ChainConfig c;
  c.n_osc = n;
  c.pinning = 1.0;
  return c;
}

RealMatrix gibbs(const ChainConfig& c, double T) {
  const int n = c.n_osc;
  RealMatrix S = RealMatrix::Zero(2 * n, 2 * n);
  S.topLeftCorner(n, n) = c.mass * T * RealMatrix::Identity(n, n);
  S.bottomRightCorner(n, n) = T * build_interaction(c).inverse();
  return S;
}

}  // namespace

TEST_CASE("gibbs covariance at equal temperatures") {
  for (int n : {1, 4, 9}) {
    ChainConfig c = chain(n);
    c.friction_set = {1, n};
    c.temp_left = c.temp_right = 1.7;
    const RealMatrix G = gibbs(c, 1.7);
    CHECK(lyapunov_residual(dynamics_matrix(c), G, build_noise(c)) <= 1e-12);
    const SteadyState st = invariant_covariance(c);
    CHECK((st.covariance - G).norm() / G.norm() < 1e-10);
    CHECK(st.residual < 1e-12);
    for (Eigen::Index i = 0; i < n; ++i) CHECK(std::abs(st.kinetic_temperature(i) - 1.7) < 1e-10);
  }
}

TEST_CASE("single oscillator by hand") {
  // K = [[g, 3], [-1, 0]] with C = diag(2 g T, 0) gives S = diag(T, T / 3)
  ChainConfig c = chain(1);
  c.friction = 0.8;
  c.temp_left = 2.0;
  const RealMatrix S = lyapunov_solve(dynamics_matrix(c), build_noise(c));
  CHECK(S(0, 0) == doctest::Approx(2.0));
  CHECK(S(1, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(std::abs(S(0, 1)) < 1e-14);
}

TEST_CASE("solvers agree and handle degenerate input") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  RealMatrix K(12, 12);
  for (Eigen::Index i = 0; i < K.size(); ++i) K.data()[i] = g(gen);
  K += 8 * RealMatrix::Identity(12, 12);
  RealMatrix D(12, 3);
  for (Eigen::Index i = 0; i < D.size(); ++i) D.data()[i] = g(gen);
  const RealMatrix C = D * D.transpose();
  const RealMatrix A = lyapunov_kronecker(K, C), B = lyapunov_schur(K, C);
  CHECK((A - B).norm() / A.norm() < 1e-12);
  CHECK(lyapunov_residual(K, A, C) < 1e-12);
  CHECK(lyapunov_solve(K, RealMatrix::Zero(12, 12)).norm() == 0.0);

  RealMatrix unstable = -RealMatrix::Identity(3, 3);
  CHECK_THROWS_AS(lyapunov_solve(unstable, RealMatrix::Identity(3, 3)), NoSteadyState);
  CHECK_THROWS_AS(lyapunov_solve(K, RealMatrix::Identity(3, 3)), PreconditionError);

  ChainConfig big = chain(30);
  big.friction_set = {1, 30};
  big.temp_right = 2.0;
  const RealMatrix Kb = dynamics_matrix(big), Cb = build_noise(big);
  const RealMatrix Sb = lyapunov_schur(Kb, Cb);
  CHECK(lyapunov_residual(Kb, Sb, Cb) < 1e-10);
  CHECK((Sb - lyapunov_kronecker(Kb, Cb)).norm() / Sb.norm() < 1e-9);
}

TEST_CASE("temperature profiles") {
  ChainConfig c = chain(10);
  c.pinning = 0.0;
  c.friction_set = {1, 10};
  c.friction = 1.0;
  c.temp_left = 1.0;
  c.temp_right = 2.0;
  const SteadyState st = invariant_covariance(c);
  const double mid = 1.5;
  // the bulk sits closer to the mean than the ends
  CHECK(std::abs(st.kinetic_temperature(4) - mid) < std::abs(st.kinetic_temperature(0) - mid));
  CHECK(std::abs(st.kinetic_temperature(5) - mid) < std::abs(st.kinetic_temperature(9) - mid));

  ChainConfig m = chain(6);
  m.magnetic = 1.0;
  m.pinning = 0.5;
  m.friction_set = {1, 6};
  const SteadyState sm = invariant_covariance(m);
  CHECK(sm.residual < 1e-12);
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(std::abs(sm.kinetic_temperature(i) - 1.0) < 1e-10);
  // position marginal T B^-1 with the magnetic shift folded into B
  const RealMatrix Binv = build_interaction(m).inverse();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      CHECK(std::abs(sm.covariance(12 + 2 * i, 12 + 2 * j) - Binv(i, j)) < 1e-10);
      CHECK(std::abs(sm.covariance(12 + 2 * i + 1, 12 + 2 * j + 1) - Binv(i, j)) < 1e-10);
    }
}

TEST_CASE("lattice spectrum") {
  ComplexVector a(1);
  a << cplx(0.7, 0);
  auto L = spectrum_lattice(a, 3, 100.0);
  REQUIRE(L.points.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(L.points[k].value - cplx(0.7 * k)) < 1e-15);

  ComplexVector b(2);
  b << cplx(1, 1), cplx(1, -1);
  L = spectrum_lattice(b, 2, 100.0);
  std::vector<cplx> expect{cplx(0), cplx(1, -1), cplx(1, 1), cplx(2, -2), cplx(2, 0), cplx(2, 2)};
  REQUIRE(L.points.size() == expect.size());
  for (std::size_t k = 0; k < expect.size(); ++k) CHECK(std::abs(L.points[k].value - expect[k]) < 1e-15);

  ChainConfig c = chain(5);
  const ComplexVector base = eigen_all(build_drift(c)).eigenvalues;
  L = spectrum_lattice(base, 2, 1e9);
  std::vector<cplx> brute{cplx(0)};
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    brute.push_back(base(i));
    for (Eigen::Index j = i; j < base.size(); ++j) brute.push_back(base(i) + base(j));
  }
  std::sort(brute.begin(), brute.end(), [](cplx x, cplx y) { return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag(); });
  std::vector<cplx> unique;
  for (cplx z : brute) {
    bool dup = false;
    for (cplx u : unique) dup = dup || std::abs(u - z) <= 1e-10;
    if (!dup) unique.push_back(z);
  }
  REQUIRE(L.points.size() == unique.size());
  for (cplx z : unique) {
    double best = 1e9;
    for (const auto& p : L.points) best = std::min(best, std::abs(p.value - z));
    CHECK(best <= 1e-10);
  }
  CHECK(lattice_gap(spectrum_lattice(base)) == doctest::Approx(fp_gap(c).gap).epsilon(1e-12));

  CHECK_THROWS_AS(spectrum_lattice(ComplexVector(), 2), PreconditionError);
  ComplexVector bad(1);
  bad << cplx(-1, 0);
  CHECK_THROWS_AS(spectrum_lattice(bad, 2), PreconditionError);
}

TEST_CASE("fokker-planck gap basics") {
  ChainConfig c = chain(1);
  c.friction = 0.5;
  CHECK(fp_gap(c).gap == doctest::Approx(0.25));
  ChainConfig warm = c;
  warm.temp_left = 5.0;
  CHECK(fp_gap(warm).gap == fp_gap(c).gap);
}
