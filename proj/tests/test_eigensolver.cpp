#include "chaingap/analytic_spectra.hpp"
#include "chaingap/eigensolver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace chaingap;

TEST_CASE("small known spectra") {
  RealMatrix A(2, 2);
  A << 0, -1, 3, 0;
  const auto es = eigen_all(A, true);
  CHECK(es.converged);
  CHECK(std::abs(es.eigenvalues(0) - cplx(0, -std::sqrt(3.0))) < 1e-14);
  CHECK(std::abs(es.eigenvalues(1) - cplx(0, std::sqrt(3.0))) < 1e-14);
  CHECK(es.residuals.maxCoeff() < 1e-14);

  RealVector d(5);
  d << 3.5, -1, 0, 2, 1e-3;
  const auto diag = eigen_all(RealMatrix(d.asDiagonal()));
  RealVector sorted = d;
  std::sort(sorted.data(), sorted.data() + 5);
  for (int k = 0; k < 5; ++k) CHECK(diag.eigenvalues(k) == cplx(sorted(k), 0));
}

TEST_CASE("dirichlet laplacian matches the closed form") {
  const int n = 50;
  const auto es = eigen_all(build_laplacian(Boundary::Dirichlet, n, 1.0));
  for (int j = 0; j < n; ++j) {
    CHECK(std::abs(es.eigenvalues(j) - dirichlet_eigenvalue(n, j)) < 1e-10);
  }
  const auto sym = dense_symmetric(build_laplacian(Boundary::Dirichlet, n, 1.0));
  for (int j = 0; j < n; ++j) CHECK(std::abs(sym.values(j) - dirichlet_eigenvalue(n, j)) < 1e-12);
}

TEST_CASE("residual check") {
  RealMatrix A(2, 2);
  A << 2, 1, 1, 2;
  EigenSystem exact;
  exact.eigenvalues = ComplexVector::Constant(1, cplx(3));
  exact.eigenvectors = ComplexMatrix(2, 1);
  (*exact.eigenvectors) << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  CHECK(residual_check(A, exact).max_residual <= 1e-15);

  EigenSystem bent = exact;
  (*bent.eigenvectors)(0, 0) += 1e-6;
  const double r = residual_check(A, bent).max_residual;
  CHECK(r > 1e-7);
  CHECK(r < 1e-5);

  EigenSystem none;
  none.eigenvalues = exact.eigenvalues;
  CHECK_THROWS_AS(residual_check(A, none), PreconditionError);
}

TEST_CASE("random matrices, balancing and complex input") {
  std::mt19937_64 gen(20240613);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    RealMatrix A(20, 20);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(gen);
    const auto es = eigen_all(A, true);
    CHECK(residual_check(A, es).max_residual <= 1e-10);
    const auto raw = eigen_all(A, true, false);
    CHECK(match_spectra(es.eigenvalues, raw.eigenvalues, 1e-10).max_distance < 1e-10);

    ComplexMatrix C(15, 15);
    for (Eigen::Index i = 0; i < C.size(); ++i) C.data()[i] = cplx(g(gen), g(gen));
    const auto ec = eigen_all(C, true);
    CHECK(residual_check(C, ec).max_residual <= 1e-10);
  }

  // badly scaled similarity: balancing restores the spectrum of the original
  RealMatrix B(3, 3);
  B << 1, 1e6, 0, 1e-6, 2, 1e6, 0, 1e-6, 3;
  RealMatrix copy = B;
  const RealVector D = balance(copy);
  CHECK((D.asDiagonal() * copy * D.cwiseInverse().asDiagonal() - B).norm() < 1e-9 * B.norm());
  CHECK(copy.norm() < B.norm());
}

TEST_CASE("spectrum matching") {
  ComplexVector a(4), b(4);
  a << cplx(1, 1), cplx(1, -1), cplx(2, 0), cplx(0, 3);
  b << cplx(0, 3), cplx(2, 1e-12), cplx(1, -1), cplx(1, 1);
  const auto m = match_spectra(a, b, 1e-9);
  CHECK(m.max_distance < 1e-11);
  CHECK(m.assignment == std::vector<int>{3, 2, 1, 0});

  // greedy would pair 0 with 0 and force a poor second match
  ComplexVector c(2), d(2);
  c << cplx(0), cplx(1);
  d << cplx(0.6), cplx(-0.5);
  const auto opt = match_spectra(c, d, 1e-9);
  CHECK(opt.used_hungarian);
  CHECK(opt.max_distance == doctest::Approx(0.5));

  RealMatrix cost(3, 3);
  cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const auto h = hungarian(cost);
  double total = 0;
  for (int i = 0; i < 3; ++i) total += cost(i, h[i]);
  CHECK(total == doctest::Approx(5.0));
}

TEST_CASE("gap extraction") {
  ChainConfig c;
  c.n_osc = 1;
  c.friction = 0.5;
  c.pinning = 1.0;
  const GapResult g1 = gap_from_spectrum(eigen_all(build_drift(c)).eigenvalues);
  CHECK(g1.gap == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(g1.achieving.imag()) == doctest::Approx(std::sqrt(12 - 0.25) / 2));
  CHECK_FALSE(g1.zero_gap);

  ComplexVector ev(3);
  ev << cplx(0), cplx(1e-12, 2), cplx(1e-12, -2);
  const GapResult g0 = gap_from_spectrum(ev);
  CHECK(g0.zero_gap);
  CHECK(g0.has_zero_mode);

  ev << cplx(-0.1, 0), cplx(1, 0), cplx(2, 0);
  CHECK(gap_from_spectrum(ev).unstable);

  c.n_osc = 20;
  double previous = 1e9;
  for (double gamma : {1e-1, 1e-2, 1e-3}) {
    c.friction = gamma;
    const double gap = gap_from_spectrum(eigen_all(build_drift(c)).eigenvalues).gap;
    CHECK(gap < previous);
    previous = gap;
  }

  // temperatures do not enter the drift
  c.temp_left = 3.0;
  const double hot = gap_from_spectrum(eigen_all(build_drift(c)).eigenvalues).gap;
  CHECK(hot == previous);
}
