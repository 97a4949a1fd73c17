#include "chaingap/analytic_spectra.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace chaingap;

namespace {

ChainConfig nnn_chain(int n, double omega, double eta) {
  ChainConfig c;
  c.n_osc = n;
  c.nnn = omega;
  c.pinning = eta;
  return c;
}

}  // namespace

TEST_CASE("closed-form laplacian eigensystems") {
  for (int n : {1, 2, 3, 7, 50}) {
    for (Boundary bc : {Boundary::Dirichlet, Boundary::Neumann}) {
      const auto sys = laplacian_eigensystem(bc, n, 1.3);
      const RealMatrix L = build_laplacian(bc, n, 1.3);
      CHECK((L * sys.vectors - sys.vectors * sys.values.asDiagonal()).norm() < 1e-12);
      CHECK((sys.vectors.transpose() * sys.vectors - RealMatrix::Identity(n, n)).norm() < 1e-12);
      const RealVector oracle = dense_symmetric(L).values;
      RealVector mine = sys.values;
      std::sort(mine.data(), mine.data() + n);
      CHECK((mine - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  const auto d1 = laplacian_eigensystem(Boundary::Dirichlet, 1, 1.0);
  CHECK(d1.values(0) == doctest::Approx(2.0));
  CHECK(std::abs(d1.vectors(0, 0)) == doctest::Approx(1.0));
  const auto d3 = laplacian_eigensystem(Boundary::Dirichlet, 3, 1.0);
  CHECK(d3.values(0) == doctest::Approx(0.585786437626905));
  CHECK(d3.values(2) == doctest::Approx(3.414213562373095));
  const auto n6 = laplacian_eigensystem(Boundary::Neumann, 6, 1.0);
  CHECK(std::abs(n6.values(0)) < 1e-15);
  CHECK((n6.vectors.col(0).cwiseAbs().array() - 1 / std::sqrt(6.0)).abs().maxCoeff() < 1e-15);
  CHECK(dirichlet_first_weight(9, 3) ==
        doctest::Approx(std::pow(laplacian_eigensystem(Boundary::Dirichlet, 9, 1.0).vectors(0, 3), 2)));
}

TEST_CASE("unforced mode pairs") {
  ChainConfig c;
  c.n_osc = 1;
  c.pinning = 1.0;
  auto modes = unforced_modes(c);
  REQUIRE(modes.size() == 2);
  CHECK(std::abs(modes[0].eigenvalue - cplx(0, std::sqrt(3.0))) < 1e-14);
  CHECK(std::abs(modes[1].eigenvalue - cplx(0, -std::sqrt(3.0))) < 1e-14);

  // magnetic shift B0^2 / (2m) = 1/2 on top of lambda = 2.5 gives K = 3, sigma = sqrt(1 + 3)
  c.pinning = 0.5;
  c.magnetic = 1.0;
  modes = unforced_modes(c);
  CHECK(std::abs(modes[0].eigenvalue - cplx(0, 2)) < 1e-14);
  CHECK(std::abs(modes[1].eigenvalue - cplx(0, -2)) < 1e-14);

  c = ChainConfig{};
  c.n_osc = 12;
  c.pinning = 0.4;
  modes = unforced_modes(c);
  for (std::size_t k = 0; k < modes.size(); k += 2) CHECK(std::abs(modes[k].eigenvalue + modes[k + 1].eigenvalue) < 1e-14);
  // the mode vectors are eigenvectors of the frictionless drift
  ChainConfig free = c;
  const RealMatrix M = build_drift(free) - [&] {
    RealMatrix G = RealMatrix::Zero(24, 24);
    G(0, 0) = free.friction;
    return G;
  }();
  for (const auto& mp : modes)
    CHECK((M.cast<cplx>() * mp.eigenvector - mp.eigenvalue * mp.eigenvector).norm() < 1e-12);
}

TEST_CASE("nnn base eigenvalues") {
  auto c = nnn_chain(5, 0.0, 0.7);
  const RealVector nu0 = nnn_base_eigenvalues(c);
  for (int j = 0; j < 5; ++j) CHECK(nu0(j) == doctest::Approx(dirichlet_eigenvalue(5, j) + 0.7));

  // continuum edge: at omega = 1/4 and lambda = 4 the map lambda -> nu is flat and nu = 4 + eta
  const double w = 0.25, eta = 0.3, l = 4.0;
  CHECK((1 + 4 * w) * l - w * l * l + eta == doctest::Approx(4.3));
  CHECK((1 + 4 * w) - 2 * w * l == doctest::Approx(0.0));

  c = nnn_chain(3, 0.1, 0.0);
  RealVector nu = nnn_base_eigenvalues(c);
  std::sort(nu.data(), nu.data() + 3);
  const RealVector oracle = dense_symmetric(nnn_bulk_operator(c)).values;
  CHECK((nu - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("secular roots and perturbed vectors") {
  SUBCASE("omega = 0 leaves the base spectrum") {
    const auto c = nnn_chain(6, 0.0, 0.5);
    const auto roots = secular_solve(c);
    for (int j = 0; j < 6; ++j) CHECK(roots[j].value == nnn_base_eigenvalues(c)(j));
    const RealMatrix W = perturbed_vectors(c, roots);
    const auto lap = laplacian_eigensystem(Boundary::Dirichlet, 6, 1.0);
    for (int j = 0; j < 6; ++j) CHECK(std::abs(std::abs(W.col(j).dot(lap.vectors.col(j))) - 1) < 1e-12);
  }

  SUBCASE("dense oracle, N = 4") {
    const auto c = nnn_chain(4, 0.05, 0.5);
    const auto roots = secular_solve(c);
    const auto dense = dense_symmetric(build_interaction(c));
    std::vector<double> vals;
    for (const auto& r : roots) vals.push_back(r.value);
    std::sort(vals.begin(), vals.end());
    for (int j = 0; j < 4; ++j) CHECK(std::abs(vals[j] - dense.values(j)) < 1e-10);
    const RealMatrix W = perturbed_vectors(c, roots);
    for (int j = 0; j < 4; ++j) {
      double best = 0;
      for (int k = 0; k < 4; ++k) best = std::max(best, std::abs(W.col(j).dot(dense.vectors.col(k))));
      CHECK(best >= 1 - 1e-8);
      CHECK(std::abs(secular_function(c, roots[j]) - 1) < 1e-8);
    }
  }

  SUBCASE("negative omega and larger chains agree with the dense solve") {
    for (double w : {-0.2, -0.05, 0.1, 0.24})
      for (int n : {7, 40, 120}) {
        const auto c = nnn_chain(n, w, 0.5);
        const auto roots = secular_solve(c);
        std::vector<double> vals;
        for (const auto& r : roots) vals.push_back(r.value);
        std::sort(vals.begin(), vals.end());
        const RealVector dense = dense_symmetric(build_interaction(c)).values;
        double err = 0;
        for (int j = 0; j < n; ++j) err = std::max(err, std::abs(vals[j] - dense(j)));
        CHECK(err < 1e-10);
      }
  }

  SUBCASE("interlacing and first-component ratios") {
    for (int n : {20, 50, 100}) {
      const auto c = nnn_chain(n, 0.05, 0.5);
      const auto roots = secular_solve(c);
      const RealVector nu = nnn_base_eigenvalues(c);
      // P = -2 omega e1 e1^T lowers every eigenvalue: nu_{j-1} < xi_j < nu_j
      for (int j = 0; j < n; ++j) {
        CHECK(roots[j].value < nu(j));
        if (j > 0) CHECK(roots[j].value > nu(j - 1));
      }
      const RealMatrix W = perturbed_vectors(c, roots);
      for (int j = 0; j < n; ++j) {
        const double ratio = W(0, j) * W(0, j) / dirichlet_first_weight(n, j);
        CHECK(ratio >= 0.5);
        CHECK(ratio <= 2.0);
      }
    }
  }

  CHECK_THROWS_AS(secular_solve([] {
                    auto c = nnn_chain(5, 0.1, 0.0);
                    c.boundary = Boundary::Neumann;
                    return c;
                  }()),
                  ConfigError);
}

TEST_CASE("interaction modes pick the right source") {
  CHECK(interaction_modes(nnn_chain(8, 0.0, 1.0)).source == ModeSource::ClosedForm);
  CHECK(interaction_modes(nnn_chain(8, 0.1, 1.0)).source == ModeSource::Secular);
  auto c = nnn_chain(8, 0.1, 1.0);
  c.nnn_rank = NnnRank::RankTwo;
  CHECK(interaction_modes(c).source == ModeSource::Dense);
}

TEST_CASE("mode spacing exponents") {
  auto fit = [](const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) mx += std::log(x[k]), my += std::log(y[k]);
    mx /= x.size(), my /= x.size();
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      sxx += std::pow(std::log(x[k]) - mx, 2);
      sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    }
    return sxy / sxx;
  };
  std::vector<double> ns{20, 40, 80, 160}, s0, s4;
  for (double n : ns) {
    const auto c0 = nnn_chain(static_cast<int>(n), 0.0, 0.5);
    s0.push_back(eigen_spacing(unforced_modes(c0), static_cast<int>(n) - 1, +1).min_spacing);
    const auto c4 = nnn_chain(static_cast<int>(n), 0.25, 0.5);
    s4.push_back(eigen_spacing(nnn_unperturbed_modes(c4), static_cast<int>(n) - 1, +1).min_spacing);
  }
  const double e0 = fit(ns, s0), e4 = fit(ns, s4);
  CHECK(e0 >= -2.3);
  CHECK(e0 <= -1.7);
  CHECK(e4 >= -4.4);
  CHECK(e4 <= -3.6);

  const auto modes = unforced_modes(nnn_chain(15, 0.0, 0.5));
  CHECK(eigen_spacing(modes, 4, +1).min_spacing == doctest::Approx(eigen_spacing(modes, 4, -1).min_spacing));
}

TEST_CASE("riemann bracket") {
  const auto lin = riemann_bracket([](double t) { return t; }, 10, 1, 1);
  CHECK(lin.sum == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(lin.lower == doctest::Approx(0.405).epsilon(1e-12));
  CHECK(lin.upper == doctest::Approx(0.495).epsilon(1e-12));

  const auto flat = riemann_bracket([](double) { return 2.0; }, 10, 2, 3);
  CHECK(flat.weakly_monotone);
  CHECK(flat.lower == doctest::Approx(1.2));
  CHECK(flat.sum == doctest::Approx(1.2));
  CHECK(flat.upper == doctest::Approx(1.2));

  const auto sq = riemann_bracket([](double t) { return t * t; }, 100, 1, 1);
  CHECK(sq.lower <= sq.sum);
  CHECK(sq.sum <= sq.upper);
  CHECK(sq.upper - sq.lower <= 2.0 / 100);

  CHECK_THROWS_AS(riemann_bracket([](double t) { return std::sin(10 * t); }, 20, 1, 1), PreconditionError);
  CHECK_THROWS_AS(riemann_bracket([](double t) { return t; }, 4, 3, 2), PreconditionError);
}
