#include "chaingap/scan.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace chaingap;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GapRecord synthetic(int n, double gap) {
  GapRecord r;
  r.n_osc = n;
  r.gamma = 1.0;
  r.eta = 0.5;
  r.gap = gap;
  return r;
}

}  // namespace

TEST_CASE("slope fits on synthetic data") {
  std::vector<double> x, y, y2, flat;
  for (double n : {10.0, 20.0, 40.0, 80.0, 160.0}) {
    x.push_back(n);
    y.push_back(7 * std::pow(n, -3));
    y2.push_back(std::pow(n, -3) * (1 + 1 / n));
    flat.push_back(2.5);
  }
  const SlopeFit a = slope_fit(x, y);
  CHECK(std::abs(a.slope + 3) < 1e-12);
  CHECK(a.r2 == doctest::Approx(1.0));
  CHECK(std::exp(a.intercept) == doctest::Approx(7.0));
  const SlopeFit b = slope_fit(x, y2);
  CHECK(b.slope > -3.1);
  CHECK(b.slope < -2.9);
  CHECK(std::abs(slope_fit(x, flat).slope) < 1e-12);

  CHECK_THROWS_AS(slope_fit({1, 2, 3}, {1, 2, 3}), FitFailure);
  CHECK_THROWS_AS(slope_fit({1, 2, 3, 4}, {1, -2, 3, 4}), FitFailure);

  std::vector<GapRecord> recs;
  for (int n : {5, 10, 20, 40, 80}) recs.push_back(synthetic(n, 3 * std::pow(n, -2.0)));
  const SlopeFit w = slope_fit(recs, {});
  CHECK(w.points == 4);
  CHECK(std::abs(w.slope + 2) < 1e-12);
  CHECK(slope_fit(recs, {5, 40, false}).points == 4);

  recs[2].zero_gap = true;
  CHECK_THROWS_AS(slope_fit(recs, {}), FitFailure);
  recs[2].zero_gap = false;
  recs[3].status = "error:boom";
  CHECK_THROWS_AS(slope_fit(recs, {}), FitFailure);
  recs[3].status = "ok";
  CHECK_THROWS_AS(slope_fit(recs, {10, 80, true}), FitFailure);
}

TEST_CASE("csv output") {
  std::vector<GapRecord> recs{synthetic(10, 0.125), synthetic(20, 1e-5), synthetic(40, 0.0)};
  recs[1].mode_distance = 3.5e-7;
  recs[2].zero_gap = true;
  recs[2].boundary = Boundary::Neumann;
  recs[2].status = "ok;verdict=not_hypoelliptic";
  const std::string text = to_csv(recs);
  int lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 4);
  CHECK(text.substr(0, text.find('\n')) == "n,omega,gamma,b0,eta,boundary,gap,method,zero_gap,mode_distance,status");

  const auto back = parse_csv(text);
  REQUIRE(back.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back[k].n_osc == recs[k].n_osc);
    CHECK(back[k].gap == recs[k].gap);
    CHECK(back[k].zero_gap == recs[k].zero_gap);
    CHECK(back[k].boundary == recs[k].boundary);
    CHECK(back[k].status == recs[k].status);
    CHECK(back[k].mode_distance.has_value() == recs[k].mode_distance.has_value());
  }
  CHECK(*back[1].mode_distance == 3.5e-7);
  CHECK(to_csv(back) == text);

  CHECK_THROWS_AS(parse_csv("n,gap\n1,2\n"), ConfigError);

  const auto dir = std::filesystem::temp_directory_path() / "chaingap_scan_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const EmittedFiles files = emit(recs, dir.string(), "gap", true);
  CHECK(slurp(files.csv) == text);
  const std::string gp = slurp(files.script);
  CHECK(gp.find("gap.dat") != std::string::npos);
  CHECK(gp.find(dir.string()) == std::string::npos);
  CHECK(gp.find("'/") == std::string::npos);
  CHECK(gp.find("\"/") == std::string::npos);
  CHECK(std::filesystem::exists(files.data));
  const EmittedFiles bare = emit(recs, dir.string(), "bare", false);
  CHECK(bare.script.empty());
  CHECK_FALSE(std::filesystem::exists(dir / "bare.gp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("gap scans") {
  ChainConfig base;
  base.friction = 0.5;
  base.pinning = 1.0;
  ScanOptions opt;
  opt.method = GapMethod::Both;
  const auto one = gap_scan(base, {4, 8, 16}, opt);
  REQUIRE(one.size() == 3);
  for (const auto& r : one) {
    CHECK(r.status == "ok");
    CHECK(r.method == GapMethod::Both);
    CHECK(r.gap > 0);
  }
  CHECK(one[0].gap > one[2].gap);

  opt.threads = 4;
  const auto four = gap_scan(base, {4, 8, 16}, opt);
  CHECK(to_csv(four) == to_csv(one));

  ChainConfig crit = base;
  crit.nnn = 0.25;
  ScanOptions dist;
  dist.method = GapMethod::Eigensolver;
  dist.measure_distance = true;
  const auto d = gap_scan(crit, {20, 40}, dist);
  for (const auto& r : d) {
    REQUIRE(r.mode_distance);
    CHECK(*r.mode_distance > 0);
  }
  CHECK(*d[1].mode_distance < *d[0].mode_distance);

  ChainConfig bad = base;
  bad.friction = -1;
  CHECK(gap_point(bad, opt).failed());
  CHECK(gap_point(bad, opt).status.find(',') == std::string::npos);

  CHECK(parse_gap_method("wigner") == GapMethod::Wigner);
  CHECK(to_string(GapMethod::Both) == "both");
  CHECK_THROWS_AS(parse_gap_method("qr"), ConfigError);
  CHECK(default_n_grid().front() == 10);
  CHECK(default_n_grid().back() == 160);
}

TEST_CASE("omega scans") {
  ChainConfig neu;
  neu.n_osc = 5;
  neu.boundary = Boundary::Neumann;
  neu.nnn_rank = NnnRank::RankTwo;
  neu.pinning = 0.0;
  neu.friction_set = {1, 5};
  ScanOptions opt;
  opt.method = GapMethod::Eigensolver;
  const auto rows = omega_scan(neu, {0.1, 0.2, 0.5}, opt);
  REQUIRE(rows.size() == 3);
  CHECK_FALSE(rows[0].zero_gap);
  CHECK_FALSE(rows[1].zero_gap);
  CHECK(rows[2].zero_gap);
  CHECK(rows[2].omega == 0.5);
  CHECK(rows[2].status.find("verdict=not_hypoelliptic") != std::string::npos);

  ChainConfig dir;
  dir.n_osc = 50;
  dir.pinning = 0.5;
  opt.method = GapMethod::Both;
  opt.threads = 4;
  std::vector<double> grid;
  for (int k = 0; k <= 12; ++k) grid.push_back(0.02 * k);
  for (const auto& r : omega_scan(dir, grid, opt)) {
    CHECK(r.status == "ok");
    CHECK(r.gap > 0);
    CHECK_FALSE(r.zero_gap);
  }
}
