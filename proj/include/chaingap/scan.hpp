#pragma once

#include "chaingap/chain_model.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace chaingap {

enum class GapMethod { Eigensolver, Wigner, Both };
std::string to_string(GapMethod m);
GapMethod parse_gap_method(const std::string& s);

struct GapRecord {
  int n_osc{0};
  double omega{0};
  double gamma{0};
  double b0{0};
  double eta{0};
  Boundary boundary{Boundary::Dirichlet};
  double gap{0};
  GapMethod method{GapMethod::Eigensolver};
  bool zero_gap{false};
  std::optional<double> mode_distance;  // |mu(N) - mu_N^+|
  std::string status{"ok"};             // "ok", "ok;verdict=...", "disagree:...", "error:..."

  bool failed() const { return status.rfind("ok", 0) != 0; }
};

struct ScanOptions {
  GapMethod method{GapMethod::Both};
  bool measure_distance{false};  // critical-case top-mode distance, Dirichlet F={1} only
  double agreement_tol{1e-8};
  int threads{1};
};

GapRecord gap_point(const ChainConfig& cfg, const ScanOptions& opt);

// base.n_osc is replaced by each grid value; output order follows the grid
std::vector<GapRecord> gap_scan(const ChainConfig& base, const std::vector<int>& ns, const ScanOptions& opt);
// base.nnn is replaced; |omega| > 1/4 points carry a hypoellipticity verdict in the status
std::vector<GapRecord> omega_scan(const ChainConfig& base, const std::vector<double>& omegas,
                                  const ScanOptions& opt);

std::vector<int> default_n_grid();

struct SlopeFit {
  double slope{0};
  double intercept{0};
  double r2{0};
  int points{0};
};

// least squares on (log x, log y)
SlopeFit slope_fit(const std::vector<double>& x, const std::vector<double>& y);

struct SlopeWindow {
  int n_min{10};
  int n_max{std::numeric_limits<int>::max()};
  bool use_distance{false};  // fit mode_distance instead of gap
};
SlopeFit slope_fit(const std::vector<GapRecord>& records, const SlopeWindow& window = {});

// ------ output ------

inline constexpr const char* csv_header = "n,omega,gamma,b0,eta,boundary,gap,method,zero_gap,mode_distance,status";

void write_csv(std::ostream& os, const std::vector<GapRecord>& records);
std::string to_csv(const std::vector<GapRecord>& records);
std::vector<GapRecord> parse_csv(const std::string& text);

enum class PlotAxis { N, Omega };

struct EmittedFiles {
  std::string csv;
  std::string data;
  std::string script;
};

// <dir>/<stem>.csv and, with plot, <stem>.dat plus a gnuplot <stem>.gp that refers to the data file by name
EmittedFiles emit(const std::vector<GapRecord>& records, const std::string& dir, const std::string& stem,
                  bool plot, PlotAxis axis = PlotAxis::N);

}  // namespace chaingap
