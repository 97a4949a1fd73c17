#include "chaingap/scan.hpp"

#include "chaingap/hypoellipticity.hpp"
#include "chaingap/parallel.hpp"
#include "chaingap/stationary_state.hpp"
#include "chaingap/wigner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace chaingap {

std::string to_string(GapMethod m) {
  switch (m) {
    case GapMethod::Eigensolver: return "eigensolver";
    case GapMethod::Wigner: return "wigner";
    default: return "both";
  }
}

GapMethod parse_gap_method(const std::string& s) {
  if (s == "eigensolver") return GapMethod::Eigensolver;
  if (s == "wigner") return GapMethod::Wigner;
  if (s == "both") return GapMethod::Both;
  throw ConfigError("unknown gap method '" + s + "'");
}

namespace {

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

GapRecord gap_point(const ChainConfig& cfg, const ScanOptions& opt) {
  GapRecord rec;
  rec.n_osc = cfg.n_osc;
  rec.omega = cfg.nnn;
  rec.gamma = cfg.friction;
  rec.b0 = cfg.magnetic;
  rec.eta = cfg.pinning;
  rec.boundary = cfg.boundary;
  rec.method = opt.method;
  rec.gap = std::numeric_limits<double>::quiet_NaN();
  try {
    validate(cfg);
    std::optional<GapResult> eig, wig;
    if (opt.method != GapMethod::Wigner) eig = fp_gap(cfg);
    if (opt.method != GapMethod::Eigensolver) wig = gap_from_wigner(cfg).gap;
    const GapResult& main = eig ? *eig : *wig;
    rec.gap = std::max(main.gap, 0.0);
    rec.zero_gap = (eig && eig->zero_gap) || (wig && wig->zero_gap);
    if (eig && wig && std::abs(eig->gap - wig->gap) > opt.agreement_tol) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "disagree:eigensolver-wigner=%.3e", eig->gap - wig->gap);
      rec.status = buf;
    }
    if (opt.measure_distance) rec.mode_distance = critical_localization(cfg).distance;
    if (std::abs(cfg.nnn) > 0.25 && !rec.failed())
      rec.status += ";verdict=" + to_string(hypo_verdict(cfg).verdict);
  } catch (const std::exception& e) {
    rec.status = "error:" + clean(e.what());
  }
  return rec;
}

std::vector<GapRecord> gap_scan(const ChainConfig& base, const std::vector<int>& ns, const ScanOptions& opt) {
  if (ns.empty()) throw PreconditionError("gap_scan: empty grid");
  for (int n : ns)
    if (n < 1) throw PreconditionError("gap_scan: grid values must be positive");
  std::vector<GapRecord> out(ns.size());
  parallel_for(static_cast<int>(ns.size()), opt.threads, [&](int k) {
    ChainConfig cfg = base;
    cfg.n_osc = ns[k];
    for (int& f : cfg.friction_set)
      if (f != 1) f = cfg.n_osc;
    out[k] = gap_point(cfg, opt);
  });
  return out;
}

std::vector<GapRecord> omega_scan(const ChainConfig& base, const std::vector<double>& omegas,
                                  const ScanOptions& opt) {
  if (omegas.empty()) throw PreconditionError("omega_scan: empty grid");
  std::vector<GapRecord> out(omegas.size());
  parallel_for(static_cast<int>(omegas.size()), opt.threads, [&](int k) {
    ChainConfig cfg = base;
    cfg.nnn = omegas[k];
    out[k] = gap_point(cfg, opt);
  });
  return out;
}

std::vector<int> default_n_grid() { return {10, 15, 20, 30, 40, 60, 80, 120, 160}; }

// ------ slopes ------

SlopeFit slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw PreconditionError("slope_fit: size mismatch");
  if (x.size() < 4) throw FitFailure("slope_fit: need at least 4 points");
  const double m = static_cast<double>(x.size());
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0) || !(y[k] > 0) || !std::isfinite(x[k]) || !std::isfinite(y[k]))
      throw FitFailure("slope_fit: values must be positive and finite");
    lx[k] = std::log(x[k]);
    ly[k] = std::log(y[k]);
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) mx += lx[k], my += ly[k];
  mx /= m, my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  if (!(sxx > 0)) throw FitFailure("slope_fit: degenerate abscissae");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.points = static_cast<int>(x.size());
  return f;
}

SlopeFit slope_fit(const std::vector<GapRecord>& records, const SlopeWindow& window) {
  std::vector<double> x, y;
  for (const auto& r : records) {
    if (r.n_osc < window.n_min || r.n_osc > window.n_max) continue;
    if (r.failed()) throw FitFailure("slope_fit: window contains a failed row (N=" + std::to_string(r.n_osc) + ")");
    if (r.zero_gap) throw FitFailure("slope_fit: window spans a zero-gap row (N=" + std::to_string(r.n_osc) + ")");
    if (window.use_distance && !r.mode_distance)
      throw FitFailure("slope_fit: row without mode distance (N=" + std::to_string(r.n_osc) + ")");
    x.push_back(r.n_osc);
    y.push_back(window.use_distance ? *r.mode_distance : r.gap);
  }
  return slope_fit(x, y);
}

// ------ CSV ------

namespace {

std::string real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double to_real(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ConfigError("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<GapRecord>& records) {
  os << csv_header << '\n';
  for (const auto& r : records) {
    os << r.n_osc << ',' << real(r.omega) << ',' << real(r.gamma) << ',' << real(r.b0) << ',' << real(r.eta) << ','
       << to_string(r.boundary) << ',' << real(r.gap) << ',' << to_string(r.method) << ',' << (r.zero_gap ? 1 : 0)
       << ',' << (r.mode_distance ? real(*r.mode_distance) : "") << ',' << clean(r.status) << '\n';
  }
}

std::string to_csv(const std::vector<GapRecord>& records) {
  std::ostringstream os;
  write_csv(os, records);
  return os.str();
}

std::vector<GapRecord> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != csv_header) throw ConfigError("csv: missing or unexpected header");
  std::vector<GapRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 11) throw ConfigError("csv line " + std::to_string(lineno) + ": expected 11 fields");
    GapRecord r;
    r.n_osc = static_cast<int>(to_real(f[0], lineno));
    r.omega = to_real(f[1], lineno);
    r.gamma = to_real(f[2], lineno);
    r.b0 = to_real(f[3], lineno);
    r.eta = to_real(f[4], lineno);
    if (f[5] == "dirichlet") r.boundary = Boundary::Dirichlet;
    else if (f[5] == "neumann") r.boundary = Boundary::Neumann;
    else throw ConfigError("csv line " + std::to_string(lineno) + ": bad boundary '" + f[5] + "'");
    r.gap = to_real(f[6], lineno);
    r.method = parse_gap_method(f[7]);
    if (f[8] != "0" && f[8] != "1") throw ConfigError("csv line " + std::to_string(lineno) + ": bad zero_gap flag");
    r.zero_gap = f[8] == "1";
    if (!f[9].empty()) r.mode_distance = to_real(f[9], lineno);
    r.status = f[10];
    out.push_back(std::move(r));
  }
  return out;
}

EmittedFiles emit(const std::vector<GapRecord>& records, const std::string& dir, const std::string& stem, bool plot,
                  PlotAxis axis) {
  if (records.empty()) throw PreconditionError("emit: no records");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("emit: cannot create directory '" + dir + "': " + ec.message());
  auto open = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("emit: cannot write '" + p.string() + "'");
    return f;
  };
  EmittedFiles files;
  const fs::path csv = fs::path(dir) / (stem + ".csv");
  {
    auto f = open(csv);
    write_csv(f, records);
    if (!f) throw std::runtime_error("emit: write failed for '" + csv.string() + "'");
  }
  files.csv = csv.string();
  if (!plot) return files;

  const std::string data_name = stem + ".dat";
  const fs::path data = fs::path(dir) / data_name;
  {
    auto f = open(data);
    f << "# " << (axis == PlotAxis::N ? "n" : "omega") << " gap mode_distance\n";
    for (const auto& r : records) {
      if (r.failed()) continue;
      f << (axis == PlotAxis::N ? real(r.n_osc) : real(r.omega)) << ' ' << real(r.gap) << ' '
        << (r.mode_distance ? real(*r.mode_distance) : "NaN") << '\n';
    }
  }
  files.data = data.string();
  const fs::path script = fs::path(dir) / (stem + ".gp");
  {
    auto f = open(script);
    f << "set terminal pngcairo size 800,600\n";
    f << "set output '" << stem << ".png'\n";
    if (axis == PlotAxis::N) {
      f << "set logscale xy\nset xlabel 'N'\n";
    } else {
      f << "set logscale y\nset xlabel 'omega'\n";
    }
    f << "set ylabel 'spectral gap'\nset key top right\n";
    f << "plot '" << data_name << "' using 1:2 with linespoints title 'gap'";
    bool any_distance = false;
    for (const auto& r : records) any_distance = any_distance || r.mode_distance.has_value();
    if (any_distance) f << ", \\\n     '" << data_name << "' using 1:3 with linespoints title 'mode distance'";
    f << '\n';
  }
  files.script = script.string();
  return files;
}

}  // namespace chaingap
