#include "chaingap/chain_model.hpp"
#include "chaingap/eigensolver.hpp"
#include "chaingap/hypoellipticity.hpp"
#include "chaingap/scan.hpp"
#include "chaingap/sde_sim.hpp"
#include "chaingap/stationary_state.hpp"
#include "chaingap/wigner.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace chaingap;

namespace {

enum Exit { Ok = 0, ConfigFailure = 2, NotHypo = 3, Inconclusive = 4, NumericFailure = 5 };

struct Globals {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  int threads{1};
  bool plot{false};
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string key_of(const std::string& line) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) return {};
  std::string k = line.substr(0, eq);
  k.erase(0, k.find_first_not_of(" \t"));
  k.erase(k.find_last_not_of(" \t") + 1);
  return lower(k);
}

// file text with --set lines replacing same-named keys
std::string config_text(const Globals& g) {
  std::string text;
  if (!g.config.empty()) {
    std::ifstream f(g.config);
    if (!f) throw ConfigError("cannot open config file '" + g.config + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  std::vector<std::string> keys;
  for (const auto& o : g.overrides) {
    if (o.find('=') == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
    keys.push_back(key_of(o));
  }
  std::istringstream is(text);
  std::string line, kept;
  while (std::getline(is, line)) {
    std::string body = line.substr(0, line.find('#'));
    if (std::find(keys.begin(), keys.end(), key_of(body)) != keys.end() && !key_of(body).empty()) continue;
    kept += line + "\n";
  }
  for (const auto& o : g.overrides) kept += o + "\n";
  return kept;
}

bool has_key(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (key_of(line.substr(0, line.find('#'))) == key) return true;
  return false;
}

ChainConfig load(const Globals& g, const char* fallback_n = nullptr) {
  std::string text = config_text(g);
  if (fallback_n && !has_key(text, "n_osc")) text += std::string("n_osc = ") + fallback_n + "\n";
  return parse_config(text);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

// stdout, or <out>/<name> when --out is given
class Sink {
 public:
  Sink(const Globals& g, const std::string& name) {
    if (g.out.empty()) return;
    std::filesystem::create_directories(g.out);
    path_ = (std::filesystem::path(g.out) / name).string();
    file_.open(path_);
    if (!file_) throw std::runtime_error("cannot write '" + path_ + "'");
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  ~Sink() {
    if (file_.is_open()) std::cerr << "wrote " << path_ << "\n";
  }

 private:
  std::string path_;
  std::ofstream file_;
};

void write_matrix(std::ostream& os, const RealMatrix& A) {
  os << "row,col,value\n";
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) os << i << ',' << j << ',' << num(A(i, j)) << '\n';
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  const auto colon = std::count(s.begin(), s.end(), ':');
  if (colon == 2) {
    double a = 0, b = 0;
    int k = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%d", &a, &b, &k) != 3 || k < 1)
      throw ConfigError("range must look like start:stop:count, got '" + s + "'");
    for (int i = 0; i < k; ++i) out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (const auto slash = tok.find('/'); slash != std::string::npos) {
      const double num = std::strtod(tok.substr(0, slash).c_str(), nullptr);
      const double den = std::strtod(tok.substr(slash + 1).c_str(), &end);
      if (den == 0) throw ConfigError("zero denominator in '" + tok + "'");
      v = num / den;
    }
    if (tok.empty() || *end != '\0') throw ConfigError("bad number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

int scan_exit(const std::vector<GapRecord>& recs) {
  for (const auto& r : recs)
    if (r.failed()) return NumericFailure;
  return Ok;
}

void print_records(const Globals& g, const std::vector<GapRecord>& recs, const std::string& stem, PlotAxis axis) {
  if (g.out.empty()) {
    write_csv(std::cout, recs);
    if (g.plot) std::cerr << "--plot needs --out; no plot files written\n";
    return;
  }
  const auto files = emit(recs, g.out, stem, g.plot, axis);
  std::cerr << "wrote " << files.csv << "\n";
  if (g.plot) std::cerr << "wrote " << files.data << "\nwrote " << files.script << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaingap: spectral gap toolkit for harmonic chains with boundary friction"};
  app.require_subcommand(1);
  Globals g;
  g.threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--config", g.config, "chain configuration file (key = value)");
  app.add_option("--set", g.overrides, "override a configuration key, key=value (repeatable)");
  app.add_option("--out", g.out, "output directory (default: stdout)");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--plot", g.plot, "also write gnuplot data and script files");
  app.fallthrough();

  auto* build = app.add_subcommand("build", "assemble B, M and Sigma^2 and print them as CSV");

  auto* spectrum = app.add_subcommand("spectrum", "drift eigenvalues and spectral gap");
  bool lattice = false;
  int degree = 3;
  double cutoff = 0;
  std::string spec_method = "eigensolver";
  spectrum->add_flag("--lattice", lattice, "print the Ornstein-Uhlenbeck lattice spectrum");
  spectrum->add_option("--degree", degree, "lattice truncation degree")->check(CLI::PositiveNumber);
  spectrum->add_option("--cutoff", cutoff, "lattice real-part cutoff (default 10x gap)");
  spectrum->add_option("--method", spec_method, "eigensolver|wigner")->check(CLI::IsMember({"eigensolver", "wigner"}));

  auto* gscan = app.add_subcommand("gap-scan", "spectral gap over a grid of chain lengths");
  std::vector<int> ns = default_n_grid();
  std::string scan_method = "both";
  bool distance = false;
  gscan->add_option("--n", ns, "chain lengths")->delimiter(',');
  gscan->add_option("--method", scan_method, "eigensolver|wigner|both")
      ->check(CLI::IsMember({"eigensolver", "wigner", "both"}));
  gscan->add_flag("--distance", distance, "measure |mu(N) - mu_N^+| (Dirichlet, friction at site 1)");

  auto* oscan = app.add_subcommand("omega-scan", "spectral gap over a grid of NNN couplings");
  std::string omegas = "0:0.24:13";
  oscan->add_option("--omega", omegas, "comma list or start:stop:count");
  oscan->add_option("--method", scan_method, "eigensolver|wigner|both")
      ->check(CLI::IsMember({"eigensolver", "wigner", "both"}));

  auto* hypo = app.add_subcommand("hypo-check", "hypoellipticity verdict with its three criteria");

  auto* wver = app.add_subcommand("wigner-verify", "localise every friction-shifted root and match the eigensolver");

  auto* ness = app.add_subcommand("ness", "steady-state covariance and kinetic temperature profile");

  auto* sim = app.add_subcommand("simulate", "Euler-Maruyama simulation of the chain");
  SimOptions so;
  so.n_steps = 100000;
  so.n_traj = 16;
  so.seed = 1;
  std::string observable;
  long dump_every = 0;
  bool exact = false;
  sim->add_option("--dt", so.dt, "time step")->check(CLI::PositiveNumber);
  sim->add_option("--steps", so.n_steps, "steps per trajectory")->check(CLI::PositiveNumber);
  sim->add_option("--traj", so.n_traj, "trajectories")->check(CLI::PositiveNumber);
  sim->add_option("--seed", so.seed, "random seed");
  sim->add_option("--burn-in", so.burn_in, "steps discarded before statistics");
  sim->add_option("--sample-every", so.sample_every, "statistics stride")->check(CLI::PositiveNumber);
  sim->add_option("--dump", dump_every, "write every k-th state of trajectory 0 (CSV step,t,site,q,p)");
  sim->add_option("--observable", observable, "slow|site:<i>; fits the relaxation rate");
  sim->add_flag("--exact", exact, "exact Gaussian one-step transition instead of Euler-Maruyama");

  auto* slope = app.add_subcommand("slope", "log-log slope of a scan CSV");
  std::string input;
  SlopeWindow window;
  slope->add_option("--input", input, "CSV written by gap-scan")->required();
  slope->add_option("--n-min", window.n_min, "smallest N in the window");
  slope->add_option("--n-max", window.n_max, "largest N in the window");
  slope->add_flag("--distance", window.use_distance, "fit mode_distance instead of gap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Ok : ConfigFailure;
  }

  try {
    if (build->parsed()) {
      const ChainConfig cfg = load(g);
      std::cerr << summary(cfg) << "\n";
      if (g.out.empty()) {
        std::cout << "# drift M (" << phase_dim(cfg) << "x" << phase_dim(cfg) << ")\n";
        write_matrix(std::cout, build_drift(cfg));
      } else {
        {
          Sink s(g, "interaction.csv");
          write_matrix(s.os(), build_interaction(cfg));
        }
        {
          Sink s(g, "drift.csv");
          write_matrix(s.os(), build_drift(cfg));
        }
        Sink s(g, "noise.csv");
        write_matrix(s.os(), build_noise(cfg));
      }
      return Ok;
    }

    if (spectrum->parsed()) {
      const ChainConfig cfg = load(g);
      const ComplexVector ev =
          spec_method == "wigner" ? wigner_spectrum(cfg) : eigen_all(build_drift(cfg)).eigenvalues;
      const GapResult gap = gap_from_spectrum(ev);
      Sink s(g, lattice ? "lattice.csv" : "spectrum.csv");
      if (lattice) {
        const LatticeSpectrum L = spectrum_lattice(sorted_spectrum(ev), degree, cutoff);
        s.os() << "re,im,degree\n";
        for (const auto& p : L.points) s.os() << num(p.value.real()) << ',' << num(p.value.imag()) << ',' << p.degree << '\n';
        std::cerr << "lattice_gap=" << num(lattice_gap(L)) << " points=" << L.points.size() << "\n";
      } else {
        s.os() << "re,im\n";
        const ComplexVector sorted = sorted_spectrum(ev);
        for (Eigen::Index k = 0; k < sorted.size(); ++k)
          s.os() << num(sorted(k).real()) << ',' << num(sorted(k).imag()) << '\n';
      }
      std::cerr << "gap=" << num(gap.gap) << " zero_gap=" << gap.zero_gap << " unstable=" << gap.unstable << "\n";
      return Ok;
    }

    if (gscan->parsed()) {
      const ChainConfig base = load(g, "10");
      ScanOptions opt;
      opt.method = parse_gap_method(scan_method);
      opt.measure_distance = distance;
      opt.threads = g.threads;
      const auto recs = gap_scan(base, ns, opt);
      print_records(g, recs, "gap_scan", PlotAxis::N);
      return scan_exit(recs);
    }

    if (oscan->parsed()) {
      const ChainConfig base = load(g, "50");
      ScanOptions opt;
      opt.method = parse_gap_method(scan_method);
      opt.threads = g.threads;
      const auto recs = omega_scan(base, parse_reals(omegas), opt);
      print_records(g, recs, "omega_scan", PlotAxis::Omega);
      return scan_exit(recs);
    }

    if (hypo->parsed()) {
      const HypoReport rep = hypo_verdict(load(g));
      Sink s(g, "hypo_report.txt");
      s.os() << format_report(rep);
      if (rep.verdict == Verdict::NotHypoelliptic) return NotHypo;
      if (rep.verdict == Verdict::Inconclusive) return Inconclusive;
      return Ok;
    }

    if (wver->parsed()) {
      const ChainConfig cfg = load(g);
      Sink s(g, "wigner_verify.csv");
      s.os() << "block,index,sign,ref_re,ref_im,root_re,root_im,distance,ratio,real_part_ratio,residual,verified\n";
      std::vector<int> blocks{+1};
      if (is_planar(cfg)) blocks.push_back(-1);
      bool all_verified = true;
      if (frictional_sites(cfg).size() != 1) {
        blocks.clear();
        std::cerr << "root localisation needs a single friction site; spectrum match only\n";
      }
      for (int b : blocks) {
        const auto res = friction_resolvent(cfg, b);
        for (const auto& r : localize_all(res, g.threads)) {
          all_verified = all_verified && r.verified;
          s.os() << b << ',' << r.index + 1 << ',' << r.sign << ',' << num(r.reference.real()) << ','
                 << num(r.reference.imag()) << ',' << num(r.root.real()) << ',' << num(r.root.imag()) << ','
                 << num(r.distance) << ',' << num(r.ratio) << ',' << num(r.real_part_ratio) << ',' << num(r.residual)
                 << ',' << r.verified << '\n';
        }
      }
      const auto match = match_spectra(wigner_spectrum(cfg), eigen_all(build_drift(cfg)).eigenvalues, 1e-8);
      std::cerr << "max_distance=" << num(match.max_distance) << " all_verified=" << all_verified << "\n";
      return match.max_distance <= 1e-8 && all_verified ? Ok : NumericFailure;
    }

    if (ness->parsed()) {
      const ChainConfig cfg = load(g);
      const SteadyState st = invariant_covariance(cfg);
      {
        Sink s(g, "covariance.csv");
        write_matrix(s.os(), st.covariance);
      }
      Sink s(g, "temperature.csv");
      s.os() << "site,kinetic_temperature\n";
      for (Eigen::Index i = 0; i < st.kinetic_temperature.size(); ++i)
        s.os() << i + 1 << ',' << num(st.kinetic_temperature(i)) << '\n';
      std::cerr << "lyapunov_residual=" << num(st.residual) << "\n";
      return Ok;
    }

    if (sim->parsed()) {
      const ChainConfig cfg = load(g);
      so.threads = g.threads;
      so.dump_every = dump_every;
      so.exact_ou = exact;
      if (!observable.empty()) {
        RealVector l;
        if (observable == "slow") {
          const SlowMode sm = slow_mode(cfg);
          l = sm.observable;
          so.initial = InitialKind::Custom;
          so.custom_initial = 10.0 * std::sqrt(std::max(cfg.temp_left, cfg.temp_right)) * sm.initial;
          std::cerr << "slow eigenvalue=" << num(sm.eigenvalue.real()) << "," << num(sm.eigenvalue.imag()) << "\n";
        } else if (observable.rfind("site:", 0) == 0) {
          l = site_observable(cfg, std::stoi(observable.substr(5)));
          so.initial = InitialKind::Custom;
          so.custom_initial = 10.0 * std::sqrt(std::max(cfg.temp_left, cfg.temp_right)) * l;
        } else {
          throw ConfigError("--observable must be slow or site:<i>");
        }
        const RelaxationFit fit = relaxation_fit({cfg, so}, l);
        for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << "rate,ci_low,ci_high,prefactor,frequency,undamped,points,fp_gap\n"
                  << num(fit.rate) << ',' << num(fit.ci_low) << ',' << num(fit.ci_high) << ',' << num(fit.prefactor)
                  << ',' << num(fit.frequency) << ',' << fit.undamped << ',' << fit.points << ','
                  << num(fp_gap(cfg).gap) << '\n';
        return Ok;
      }
      const SimStats st = simulate({cfg, so});
      for (const auto& w : st.warnings) std::cerr << "warning: " << w << "\n";
      if (!st.dump.empty()) {
        Sink s(g, "dump.csv");
        const int n = cfg.n_osc, c = is_planar(cfg) ? 2 : 1;
        s.os() << "step,t,site,q,p\n";
        for (const auto& row : st.dump)
          for (int i = 0; i < n; ++i)
            s.os() << row.step << ',' << num(row.t) << ',' << i + 1 << ',' << num(row.state(c * n + c * i)) << ','
                   << num(row.state(c * i)) << '\n';
      }
      Sink s(g, "sim_covariance.csv");
      write_matrix(s.os(), st.second_moment);
      try {
        const RealMatrix S = invariant_covariance(cfg).covariance;
        const auto ci = bootstrap_relative_error(st.per_traj_second_moment, S);
        std::cerr << "relative_error=" << num(ci.estimate) << " ci=[" << num(ci.lo) << "," << num(ci.hi) << "]\n";
      } catch (const NoSteadyState& e) {
        std::cerr << "no steady state to compare against: " << e.what() << "\n";
      }
      return Ok;
    }

    if (slope->parsed()) {
      std::ifstream f(input);
      if (!f) throw ConfigError("cannot open '" + input + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      const SlopeFit fit = slope_fit(parse_csv(ss.str()), window);
      std::cout << "slope,intercept,r2,points\n"
                << num(fit.slope) << ',' << num(fit.intercept) << ',' << num(fit.r2) << ',' << fit.points << '\n';
      return Ok;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ConfigFailure;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return ConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return NumericFailure;
  }
  return Ok;
}
