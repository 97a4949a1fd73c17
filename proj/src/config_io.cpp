#include "chaingap/chain_model.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace chaingap {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// accepts plain reals and simple fractions like 1/3
double parse_real(const std::string& key, const std::string& v, int line) {
  auto one = [&](std::string_view t) {
    double x{};
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc{} || p != t.data() + t.size())
      throw ConfigError("line " + std::to_string(line) + ": " + key + ": not a number: " + v);
    return x;
  };
  const auto slash = v.find('/');
  if (slash == std::string::npos) return one(v);
  const double den = one(trim(std::string_view(v).substr(slash + 1)));
  if (den == 0) throw ConfigError("line " + std::to_string(line) + ": " + key + ": zero denominator");
  return one(trim(std::string_view(v).substr(0, slash))) / den;
}

int parse_int(const std::string& key, const std::string& v, int line) {
  int x{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("line " + std::to_string(line) + ": " + key + ": not an integer: " + v);
  return x;
}

}  // namespace

ChainConfig parse_config(std::string_view text) {
  static const std::set<std::string> known{"n_osc",    "mass",         "coupling",  "pinning",
                                           "magnetic", "nnn",          "friction",  "friction_set",
                                           "temp_left", "temp_right",  "boundary",  "nnn_rank"};
  std::map<std::string, std::pair<std::string, int>> kv;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = lower(trim(std::string_view(s).substr(0, eq)));
    const std::string val = trim(std::string_view(s).substr(eq + 1));
    if (!known.count(key)) throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    if (kv.count(key)) throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    if (val.empty()) throw ConfigError("line " + std::to_string(line) + ": empty value for '" + key + "'");
    kv[key] = {val, line};
  }

  ChainConfig cfg;
  if (!kv.count("n_osc")) throw ConfigError("missing required key 'n_osc'");
  auto real = [&](const char* k, double& dst) {
    if (auto it = kv.find(k); it != kv.end()) dst = parse_real(k, it->second.first, it->second.second);
  };
  cfg.n_osc = parse_int("n_osc", kv["n_osc"].first, kv["n_osc"].second);
  real("mass", cfg.mass);
  real("coupling", cfg.coupling);
  real("pinning", cfg.pinning);
  real("magnetic", cfg.magnetic);
  real("nnn", cfg.nnn);
  real("friction", cfg.friction);
  real("temp_left", cfg.temp_left);
  real("temp_right", cfg.temp_right);

  if (auto it = kv.find("boundary"); it != kv.end()) {
    const auto v = lower(it->second.first);
    if (v == "dirichlet") cfg.boundary = Boundary::Dirichlet;
    else if (v == "neumann") cfg.boundary = Boundary::Neumann;
    else throw ConfigError("line " + std::to_string(it->second.second) + ": boundary must be dirichlet or neumann");
  }
  cfg.nnn_rank = cfg.boundary == Boundary::Dirichlet ? NnnRank::RankOne : NnnRank::RankTwo;
  if (auto it = kv.find("nnn_rank"); it != kv.end()) {
    const auto v = lower(it->second.first);
    if (v == "one") cfg.nnn_rank = NnnRank::RankOne;
    else if (v == "two") cfg.nnn_rank = NnnRank::RankTwo;
    else throw ConfigError("line " + std::to_string(it->second.second) + ": nnn_rank must be one or two");
  }

  if (auto it = kv.find("friction_set"); it != kv.end()) {
    const auto v = lower(it->second.first);
    cfg.friction_set.clear();
    if (v == "both") {
      cfg.friction_set = {1, cfg.n_osc};
    } else {
      std::istringstream items(v);
      std::string tok;
      while (std::getline(items, tok, ',')) {
        tok = trim(tok);
        if (tok == "n") cfg.friction_set.push_back(cfg.n_osc);
        else cfg.friction_set.push_back(parse_int("friction_set", tok, it->second.second));
      }
    }
  }
  validate(cfg);
  return cfg;
}

ChainConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace chaingap
