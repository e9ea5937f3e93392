#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hfwave {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Validated experiment configuration. The file format is flat key = value
/// text (one pair per line, # comments); flags override file entries.
struct ExperimentConfig {
  std::string command;  // expand | hierarchy | full-solve | study | verify
  int K = 2;
  double eps = 0.01;
  std::vector<double> lambdas = {0.2, 0.1, 0.05};
  double R = 2.0;
  double delta = 0.0;
  double alpha = 0.5;
  double grid_dr = 0.0;  // 0 = resolution rule decides
  double t_final = 10.0;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  bool force_unresolved = false;
  std::string form = "q0";  // q0 | q0+q12 | tt | ... (see parse_form)

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "command=" << command << "\nK=" << K << "\neps=" << eps << "\nlambda=";
    for (size_t a = 0; a < lambdas.size(); ++a) os << (a ? "," : "") << lambdas[a];
    os << "\nR=" << R << "\ndelta=" << delta << "\nalpha=" << alpha << "\ngrid_dr=" << grid_dr
       << "\nt_final=" << t_final << "\nseed=" << seed
       << "\nforce_unresolved=" << (force_unresolved ? 1 : 0) << "\nform=" << form << "\n";
    return os.str();
  }
};

namespace detail {

inline double parse_number(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_number(key, item));
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' expects a comma list");
  return out;
}

}  // namespace detail

/// Applies one key/value pair with range validation. Unknown keys are
/// rejected by name.
inline void config_apply(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "command") {
    static const char* cmds[] = {"expand", "hierarchy", "full-solve", "study", "verify"};
    if (std::find_if(std::begin(cmds), std::end(cmds),
                     [&](const char* c) { return value == c; }) == std::end(cmds))
      throw ConfigError("config: command '" + value +
                        "' is not one of expand|hierarchy|full-solve|study|verify");
    cfg.command = value;
  } else if (key == "K") {
    double k = detail::parse_number(key, value);
    if (k < 2 || k != static_cast<int>(k))
      throw ConfigError("config: K must be an integer >= 2 (construction-only runs allow K >= 2)");
    cfg.K = static_cast<int>(k);
  } else if (key == "eps") {
    cfg.eps = detail::parse_number(key, value);
    if (!(cfg.eps > 0)) throw ConfigError("config: eps must be > 0");
  } else if (key == "lambda") {
    cfg.lambdas = detail::parse_list(key, value);
    for (double l : cfg.lambdas)
      if (!(l > 0.0 && l <= 1.0))
        throw ConfigError("config: lambda values must lie in (0, 1], got " + std::to_string(l));
  } else if (key == "R") {
    cfg.R = detail::parse_number(key, value);
    if (!(cfg.R > 1.0)) throw ConfigError("config: R must be > 1");
  } else if (key == "delta") {
    cfg.delta = detail::parse_number(key, value);
    if (!(cfg.delta > -0.5 && cfg.delta < 0.5))
      throw ConfigError("config: delta must lie in (-1/2, 1/2)");
  } else if (key == "alpha") {
    cfg.alpha = detail::parse_number(key, value);
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
      throw ConfigError("config: alpha must lie in (0, 1)");
  } else if (key == "grid_dr") {
    cfg.grid_dr = detail::parse_number(key, value);
    if (cfg.grid_dr < 0) throw ConfigError("config: grid_dr must be >= 0");
  } else if (key == "t_final") {
    cfg.t_final = detail::parse_number(key, value);
    if (!(cfg.t_final > 0)) throw ConfigError("config: t_final must be > 0");
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(detail::parse_number(key, value));
  } else if (key == "force_unresolved") {
    cfg.force_unresolved = value == "1" || value == "true";
  } else if (key == "form") {
    cfg.form = value;  // validated when materialized
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

/// Parses the documented flat key = value format.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
    config_apply(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (cfg.command.empty()) throw ConfigError("config: missing required key 'command'");
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in);
}

}  // namespace hfwave
