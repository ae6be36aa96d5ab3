#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "potential.hpp"

namespace nlslab {

// Full description of one tool invocation. Every output file embeds the
// canonical rendering of this struct, and parse(canonical(c)) == c holds
// field for field, which is what makes reruns byte-comparable.
struct RunConfig {
  std::string command = "groundstate";
  std::string potential = "zero";
  double p = 3.0;
  double omega = 1.0;
  double omega_lo = 0.1;    // scan: offsets above omega1, log-spaced
  double omega_hi = 100.0;
  std::size_t omega_count = 12;
  double dx = 5e-3;
  double half_width = 0.0;  // 0: automatic
  double eps = 1e-2;
  double T = 50.0;
  double dt = 1e-3;
  std::size_t box_points = 8192;
  double box_half_width = 0.0;  // 0: automatic
  std::vector<std::uint64_t> seeds = {1};
  int jobs = 1;
  std::string out_dir = ".";
  bool oracle_mode = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string seeds_to_string(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(seeds[i]);
  }
  return s;
}

inline std::vector<std::uint64_t> seeds_from_string(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::string cur;
  const auto flush = [&]() {
    if (cur.empty()) throw ConfigError("config: empty entry in seed list");
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(cur, &pos);
    } catch (const std::exception&) {
      throw ConfigError("config: bad seed '" + cur + "'");
    }
    if (pos != cur.size()) throw ConfigError("config: bad seed '" + cur + "'");
    out.push_back(v);
    cur.clear();
  };
  for (char c : s) {
    if (c == ',')
      flush();
    else
      cur.push_back(c);
  }
  flush();
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "' needs a number, got '" + v + "'");
  return x;
}

inline std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' needs a nonnegative integer, got '" + v + "'");
  }
  if (pos != v.size())
    throw ConfigError("config: key '" + key + "' needs a nonnegative integer, got '" + v + "'");
  return x;
}

}  // namespace detail

// key = value lines in a fixed order; the config file format and the
// canonical rendering are the same thing.
inline std::string canonical_config(const RunConfig& c, const char* sep = "\n") {
  std::ostringstream os;
  const auto put = [&](const char* key, const std::string& val, bool last = false) {
    os << key << " = " << val;
    if (!last) os << sep;
  };
  put("command", c.command);
  put("potential", c.potential);
  put("p", fmt_double(c.p));
  put("omega", fmt_double(c.omega));
  put("omega.lo", fmt_double(c.omega_lo));
  put("omega.hi", fmt_double(c.omega_hi));
  put("omega.count", std::to_string(c.omega_count));
  put("grid.dx", fmt_double(c.dx));
  put("grid.half_width", fmt_double(c.half_width));
  put("evolve.eps", fmt_double(c.eps));
  put("evolve.T", fmt_double(c.T));
  put("evolve.dt", fmt_double(c.dt));
  put("evolve.box_points", std::to_string(c.box_points));
  put("evolve.box_half_width", fmt_double(c.box_half_width));
  put("seed", detail::seeds_to_string(c.seeds));
  put("jobs", std::to_string(c.jobs));
  put("out", c.out_dir);
  put("oracle_mode", c.oracle_mode ? "true" : "false", true);
  return os.str();
}

inline void apply_config_key(RunConfig& c, const std::string& key, const std::string& val) {
  if (key == "command")
    c.command = val;
  else if (key == "potential")
    c.potential = val;
  else if (key == "p")
    c.p = detail::parse_double(key, val);
  else if (key == "omega")
    c.omega = detail::parse_double(key, val);
  else if (key == "omega.lo")
    c.omega_lo = detail::parse_double(key, val);
  else if (key == "omega.hi")
    c.omega_hi = detail::parse_double(key, val);
  else if (key == "omega.count")
    c.omega_count = detail::parse_size(key, val);
  else if (key == "grid.dx")
    c.dx = detail::parse_double(key, val);
  else if (key == "grid.half_width")
    c.half_width = detail::parse_double(key, val);
  else if (key == "evolve.eps")
    c.eps = detail::parse_double(key, val);
  else if (key == "evolve.T")
    c.T = detail::parse_double(key, val);
  else if (key == "evolve.dt")
    c.dt = detail::parse_double(key, val);
  else if (key == "evolve.box_points")
    c.box_points = detail::parse_size(key, val);
  else if (key == "evolve.box_half_width")
    c.box_half_width = detail::parse_double(key, val);
  else if (key == "seed")
    c.seeds = detail::seeds_from_string(val);
  else if (key == "jobs")
    c.jobs = static_cast<int>(detail::parse_size(key, val));
  else if (key == "out")
    c.out_dir = val;
  else if (key == "oracle_mode") {
    if (val == "true")
      c.oracle_mode = true;
    else if (val == "false")
      c.oracle_mode = false;
    else
      throw ConfigError("config: key 'oracle_mode' needs true or false, got '" + val + "'");
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
  std::istringstream is(text);
  std::string line;
  const auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    apply_config_key(base, key, val);
  }
  return base;
}

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> cmds = {"groundstate", "spectrum", "slope",
                                                "scan",        "evolve",   "verify"};
  return cmds;
}

// Reject bad inputs before any numerics run, naming the offending key.
inline void validate_config(const RunConfig& c) {
  bool known = false;
  for (const auto& k : known_commands()) known = known || (k == c.command);
  if (!known) throw ConfigError("config: unknown command '" + c.command + "'");
  Potential::parse(c.potential);  // throws with the bad field spelled out
  if (!(c.p > 1.0)) throw ConfigError("config: key 'p' must exceed 1, got " + fmt_double(c.p));
  if (!std::isfinite(c.omega)) throw ConfigError("config: key 'omega' must be finite");
  if (!(c.dx > 0.0)) throw ConfigError("config: key 'grid.dx' must be positive");
  if (c.half_width < 0.0) throw ConfigError("config: key 'grid.half_width' must be >= 0");
  if (c.command == "scan") {
    if (!(c.omega_lo > 0.0))
      throw ConfigError("config: key 'omega.lo' must be a positive offset above omega1");
    if (!(c.omega_hi > c.omega_lo))
      throw ConfigError("config: key 'omega.hi' must exceed 'omega.lo'");
    if (c.omega_count < 2) throw ConfigError("config: key 'omega.count' must be at least 2");
  }
  if (c.command == "evolve") {
    if (!(c.eps >= 0.0)) throw ConfigError("config: key 'evolve.eps' must be >= 0");
    if (!(c.T > 0.0)) throw ConfigError("config: key 'evolve.T' must be positive");
    if (!(c.dt > 0.0)) throw ConfigError("config: key 'evolve.dt' must be positive");
    if (c.box_points < 16 || c.box_points % 2 != 0)
      throw ConfigError("config: key 'evolve.box_points' must be even and at least 16");
    if (c.box_half_width < 0.0)
      throw ConfigError("config: key 'evolve.box_half_width' must be >= 0");
    if (c.seeds.empty()) throw ConfigError("config: key 'seed' must list at least one seed");
  }
  if (c.jobs < 1) throw ConfigError("config: key 'jobs' must be at least 1");
  if (c.out_dir.empty()) throw ConfigError("config: key 'out' must not be empty");
}

}  // namespace nlslab
