// Simulation parameters and the flat `key = value` configuration format.
#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cutfsi {

struct MaterialParams {
  double rho_f = 1.0;      ///< kg/m^3
  double rho_s = 1.0;      ///< kg/m^3
  double nu_f = 1e-3;      ///< m^2/s
  double mu_s = 5e-3;      ///< Pa
  double lambda_s = 1e-2;  ///< Pa
};

struct StabilizationParams {
  double gamma_vf = 1e-3;
  double gamma_p = 1e-3;
  double gamma_vs = 1e-3;
  double gamma_u = 1e-3;
  double gamma_nitsche = 100.0;
  double w_max = 1.0;
};

/// Which region carries the mass in the rows enforcing u^n - k v_s^n = u^{n-1}.
enum class ConstraintDomain { Physical, Computational };

struct SimulationConfig {
  MaterialParams material;
  StabilizationParams stabilization;
  int fluid_order = 2;  ///< m_f: Q_{m_f} velocity, Q_{m_f - 1} pressure
  int solid_order = 2;  ///< m_s
  int cells_per_side = 8;
  double radius_squared = 0.75;
  double time_step = 1.0;
  double final_time = 8.0;
  int quad_full = 3;       ///< Gauss points per axis on uncut cells
  int quad_cut = 4;        ///< base order of the polar cut-cell rules
  int quad_face = 3;
  int quad_interface = 6;  ///< points per interface arc
  ConstraintDomain constraint_domain = ConstraintDomain::Computational;

  double h() const { return 2.0 / cells_per_side; }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ConfigError on any violated parameter invariant.
inline void validate(const SimulationConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  auto nonnegative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be non-negative");
  };
  positive(c.material.rho_f, "rho_f");
  positive(c.material.rho_s, "rho_s");
  positive(c.material.nu_f, "nu_f");
  positive(c.material.mu_s, "mu_s");
  positive(c.material.lambda_s, "lambda_s");
  nonnegative(c.stabilization.gamma_vf, "gamma_vf");
  nonnegative(c.stabilization.gamma_p, "gamma_p");
  nonnegative(c.stabilization.gamma_vs, "gamma_vs");
  nonnegative(c.stabilization.gamma_u, "gamma_u");
  positive(c.stabilization.gamma_nitsche, "gamma_N");
  if (!(c.stabilization.w_max >= 1.0)) throw ConfigError("w_max must be >= 1");
  if (c.fluid_order != 2) throw ConfigError("m_f must be 2 (Taylor-Hood Q2/Q1)");
  if (c.solid_order != 1 && c.solid_order != 2) throw ConfigError("m_s must be 1 or 2");
  if (c.cells_per_side < 2) throw ConfigError("n must be >= 2");
  positive(c.radius_squared, "radius_squared");
  positive(c.time_step, "k");
  positive(c.final_time, "T");
  for (int q : {c.quad_full, c.quad_cut, c.quad_face, c.quad_interface}) {
    if (q < 1 || q > 10) throw ConfigError("quadrature orders must be in [1, 10]");
  }
}

/// Number of steps N = T / k; rejects non-integer ratios.
inline int step_count(const SimulationConfig& c) {
  const double ratio = c.final_time / c.time_step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded) {
    throw ConfigError("T / k must be a positive integer");
  }
  return static_cast<int>(rounded);
}

namespace detail {

struct ConfigKey {
  std::function<void(SimulationConfig&, const std::string&)> set;
  std::function<std::string(const SimulationConfig&)> get;
};

inline double parse_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

inline int parse_int(const std::string& s) {
  std::size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline const std::vector<std::pair<std::string, ConfigKey>>& config_keys() {
  using C = SimulationConfig;
  auto dbl = [](double C::*field) {
    return ConfigKey{[field](C& c, const std::string& s) { c.*field = parse_double(s); },
                     [field](const C& c) { return format_double(c.*field); }};
  };
  auto integer = [](int C::*field) {
    return ConfigKey{[field](C& c, const std::string& s) { c.*field = parse_int(s); },
                     [field](const C& c) { return std::to_string(c.*field); }};
  };
  auto mat = [](double MaterialParams::*field) {
    return ConfigKey{[field](C& c, const std::string& s) { c.material.*field = parse_double(s); },
                     [field](const C& c) { return format_double(c.material.*field); }};
  };
  auto stab = [](double StabilizationParams::*field) {
    return ConfigKey{[field](C& c, const std::string& s) { c.stabilization.*field = parse_double(s); },
                     [field](const C& c) { return format_double(c.stabilization.*field); }};
  };
  static const std::vector<std::pair<std::string, ConfigKey>> keys{
      {"rho_f", mat(&MaterialParams::rho_f)},
      {"rho_s", mat(&MaterialParams::rho_s)},
      {"nu_f", mat(&MaterialParams::nu_f)},
      {"mu_s", mat(&MaterialParams::mu_s)},
      {"lambda_s", mat(&MaterialParams::lambda_s)},
      {"gamma_vf", stab(&StabilizationParams::gamma_vf)},
      {"gamma_p", stab(&StabilizationParams::gamma_p)},
      {"gamma_vs", stab(&StabilizationParams::gamma_vs)},
      {"gamma_u", stab(&StabilizationParams::gamma_u)},
      {"gamma_N", stab(&StabilizationParams::gamma_nitsche)},
      {"w_max", stab(&StabilizationParams::w_max)},
      {"m_f", integer(&C::fluid_order)},
      {"m_s", integer(&C::solid_order)},
      {"n", integer(&C::cells_per_side)},
      {"h", ConfigKey{[](C& c, const std::string& s) {
                        const double h = parse_double(s);
                        const double n = 2.0 / h;
                        if (!(h > 0.0) || std::abs(n - std::round(n)) > 1e-9 * n) {
                          throw std::invalid_argument("h must divide 2");
                        }
                        c.cells_per_side = static_cast<int>(std::round(n));
                      },
                      [](const C& c) { return format_double(c.h()); }}},
      {"k", dbl(&C::time_step)},
      {"T", dbl(&C::final_time)},
      {"radius_squared", dbl(&C::radius_squared)},
      {"quad_full", integer(&C::quad_full)},
      {"quad_cut", integer(&C::quad_cut)},
      {"quad_face", integer(&C::quad_face)},
      {"quad_interface", integer(&C::quad_interface)},
      {"constraint_domain", ConfigKey{[](C& c, const std::string& s) {
                                        if (s == "physical") {
                                          c.constraint_domain = ConstraintDomain::Physical;
                                        } else if (s == "computational") {
                                          c.constraint_domain = ConstraintDomain::Computational;
                                        } else {
                                          throw std::invalid_argument("expected physical or computational");
                                        }
                                      },
                                      [](const C& c) {
                                        return std::string(c.constraint_domain == ConstraintDomain::Physical
                                                               ? "physical"
                                                               : "computational");
                                      }}},
  };
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Applies one `key = value` assignment. `where` prefixes error messages.
inline void apply_override(SimulationConfig& cfg, const std::string& assignment, const std::string& where = "override") {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
  const std::string key = detail::trim(assignment.substr(0, eq));
  const std::string value = detail::trim(assignment.substr(eq + 1));
  for (const auto& [name, handler] : detail::config_keys()) {
    if (name != key) continue;
    try {
      handler.set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(where + ": invalid value '" + value + "' for " + key + " (" + e.what() + ")");
    }
    return;
  }
  throw ConfigError(where + ": unknown key '" + key + "'");
}

/// Parses the flat text format; '#' starts a comment. Unknown keys and
/// violated invariants are errors.
inline SimulationConfig parse_config_text(const std::string& text, const std::string& source = "config") {
  SimulationConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    apply_override(cfg, line, source + ":" + std::to_string(line_no));
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

inline SimulationConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  SimulationConfig cfg = parse_config_text(ss.str(), path);
  for (const auto& o : overrides) apply_override(cfg, o);
  validate(cfg);
  return cfg;
}

/// Every key with its resolved value, in declaration order.
inline std::vector<std::pair<std::string, std::string>> config_entries(const SimulationConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, handler] : detail::config_keys()) {
    if (name == "h") continue;
    out.emplace_back(name, handler.get(cfg));
  }
  return out;
}

/// Config serialized in its own text format; parse_config_text round-trips it.
inline std::string to_config_text(const SimulationConfig& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : config_entries(cfg)) os << k << " = " << v << '\n';
  return os.str();
}

}  // namespace cutfsi
