#pragma once

// Experiment configuration: an INI-style text format.
//
//   # comment               ; also a comment
//   seed = 42               keys before any [section] live at the root
//   [grid]
//   dim = 2
//
// Keys are unique per section, values run to the end of the line (an
// unquoted '#' starts a trailing comment). Lists are comma separated;
// center lists separate points with ';'. The accepted keys are exactly
// those in key_table() below; anything else is rejected with its
// section.key path and line number.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kschemo/control.hpp"
#include "kschemo/grid.hpp"
#include "kschemo/model.hpp"
#include "kschemo/norms.hpp"

namespace kschemo::harness {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GridConfig {
  int dim = 2;
  double half_length = 10.0;
  int points = 256;
};

struct InitialConfig {
  std::string kind = "gaussian";  // gaussian | two_gaussians | constant | file
  std::optional<double> amplitude;
  std::optional<double> mass;
  double width = 1.0;
  std::vector<std::vector<double>> centers;
  std::string path;
};

struct OutputConfig {
  std::string path = "trace";
  long cadence = 10;
  std::vector<double> norm_ps = {1.0, 2.0, 4.0, kInf};
};

/// Parameters of the verification suites.
struct VerifyConfig {
  int samples = 64;
  std::vector<double> lambdas = {0.5, 1.0, 4.0};
  std::vector<double> alphas = {0.25, 0.5, 1.0};
  int time_points = 32;
  double t_min = 1e-2;
  double t_max = 10.0;
  int quad_steps = 256;
  double horizon = 0.25;
  int time_nodes = 65;
  int max_iters = 60;
  std::vector<int> energy_points = {128, 256};
  double energy_time = 0.05;
  double energy_dt = 1e-3;
};

enum class Tristate { Auto, On, Off };

struct SimConfig {
  GridConfig grid;
  ModelParams params;
  StepControl ctrl;
  double blowup_factor = 1e6;  // used when ctrl.blowup_threshold is unset
  Tristate positivity_guard = Tristate::Auto;
  InitialConfig initial;
  OutputConfig output;
  VerifyConfig verify;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "inf" || t == "infinity") return kInf;
  try {
    std::size_t used = 0;
    const double x = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + t + "'");
  }
}

inline long parse_integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  try {
    std::size_t used = 0;
    const long x = std::stol(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + t + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + t + "'");
}

inline std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) {
    if (item.empty()) throw ConfigError(key + ": empty list entry");
    out.push_back(parse_real(key, item));
  }
  return out;
}

}  // namespace detail

struct KeySpec {
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
  bool numeric = false;  // may be swept
};

inline std::string format_real(double x) {
  if (std::isinf(x)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Every accepted key, addressed as "section.key" (root keys bare).
inline const std::map<std::string, KeySpec>& key_table() {
  using detail::parse_integer;
  using detail::parse_real;
  static const std::map<std::string, KeySpec> table = [] {
    std::map<std::string, KeySpec> t;
    auto add_real = [&t](const std::string& key, std::function<double&(SimConfig&)> ref) {
      t[key] = {[key, ref](SimConfig& c, const std::string& v) { ref(c) = parse_real(key, v); },
                [ref](const SimConfig& c) { return format_real(ref(const_cast<SimConfig&>(c))); },
                true};
    };
    auto add_int = [&t](const std::string& key, std::function<long(const SimConfig&)> get,
                        std::function<void(SimConfig&, long)> put) {
      t[key] = {[key, put](SimConfig& c, const std::string& v) { put(c, parse_integer(key, v)); },
                [get](const SimConfig& c) { return std::to_string(get(c)); }, true};
    };

    add_int("seed", [](const SimConfig& c) { return static_cast<long>(c.seed); },
            [](SimConfig& c, long v) {
              if (v < 0) throw ConfigError("seed: must be non-negative");
              c.seed = static_cast<std::uint64_t>(v);
            });

    add_int("grid.dim", [](const SimConfig& c) { return long(c.grid.dim); },
            [](SimConfig& c, long v) { c.grid.dim = int(v); });
    add_real("grid.half_length", [](SimConfig& c) -> double& { return c.grid.half_length; });
    add_int("grid.points", [](const SimConfig& c) { return long(c.grid.points); },
            [](SimConfig& c, long v) { c.grid.points = int(v); });

    add_real("params.xi1", [](SimConfig& c) -> double& { return c.params.xi1; });
    add_real("params.xi2", [](SimConfig& c) -> double& { return c.params.xi2; });
    add_real("params.lambda1", [](SimConfig& c) -> double& { return c.params.lambda1; });
    add_real("params.lambda2", [](SimConfig& c) -> double& { return c.params.lambda2; });
    add_real("params.c1", [](SimConfig& c) -> double& { return c.params.c1; });
    add_real("params.c2", [](SimConfig& c) -> double& { return c.params.c2; });
    add_real("params.l", [](SimConfig& c) -> double& { return c.params.l; });
    add_real("params.m", [](SimConfig& c) -> double& { return c.params.m; });

    t["control.dt"] = {[](SimConfig& c, const std::string& v) {
                         if (detail::trim(v) == "auto") c.ctrl.dt.reset();
                         else c.ctrl.dt = parse_real("control.dt", v);
                       },
                       [](const SimConfig& c) { return c.ctrl.dt ? format_real(*c.ctrl.dt) : std::string("auto"); },
                       true};
    add_real("control.t_end", [](SimConfig& c) -> double& { return c.ctrl.t_end; });
    add_real("control.cfl_safety", [](SimConfig& c) -> double& { return c.ctrl.cfl_safety; });
    add_int("control.max_steps", [](const SimConfig& c) { return c.ctrl.max_steps; },
            [](SimConfig& c, long v) { c.ctrl.max_steps = v; });
    t["control.blowup_threshold"] = {
        [](SimConfig& c, const std::string& v) {
          if (detail::trim(v) == "auto") c.ctrl.blowup_threshold.reset();
          else c.ctrl.blowup_threshold = parse_real("control.blowup_threshold", v);
        },
        [](const SimConfig& c) {
          return c.ctrl.blowup_threshold ? format_real(*c.ctrl.blowup_threshold) : std::string("auto");
        },
        true};
    add_real("control.blowup_factor", [](SimConfig& c) -> double& { return c.blowup_factor; });
    t["control.positivity_guard"] = {
        [](SimConfig& c, const std::string& v) {
          const std::string s = detail::trim(v);
          if (s == "auto") c.positivity_guard = Tristate::Auto;
          else c.positivity_guard = detail::parse_bool("control.positivity_guard", s) ? Tristate::On : Tristate::Off;
        },
        [](const SimConfig& c) {
          return std::string(c.positivity_guard == Tristate::Auto ? "auto"
                             : c.positivity_guard == Tristate::On ? "true" : "false");
        },
        false};

    t["initial.kind"] = {[](SimConfig& c, const std::string& v) {
                           const std::string s = detail::trim(v);
                           if (s != "gaussian" && s != "two_gaussians" && s != "constant" && s != "file")
                             throw ConfigError("initial.kind: expected gaussian, two_gaussians, constant or file, got '" + s + "'");
                           c.initial.kind = s;
                         },
                         [](const SimConfig& c) { return c.initial.kind; }, false};
    t["initial.amplitude"] = {[](SimConfig& c, const std::string& v) { c.initial.amplitude = parse_real("initial.amplitude", v); },
                              [](const SimConfig& c) { return c.initial.amplitude ? format_real(*c.initial.amplitude) : std::string(); },
                              true};
    t["initial.mass"] = {[](SimConfig& c, const std::string& v) { c.initial.mass = parse_real("initial.mass", v); },
                         [](const SimConfig& c) { return c.initial.mass ? format_real(*c.initial.mass) : std::string(); },
                         true};
    add_real("initial.width", [](SimConfig& c) -> double& { return c.initial.width; });
    t["initial.centers"] = {[](SimConfig& c, const std::string& v) {
                              c.initial.centers.clear();
                              for (const auto& pt : detail::split(v, ';')) {
                                std::vector<double> xs;
                                std::istringstream in(pt);
                                std::string tok;
                                while (in >> tok) xs.push_back(parse_real("initial.centers", tok));
                                if (xs.empty()) throw ConfigError("initial.centers: empty point");
                                c.initial.centers.push_back(std::move(xs));
                              }
                            },
                            [](const SimConfig& c) {
                              std::string s;
                              for (std::size_t i = 0; i < c.initial.centers.size(); ++i) {
                                if (i) s += "; ";
                                for (std::size_t a = 0; a < c.initial.centers[i].size(); ++a) {
                                  if (a) s += " ";
                                  s += format_real(c.initial.centers[i][a]);
                                }
                              }
                              return s;
                            },
                            false};
    t["initial.path"] = {[](SimConfig& c, const std::string& v) { c.initial.path = detail::trim(v); },
                         [](const SimConfig& c) { return c.initial.path; }, false};

    t["output.path"] = {[](SimConfig& c, const std::string& v) {
                          const std::string s = detail::trim(v);
                          if (s.empty()) throw ConfigError("output.path: must not be empty");
                          c.output.path = s;
                        },
                        [](const SimConfig& c) { return c.output.path; }, false};
    add_int("output.cadence", [](const SimConfig& c) { return c.output.cadence; },
            [](SimConfig& c, long v) { c.output.cadence = v; });
    t["output.norm_ps"] = {[](SimConfig& c, const std::string& v) { c.output.norm_ps = detail::parse_real_list("output.norm_ps", v); },
                           [](const SimConfig& c) {
                             std::string s;
                             for (std::size_t i = 0; i < c.output.norm_ps.size(); ++i)
                               s += (i ? ", " : "") + format_real(c.output.norm_ps[i]);
                             return s;
                           },
                           false};

    add_int("verify.samples", [](const SimConfig& c) { return long(c.verify.samples); },
            [](SimConfig& c, long v) { c.verify.samples = int(v); });
    t["verify.lambdas"] = {[](SimConfig& c, const std::string& v) { c.verify.lambdas = detail::parse_real_list("verify.lambdas", v); },
                           [](const SimConfig& c) {
                             std::string s;
                             for (std::size_t i = 0; i < c.verify.lambdas.size(); ++i) s += (i ? ", " : "") + format_real(c.verify.lambdas[i]);
                             return s;
                           },
                           false};
    t["verify.alphas"] = {[](SimConfig& c, const std::string& v) { c.verify.alphas = detail::parse_real_list("verify.alphas", v); },
                          [](const SimConfig& c) {
                            std::string s;
                            for (std::size_t i = 0; i < c.verify.alphas.size(); ++i) s += (i ? ", " : "") + format_real(c.verify.alphas[i]);
                            return s;
                          },
                          false};
    add_int("verify.time_points", [](const SimConfig& c) { return long(c.verify.time_points); },
            [](SimConfig& c, long v) { c.verify.time_points = int(v); });
    add_real("verify.t_min", [](SimConfig& c) -> double& { return c.verify.t_min; });
    add_real("verify.t_max", [](SimConfig& c) -> double& { return c.verify.t_max; });
    add_int("verify.quad_steps", [](const SimConfig& c) { return long(c.verify.quad_steps); },
            [](SimConfig& c, long v) { c.verify.quad_steps = int(v); });
    add_real("verify.horizon", [](SimConfig& c) -> double& { return c.verify.horizon; });
    add_int("verify.time_nodes", [](const SimConfig& c) { return long(c.verify.time_nodes); },
            [](SimConfig& c, long v) { c.verify.time_nodes = int(v); });
    add_int("verify.max_iters", [](const SimConfig& c) { return long(c.verify.max_iters); },
            [](SimConfig& c, long v) { c.verify.max_iters = int(v); });
    t["verify.energy_points"] = {[](SimConfig& c, const std::string& v) {
                                   c.verify.energy_points.clear();
                                   for (const auto& item : detail::split(v, ','))
                                     c.verify.energy_points.push_back(int(parse_integer("verify.energy_points", item)));
                                 },
                                 [](const SimConfig& c) {
                                   std::string s;
                                   for (std::size_t i = 0; i < c.verify.energy_points.size(); ++i)
                                     s += (i ? ", " : "") + std::to_string(c.verify.energy_points[i]);
                                   return s;
                                 },
                                 false};
    add_real("verify.energy_time", [](SimConfig& c) -> double& { return c.verify.energy_time; });
    add_real("verify.energy_dt", [](SimConfig& c) -> double& { return c.verify.energy_dt; });
    return t;
  }();
  return table;
}

struct IniEntry {
  std::string path;  // "section.key" or "key"
  std::string value;
  int line = 0;
};

/// Split INI text into entries in file order. Rejects malformed lines and
/// duplicate keys.
inline std::vector<IniEntry> read_ini(const std::string& text) {
  std::vector<IniEntry> out;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    const std::string path = section.empty() ? key : section + "." + key;
    if (auto it = seen.find(path); it != seen.end())
      throw ConfigError(path + ": duplicate key (lines " + std::to_string(it->second) + " and " +
                        std::to_string(line_no) + ")");
    seen[path] = line_no;
    out.push_back({path, detail::trim(line.substr(eq + 1)), line_no});
  }
  return out;
}

/// Set one field by its "section.key" path.
inline void apply_setting(SimConfig& cfg, const std::string& path, const std::string& value) {
  const auto& table = key_table();
  auto it = table.find(path);
  if (it == table.end()) throw ConfigError("unknown key '" + path + "'");
  it->second.set(cfg, value);
}

inline bool is_numeric_key(const std::string& path) {
  const auto& table = key_table();
  auto it = table.find(path);
  return it != table.end() && it->second.numeric;
}

/// Cross-field invariants. Error messages name the key path.
inline void validate(SimConfig& cfg) {
  try {
    (void)make_grid(cfg.grid.dim, cfg.grid.half_length, cfg.grid.points);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  cfg.params.dim = cfg.grid.dim;
  cfg.ctrl.cadence = cfg.output.cadence;
  try {
    cfg.params.validate();
    cfg.ctrl.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.blowup_factor > 1.0)) throw ConfigError("control.blowup_factor must exceed 1");
  const auto& ini = cfg.initial;
  if (ini.amplitude && ini.mass)
    throw ConfigError("initial.amplitude and initial.mass are mutually exclusive");
  if (ini.mass && !(*ini.mass >= 0.0)) throw ConfigError("initial.mass must be non-negative");
  if (ini.amplitude && !(*ini.amplitude >= 0.0))
    throw ConfigError("initial.amplitude must be non-negative");
  if (!(ini.width > 0.0)) throw ConfigError("initial.width must be positive");
  for (const auto& c : ini.centers)
    if (static_cast<int>(c.size()) != cfg.grid.dim)
      throw ConfigError("initial.centers: each point needs " + std::to_string(cfg.grid.dim) + " coordinates");
  if (ini.kind == "two_gaussians" && ini.centers.size() != 2)
    throw ConfigError("initial.centers: two_gaussians needs exactly two points");
  if (ini.kind == "file" && ini.path.empty()) throw ConfigError("initial.path: required for kind = file");
  for (double p : cfg.output.norm_ps)
    if (std::isnan(p) || p < 1.0) throw ConfigError("output.norm_ps: entries must be >= 1");
  const auto& v = cfg.verify;
  if (v.samples < 1) throw ConfigError("verify.samples must be >= 1");
  if (v.time_points < 2) throw ConfigError("verify.time_points must be >= 2");
  if (!(v.t_min > 0.0 && v.t_max > v.t_min)) throw ConfigError("verify.t_min/t_max must satisfy 0 < t_min < t_max");
  if (v.quad_steps < 32) throw ConfigError("verify.quad_steps must be >= 32");
  if (!(v.horizon > 0.0)) throw ConfigError("verify.horizon must be positive");
  if (v.time_nodes < 16) throw ConfigError("verify.time_nodes must be >= 16");
  if (v.max_iters < 1) throw ConfigError("verify.max_iters must be >= 1");
  for (double lam : v.lambdas)
    if (!(lam > 0.0)) throw ConfigError("verify.lambdas: entries must be positive");
  for (double a : v.alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("verify.alphas: entries must lie in [0, 1]");
  if (v.energy_points.size() != 2) throw ConfigError("verify.energy_points: expected two grid sizes");
  for (int n : v.energy_points)
    if (n < 8 || n % 2) throw ConfigError("verify.energy_points: sizes must be even and >= 8");
  if (!(v.energy_time > 0.0 && v.energy_dt > 0.0 && v.energy_dt <= v.energy_time))
    throw ConfigError("verify.energy_time/energy_dt must satisfy 0 < energy_dt <= energy_time");
}

/// Parse and validate. Sections named in `ignored_sections` are skipped
/// (used to share one file between a base config and a sweep block).
inline SimConfig parse_config(const std::string& text,
                              const std::vector<std::string>& ignored_sections = {}) {
  SimConfig cfg;
  for (const auto& e : read_ini(text)) {
    bool skip = false;
    for (const auto& s : ignored_sections)
      if (e.path.rfind(s + ".", 0) == 0) skip = true;
    if (skip) continue;
    try {
      apply_setting(cfg, e.path, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(std::string(err.what()) + " (line " + std::to_string(e.line) + ")");
    }
  }
  validate(cfg);
  return cfg;
}

/// Read a whole text file.
inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Effective positivity guard: Auto enables it for the bounded regimes.
inline bool positivity_guard_enabled(const SimConfig& cfg) {
  if (cfg.positivity_guard == Tristate::On) return true;
  if (cfg.positivity_guard == Tristate::Off) return false;
  return classify_regime(cfg.params).tag != RegimeTag::Uncovered;
}

}  // namespace kschemo::harness
