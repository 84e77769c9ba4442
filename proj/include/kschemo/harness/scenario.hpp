#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "kschemo/harness/config.hpp"
#include "kschemo/integrator.hpp"
#include "kschemo/samples.hpp"

namespace kschemo::harness {

#ifndef KSCHEMO_VERSION
#define KSCHEMO_VERSION "0.1.0"
#endif

inline Grid make_config_grid(const SimConfig& cfg) {
  return make_grid(cfg.grid.dim, cfg.grid.half_length, cfg.grid.points);
}

inline Field read_field_file(const Grid& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("initial.path: cannot open '" + path + "'");
  Field f(g);
  std::size_t count = 0;
  double x;
  while (in >> x) {
    if (count == f.size())
      throw std::runtime_error("initial.path: more than " + std::to_string(f.size()) + " values");
    f[count++] = x;
  }
  if (!in.eof()) throw std::runtime_error("initial.path: non-numeric token in '" + path + "'");
  if (count != f.size())
    throw std::runtime_error("initial.path: expected " + std::to_string(f.size()) + " values, got " +
                             std::to_string(count));
  return f;
}

/// Initial density described by cfg.initial. For the Gaussian kinds the
/// amplitude is the peak value; a given mass rescales the discrete integral
/// instead (split evenly between the two bumps of two_gaussians).
inline Field build_initial(const SimConfig& cfg, const Grid& g) {
  const auto& ini = cfg.initial;
  if (ini.kind == "constant") {
    double value = ini.amplitude.value_or(1.0);
    if (ini.mass) value = *ini.mass / g.box_volume();
    return Field(g, value);
  }
  if (ini.kind == "file") {
    Field f = read_field_file(g, ini.path);
    if (ini.mass) f = with_mass(std::move(f), *ini.mass);
    return f;
  }
  const double amp = ini.amplitude.value_or(1.0);
  if (ini.kind == "gaussian") {
    const std::vector<double> c = ini.centers.empty() ? std::vector<double>{} : ini.centers.front();
    Field f = gaussian(g, 1.0, ini.width, c);
    if (ini.mass) return *ini.mass == 0.0 ? Field(g, 0.0) : with_mass(std::move(f), *ini.mass);
    for (double& x : f.values) x *= amp;
    return f;
  }
  // two_gaussians
  Field a = gaussian(g, 1.0, ini.width, ini.centers.at(0));
  Field b = gaussian(g, 1.0, ini.width, ini.centers.at(1));
  if (ini.mass) {
    if (*ini.mass == 0.0) return Field(g, 0.0);
    a = with_mass(std::move(a), 0.5 * *ini.mass);
    b = with_mass(std::move(b), 0.5 * *ini.mass);
  } else {
    for (double& x : a.values) x *= amp;
    for (double& x : b.values) x *= amp;
  }
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

/// StepControl with run-dependent defaults resolved.
inline StepControl resolve_control(const SimConfig& cfg, const Field& u0) {
  StepControl ctrl = cfg.ctrl;
  ctrl.cadence = cfg.output.cadence;
  ctrl.positivity_guard = positivity_guard_enabled(cfg);
  if (!ctrl.blowup_threshold) {
    const double s = sup_norm(u0);
    if (s > 0.0) ctrl.blowup_threshold = cfg.blowup_factor * s;
  }
  return ctrl;
}

inline std::string norm_label(double p) {
  if (std::isinf(p)) return "inf";
  return format_real(p);
}

/// CSV header; the first thirteen columns are a fixed schema, extra
/// configured exponents follow as u_L<p>.
inline std::vector<std::string> csv_columns(const NormTrace& trace) {
  std::vector<std::string> cols = {"t",           "mass",        "min_u",        "u_L1",
                                   "u_L2",        "u_L4",        "u_Linf",       "v_Linf",
                                   "w_Linf",      "grad_v_Linf", "grad_w_Linf",  "energy_residual_r2",
                                   "tail_mass_fraction"};
  for (double p : trace.norm_ps) {
    bool standard = false;
    for (double s : standard_norm_ps()) standard |= (s == p);
    if (!standard) cols.push_back("u_L" + norm_label(p));
  }
  return cols;
}

inline void write_trace_csv(const NormTrace& trace, std::ostream& out) {
  const auto cols = csv_columns(trace);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  const std::size_t k1 = trace.p_index(1.0), k2 = trace.p_index(2.0), k4 = trace.p_index(4.0),
                    kinf = trace.p_index(kInf);
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (const auto& r : trace.rows) {
    out << num(r.t) << ',' << num(r.mass) << ',' << num(r.min_u) << ',' << num(r.u_lp[k1]) << ','
        << num(r.u_lp[k2]) << ',' << num(r.u_lp[k4]) << ',' << num(r.u_lp[kinf]) << ','
        << num(r.v_lp[kinf]) << ',' << num(r.w_lp[kinf]) << ',' << num(r.grad_v_sup) << ','
        << num(r.grad_w_sup) << ',' << num(r.energy_residual) << ',' << num(r.tail_mass_fraction);
    for (std::size_t k = 0; k < trace.norm_ps.size(); ++k) {
      bool standard = false;
      for (double s : standard_norm_ps()) standard |= (s == trace.norm_ps[k]);
      if (!standard) out << ',' << num(r.u_lp[k]);
    }
    out << "\n";
  }
}

/// Config echo grouped by section, values in their textual form.
inline nlohmann::json config_to_json(const SimConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [path, spec] : key_table()) {
    const std::string value = spec.get(cfg);
    if (value.empty()) continue;
    const auto dot = path.find('.');
    if (dot == std::string::npos) j[path] = value;
    else j[path.substr(0, dot)][path.substr(dot + 1)] = value;
  }
  return j;
}

inline nlohmann::json versions_json() {
  char fftw[64];
  std::snprintf(fftw, sizeof fftw, "%s", fftw_version);
  return {{"kschemo", KSCHEMO_VERSION}, {"fftw", fftw}, {"compiler", __VERSION__},
          {"cplusplus", static_cast<long>(__cplusplus)}};
}

struct ScenarioResult {
  SimulationResult sim;
  Regime regime;
  double plateau = 0.0;
  double max_sup = 0.0;
  double max_mass_drift = 0.0;  // relative, over recorded rows
  std::filesystem::path csv_path;
  std::filesystem::path json_path;
};

inline nlohmann::json sidecar_json(const SimConfig& cfg, const ScenarioResult& r) {
  nlohmann::json j;
  j["config"] = config_to_json(cfg);
  j["regime"] = {{"tag", to_string(r.regime.tag)}, {"detail", r.regime.detail}};
  const RunStatus& st = r.sim.trace.status;
  j["status"] = to_string(st.kind);
  if (!st.completed()) j["blowup_time"] = st.time;
  j["versions"] = versions_json();
  j["seed"] = cfg.seed;
  j["steps"] = r.sim.steps;
  j["final_time"] = r.sim.final_time;
  j["rows"] = r.sim.trace.rows.size();
  j["blowup_threshold"] = r.sim.blowup_threshold;
  j["plateau_ratio"] = r.plateau;
  j["max_sup"] = r.max_sup;
  j["max_mass_drift"] = r.max_mass_drift;
  return j;
}

/// Run one configured experiment and write <out_dir>/<output.path>.csv and
/// .json. An empty out_dir skips writing.
inline ScenarioResult run_scenario(const SimConfig& cfg, const std::filesystem::path& out_dir) {
  const Grid g = make_config_grid(cfg);
  const Field u0 = build_initial(cfg, g);
  const StepControl ctrl = resolve_control(cfg, u0);

  ScenarioResult res;
  res.regime = classify_regime(cfg.params);
  res.sim = run_simulation(u0, cfg.params, ctrl, cfg.output.norm_ps);
  const auto& rows = res.sim.trace.rows;
  res.plateau = plateau_ratio(res.sim.trace, 0.5 * cfg.ctrl.t_end);
  const std::size_t kinf = res.sim.trace.p_index(kInf);
  const double m0 = rows.front().mass;
  for (const auto& r : rows) {
    res.max_sup = std::max(res.max_sup, r.u_lp[kinf]);
    if (m0 != 0.0) res.max_mass_drift = std::max(res.max_mass_drift, std::abs(r.mass - m0) / std::abs(m0));
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    res.csv_path = out_dir / (cfg.output.path + ".csv");
    res.json_path = out_dir / (cfg.output.path + ".json");
    {
      std::ofstream csv(res.csv_path);
      if (!csv) throw std::runtime_error("cannot write " + res.csv_path.string());
      write_trace_csv(res.sim.trace, csv);
      if (!csv) throw std::runtime_error("write failed for " + res.csv_path.string());
    }
    std::ofstream js(res.json_path);
    if (!js) throw std::runtime_error("cannot write " + res.json_path.string());
    js << sidecar_json(cfg, res).dump(2) << "\n";
    if (!js) throw std::runtime_error("write failed for " + res.json_path.string());
  }
  return res;
}

}  // namespace kschemo::harness
