#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kschemo/diagnostics.hpp"
#include "kschemo/elliptic.hpp"
#include "kschemo/harness/config.hpp"
#include "kschemo/harness/scenario.hpp"
#include "kschemo/integrator.hpp"
#include "kschemo/samples.hpp"

namespace kschemo::harness {

inline constexpr double kResolventTolerance = 1e-9;
inline constexpr double kStabilityTolerance = 0.10;
inline constexpr int kMinDecaySteps = 4;
inline constexpr double kCrossValidateTolerance = 1e-3;
inline constexpr double kEnergyRatio = 4.0;
inline constexpr double kEquilibriumResidual = 1e-12;

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"resolvent", "semigroup", "gradient_smoothing",
                                                 "picard", "energy"};
  return names;
}

struct SuiteCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=", "<", ">="
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<SuiteCheck> checks;
  nlohmann::json details = nlohmann::json::object();

  bool pass() const {
    if (checks.empty()) return false;
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void check(std::string name, double value, const std::string& rel, double threshold) {
    bool ok = false;
    if (rel == "<=") ok = value <= threshold;
    else if (rel == "<") ok = value < threshold;
    else if (rel == ">=") ok = value >= threshold;
    else throw std::logic_error("SuiteReport::check: unknown relation " + rel);
    checks.push_back({std::move(name), value, threshold, rel, ok && std::isfinite(value)});
  }
};

/// Log-spaced times t_min .. t_max.
inline std::vector<double> log_time_grid(double t_min, double t_max, int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i)
    t[i] = t_min * std::pow(t_max / t_min, static_cast<double>(i) / (count - 1));
  return t;
}

inline double relative_change(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline SuiteReport suite_resolvent(const SimConfig& cfg) {
  SuiteReport rep{"resolvent", {}, {}};
  const Grid g = make_config_grid(cfg);
  auto samples = band_limited_samples(g, cfg.seed, cfg.verify.samples);
  // Designed cases: the constant attains sup_ratio = 1, a single mode is exact.
  samples.push_back(Field(g, 1.0));
  samples.push_back(sample_field(g, [&](const double* x) { return std::cos(M_PI * x[0] / g.half_length()); }));
  for (double lam : cfg.verify.lambdas) {
    const ResolventReport r = verify_resolvent_bounds(samples, lam);
    const std::string tag = "lambda=" + format_real(lam);
    rep.check("sup_ratio " + tag, r.sup_ratio, "<=", 1.0 + kResolventTolerance);
    rep.check("grad_ratio " + tag, r.grad_ratio, "<=", 1.0 + kResolventTolerance);
    rep.details["lambdas"].push_back(
        {{"lambda", lam}, {"sup_ratio", r.sup_ratio}, {"grad_ratio", r.grad_ratio}, {"samples", r.sample_count}});
  }
  return rep;
}

/// Worst constants at (samples, time_points) and at twice both; the two must
/// agree within 10%. The decay constants must also respect their bound.
inline SuiteReport suite_semigroup(const SimConfig& cfg) {
  SuiteReport rep{"semigroup", {}, {}};
  const auto& v = cfg.verify;
  const Grid g = make_config_grid(cfg);
  const auto coarse_t = log_time_grid(v.t_min, v.t_max, v.time_points);
  const auto fine_t = log_time_grid(v.t_min, v.t_max, 2 * v.time_points);
  const auto small = band_limited_samples(g, cfg.seed, v.samples);
  const auto large = band_limited_samples(g, cfg.seed + 1, 2 * v.samples);
  for (double lam : v.lambdas) {
    for (double alpha : v.alphas) {
      const double c0 = verify_semigroup_decay(alpha, lam, coarse_t, small).worst_constant;
      const double c1 = verify_semigroup_decay(alpha, lam, fine_t, large).worst_constant;
      const std::string tag = "alpha=" + format_real(alpha) + " lambda=" + format_real(lam);
      rep.check("stability " + tag, relative_change(c0, c1), "<=", kStabilityTolerance);
      rep.check("bound " + tag, std::max(c0, c1), "<=", semigroup_decay_bound(alpha) * (1.0 + 1e-12));
      rep.details["constants"].push_back({{"alpha", alpha}, {"lambda", lam}, {"coarse", c0}, {"fine", c1}});
    }
  }
  return rep;
}

inline SuiteReport suite_gradient_smoothing(const SimConfig& cfg) {
  SuiteReport rep{"gradient_smoothing", {}, {}};
  const auto& v = cfg.verify;
  const Grid g = make_config_grid(cfg);
  const auto coarse_t = log_time_grid(v.t_min, v.t_max, v.time_points);
  const auto fine_t = log_time_grid(v.t_min, v.t_max, 2 * v.time_points);
  const auto small = smoothing_probe_samples(g, cfg.seed, v.samples);
  const auto large = smoothing_probe_samples(g, cfg.seed + 1, 2 * v.samples);
  for (auto [p, q] : {std::pair{2.0, 2.0}, std::pair{2.0, kInf}}) {
    const double c0 = verify_gradient_smoothing(p, q, coarse_t, small).worst_constant;
    const double c1 = verify_gradient_smoothing(p, q, fine_t, large).worst_constant;
    const std::string tag = "p=" + norm_label(p) + " q=" + norm_label(q);
    rep.check("stability " + tag, relative_change(c0, c1), "<=", kStabilityTolerance);
    rep.details["constants"].push_back({{"p", norm_label(p)}, {"q", norm_label(q)}, {"coarse", c0}, {"fine", c1}});
  }
  return rep;
}

/// Number of consecutive strictly decreasing successive differences.
inline int decay_steps(const std::vector<double>& d) {
  int n = 0;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    if (d[k + 1] < d[k]) ++n;
    else break;
  }
  return n;
}

inline SuiteReport suite_picard(const SimConfig& cfg) {
  SuiteReport rep{"picard", {}, {}};
  const auto& v = cfg.verify;
  const Grid g = make_config_grid(cfg);
  const Field u0 = build_initial(cfg, g);
  const PicardRecord rec = picard_iterate(u0, cfg.params, v.horizon, v.time_nodes, v.max_iters);
  rep.check("contraction_ratio", rec.contraction_ratio, "<", 1.0);
  rep.check("decay_steps", decay_steps(rec.successive_diffs), ">=", kMinDecaySteps);
  const double sup0 = sup_norm(u0);
  double gap = kInf;
  std::string error;
  try {
    gap = cross_validate(u0, cfg.params, v.horizon, v.time_nodes);
  } catch (const std::exception& e) {
    error = e.what();
  }
  rep.check("cross_validate", gap, "<=", kCrossValidateTolerance * sup0);
  rep.details = {{"horizon", v.horizon},
                 {"time_nodes", v.time_nodes},
                 {"status", to_string(rec.status)},
                 {"iterations", rec.iterate_count},
                 {"successive_diffs", rec.successive_diffs},
                 {"contraction_ratio", rec.contraction_ratio},
                 {"cross_validate", gap},
                 {"u0_sup", sup0}};
  if (!error.empty()) rep.details["cross_validate_error"] = error;
  return rep;
}

/// Residual of the r = 2 balance after advancing the configured initial data
/// to energy_time on each of the two grid sizes, plus the residual at the
/// constant state with the same mean.
inline SuiteReport suite_energy(const SimConfig& cfg) {
  SuiteReport rep{"energy", {}, {}};
  const auto& v = cfg.verify;
  std::vector<double> residuals;
  double mean = 0.0;
  for (int n : v.energy_points) {
    SimConfig c = cfg;
    c.grid.points = n;
    const Grid g = make_config_grid(c);
    const Field u0 = build_initial(c, g);
    mean = integral(u0) / g.box_volume();
    StepControl ctrl;
    ctrl.dt = v.energy_dt;
    ctrl.t_end = v.energy_time;
    ctrl.cadence = 1L << 40;
    const SimulationResult sim = run_simulation(u0, c.params, ctrl);
    if (!sim.trace.status.completed())
      throw std::runtime_error("energy suite: run at n=" + std::to_string(n) + " ended with " +
                               sim.trace.status.describe());
    const RhsResult rhs = assemble_rhs(sim.final, c.params);
    residuals.push_back(energy_identity_residual(sim.final, rhs.v, rhs.w, rhs.dudt, c.params, 2.0));
  }
  const double ratio = residuals[1] > 0.0 ? residuals[0] / residuals[1] : kInf;
  rep.check("refinement_ratio", ratio, ">=", kEnergyRatio);

  const Grid g = make_config_grid(cfg);
  const Field eq(g, mean);
  const RhsResult rhs = assemble_rhs(eq, cfg.params);
  const double eq_res = energy_identity_residual(eq, rhs.v, rhs.w, rhs.dudt, cfg.params, 2.0);
  rep.check("equilibrium_residual", eq_res, "<=", kEquilibriumResidual);
  rep.details = {{"points", v.energy_points},
                 {"residuals", residuals},
                 {"ratio", ratio},
                 {"equilibrium_value", mean},
                 {"equilibrium_residual", eq_res}};
  return rep;
}

inline SuiteReport run_suite(const std::string& which, const SimConfig& cfg) {
  if (which == "resolvent") return suite_resolvent(cfg);
  if (which == "semigroup") return suite_semigroup(cfg);
  if (which == "gradient_smoothing") return suite_gradient_smoothing(cfg);
  if (which == "picard") return suite_picard(cfg);
  if (which == "energy") return suite_energy(cfg);
  throw std::invalid_argument("unknown suite '" + which + "'");
}

inline nlohmann::json suite_json(const SuiteReport& rep, const SimConfig& cfg) {
  nlohmann::json j;
  j["suite"] = rep.suite;
  j["pass"] = rep.pass();
  j["seed"] = cfg.seed;
  for (const auto& c : rep.checks)
    j["checks"].push_back({{"name", c.name},
                           {"value", c.value},
                           {"relation", c.relation},
                           {"threshold", c.threshold},
                           {"pass", c.pass}});
  j["details"] = rep.details;
  j["config"] = config_to_json(cfg);
  j["versions"] = versions_json();
  return j;
}

/// Run a suite and write <out_dir>/verify_<suite>.json.
inline SuiteReport verify_suite(const std::string& which, const SimConfig& cfg,
                                const std::filesystem::path& out_dir) {
  SuiteReport rep = run_suite(which, cfg);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / ("verify_" + which + ".json");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << suite_json(rep, cfg).dump(2) << "\n";
  }
  return rep;
}

}  // namespace kschemo::harness
