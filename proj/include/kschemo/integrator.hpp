#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "kschemo/control.hpp"
#include "kschemo/diagnostics.hpp"
#include "kschemo/grid.hpp"
#include "kschemo/model.hpp"
#include "kschemo/norms.hpp"
#include "kschemo/spectral.hpp"

namespace kschemo {

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// First-order IMEX Euler: diffusion implicit, chemotactic drift explicit,
///   u_hat_new = (u_hat + dt * drift_hat) / (1 + dt |k|^2).
/// load() evaluates the drift once so rejected steps can be retried with a
/// smaller dt at no extra cost.
class ImexStepper {
 public:
  explicit ImexStepper(ModelParams params) : params_(params) {}

  void load(const Field& u) {
    u_hat_ = forward_transform(u);
    signals_ = evaluate_signals(u, params_);
  }

  double drift_speed() const { return signals_.drift_speed; }

  Field advance(double dt) const {
    const Grid& g = u_hat_.grid;
    SpectralField next(g);
    for_each_mode(g, [&](std::size_t i, const int*, const double* k) {
      next.coefficients[i] = (u_hat_.coefficients[i] + dt * signals_.drift_hat.coefficients[i]) /
                             (1.0 + dt * squared_wavenumber(g, k));
    });
    // The drift has no zero mode; keep the mean bit-exact.
    next.coefficients[0] = u_hat_.coefficients[0];
    return inverse_transform(next);
  }

 private:
  ModelParams params_;
  SpectralField u_hat_;
  SignalState signals_;
};

inline Field step_imex(const Field& u, const ModelParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_imex: dt must be positive");
  ImexStepper stepper(params);
  stepper.load(u);
  Field next = stepper.advance(dt);
  if (!next.all_finite()) throw NonFiniteError("step_imex: non-finite density after step");
  return next;
}

/// Default step bound 0.25 h^2 / (2N).
inline double default_dt(const Grid& g) {
  return 0.25 * g.spacing() * g.spacing() / (2.0 * g.dim());
}

/// Evaluate every monitored quantity for one state.
inline TraceRow make_trace_row(const Field& u, const ModelParams& params,
                               const std::vector<double>& norm_ps, double r, double t,
                               long step) {
  TraceRow row;
  row.t = t;
  row.step = step;
  row.mass = integral(u);
  row.min_u = min_value(u);
  const RhsResult rhs = assemble_rhs(u, params);
  for (double p : norm_ps) {
    row.u_lp.push_back(lp_norm(u, p));
    row.v_lp.push_back(lp_norm(rhs.v, p));
    row.w_lp.push_back(lp_norm(rhs.w, p));
  }
  row.grad_v_sup = sup_norm(spectral_gradient(rhs.v));
  row.grad_w_sup = sup_norm(spectral_gradient(rhs.w));
  try {
    row.energy_residual = energy_identity_residual(u, rhs.v, rhs.w, rhs.dudt, params, r);
  } catch (const std::invalid_argument&) {
    row.energy_residual = std::nan("");
  }
  row.tail_mass_fraction = tail_mass_fraction(u);
  return row;
}

struct SimulationResult {
  Field final;
  NormTrace trace;
  long steps = 0;
  double final_time = 0.0;
  double blowup_threshold = 0.0;
};

/// Advance u0 to ctrl.t_end, recording a trace row every ctrl.cadence
/// accepted steps (plus t = 0). A step whose sup-norm more than doubles, or
/// that produces non-finite values, is retried with dt halved up to 10
/// times; exhausting the retries ends the run with BlowUp (or NonFinite).
/// Abnormal termination appends the state at the stopping time as a final row.
inline SimulationResult run_simulation(const Field& u0, const ModelParams& params,
                                       const StepControl& ctrl,
                                       const std::vector<double>& norm_ps = standard_norm_ps()) {
  ctrl.validate();
  params.validate();
  if (!u0.all_finite()) throw std::invalid_argument("run_simulation: initial data not finite");
  const double sup0 = sup_norm(u0);
  if (min_value(u0) < -1e-12 * std::max(1.0, sup0))
    throw std::invalid_argument("run_simulation: initial data must be non-negative");

  const Grid& g = u0.grid;
  const double h = g.spacing();
  const double base_dt = ctrl.dt ? *ctrl.dt : default_dt(g);
  const std::vector<double> ps = merged_norm_ps(norm_ps);

  SimulationResult res;
  res.trace.norm_ps = ps;
  res.blowup_threshold = ctrl.blowup_threshold ? *ctrl.blowup_threshold
                                               : (sup0 > 0.0 ? 1e6 * sup0 : kInf);
  Field u = u0;
  double t = 0.0;
  long steps = 0;
  auto record = [&] { res.trace.rows.push_back(make_trace_row(u, params, ps, ctrl.energy_r, t, steps)); };
  auto finish = [&](StatusKind kind) {
    res.trace.status = {kind, t};
    if (res.trace.rows.back().step != steps) record();
  };
  record();

  ImexStepper stepper(params);
  stepper.load(u);
  const double t_stop = ctrl.t_end * (1.0 - 1e-12);
  bool terminated = false;
  while (t < t_stop) {
    if (steps >= ctrl.max_steps) {
      finish(StatusKind::StepLimit);
      terminated = true;
      break;
    }
    double dt = std::min(base_dt, ctrl.t_end - t);
    if (stepper.drift_speed() > 0.0)
      dt = std::min(dt, ctrl.cfl_safety * h / stepper.drift_speed());

    const double sup_old = sup_norm(u);
    Field candidate;
    bool accepted = false;
    bool last_nonfinite = false;
    for (int attempt = 0; attempt <= 10; ++attempt) {
      candidate = stepper.advance(dt);
      last_nonfinite = !candidate.all_finite();
      if (!last_nonfinite && !(sup_old > 0.0 && sup_norm(candidate) > 2.0 * sup_old)) {
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (!accepted) {
      finish(last_nonfinite ? StatusKind::NonFinite : StatusKind::BlowUp);
      terminated = true;
      break;
    }
    u = std::move(candidate);
    t += dt;
    ++steps;

    const double sup_new = sup_norm(u);
    if (sup_new > res.blowup_threshold) {
      finish(StatusKind::BlowUp);
      terminated = true;
      break;
    }
    if (ctrl.positivity_guard && min_value(u) < -1e-6 * sup_new) {
      finish(StatusKind::ResolutionError);
      terminated = true;
      break;
    }
    stepper.load(u);
    if (steps % ctrl.cadence == 0) record();
  }
  if (!terminated) res.trace.status = {StatusKind::Completed, 0.0};
  res.final = std::move(u);
  res.steps = steps;
  res.final_time = t;
  return res;
}

enum class PicardStatus { Converged, MaxIterations, NoContraction };

inline const char* to_string(PicardStatus s) {
  switch (s) {
    case PicardStatus::Converged: return "Converged";
    case PicardStatus::MaxIterations: return "MaxIterations";
    case PicardStatus::NoContraction: return "NoContraction";
  }
  return "?";
}

struct PicardRecord {
  double horizon = 0.0;
  int iterate_count = 0;
  /// max over the time mesh of ||u^{k+1} - u^k||_1 + ||u^{k+1} - u^k||_inf
  std::vector<double> successive_diffs;
  /// Largest observed diffs[k+1] / diffs[k] for k >= 1.
  double contraction_ratio = 0.0;
  PicardStatus status = PicardStatus::Converged;
  Field at_horizon;
};

/// Discrete mild-solution map on the uniform mesh t_i = i T / (time_nodes - 1):
///   (Ku)(t_i) = T(t_i) u0 + sum_j w_ij T(t_i - s_j) [D(u(s_j)) + u(s_j)],
/// where T(t) = e^{t(Delta - I)}, D(u) = div(-xi1 u grad v + xi2 u grad w)
/// and w_ij are trapezoidal weights on [0, t_i]. Iteration starts from
/// u(t) = T(t) u0 and stops once the difference drops below
/// tol * (||u0||_1 + ||u0||_inf).
inline PicardRecord picard_iterate(const Field& u0, const ModelParams& params, double horizon,
                                   int time_nodes, int max_iters, double tol = 1e-12) {
  if (!(horizon > 0.0)) throw std::invalid_argument("picard_iterate: horizon must be positive");
  if (time_nodes < 16) throw std::invalid_argument("picard_iterate: time_nodes must be >= 16");
  if (max_iters < 1) throw std::invalid_argument("picard_iterate: max_iters must be >= 1");
  params.validate();

  const Grid& g = u0.grid;
  const int intervals = time_nodes - 1;
  const double ds = horizon / intervals;
  const std::size_t S = g.spectral_size();

  // propagators[d] = e^{-d ds (|k|^2 + 1)}
  std::vector<std::vector<double>> propagators(intervals + 1, std::vector<double>(S));
  for (int d = 0; d <= intervals; ++d) {
    for_each_mode(g, [&](std::size_t i, const int*, const double* k) {
      propagators[d][i] = std::exp(-d * ds * (squared_wavenumber(g, k) + 1.0));
    });
  }

  const SpectralField u0_hat = forward_transform(u0);
  std::vector<Field> iterate;
  iterate.reserve(time_nodes);
  for (int i = 0; i <= intervals; ++i) {
    SpectralField F = u0_hat;
    for (std::size_t m = 0; m < S; ++m) F.coefficients[m] *= propagators[i][m];
    iterate.push_back(inverse_transform(F));
  }

  const double scale = lp_norm(u0, 1.0) + sup_norm(u0);
  PicardRecord rec;
  rec.horizon = horizon;
  rec.status = PicardStatus::MaxIterations;
  int growth_streak = 0;

  for (int it = 0; it < max_iters; ++it) {
    std::vector<SpectralField> source;
    source.reserve(time_nodes);
    for (const auto& uj : iterate) {
      SpectralField gj = evaluate_signals(uj, params).drift_hat;
      const SpectralField uh = forward_transform(uj);
      for (std::size_t m = 0; m < S; ++m) gj.coefficients[m] += uh.coefficients[m];
      source.push_back(std::move(gj));
    }

    std::vector<Field> next;
    next.reserve(time_nodes);
    double diff = 0.0;
    for (int i = 0; i <= intervals; ++i) {
      SpectralField acc(g);
      for (std::size_t m = 0; m < S; ++m)
        acc.coefficients[m] = propagators[i][m] * u0_hat.coefficients[m];
      for (int j = 0; j <= i && i > 0; ++j) {
        const double w = (j == 0 || j == i) ? 0.5 * ds : ds;
        const auto& prop = propagators[i - j];
        const auto& src = source[j].coefficients;
        for (std::size_t m = 0; m < S; ++m) acc.coefficients[m] += w * prop[m] * src[m];
      }
      Field ui = inverse_transform(acc);
      Field delta(g);
      for (std::size_t m = 0; m < ui.size(); ++m) delta[m] = ui[m] - iterate[i][m];
      diff = std::max(diff, lp_norm(delta, 1.0) + sup_norm(delta));
      next.push_back(std::move(ui));
    }
    iterate = std::move(next);
    rec.iterate_count = it + 1;
    rec.successive_diffs.push_back(diff);

    const std::size_t nd = rec.successive_diffs.size();
    if (!std::isfinite(diff)) {
      rec.status = PicardStatus::NoContraction;
      break;
    }
    if (nd >= 2 && diff > rec.successive_diffs[nd - 2]) {
      if (++growth_streak >= 3) {
        rec.status = PicardStatus::NoContraction;
        break;
      }
    } else {
      growth_streak = 0;
    }
    if (diff <= tol * scale) {
      rec.status = PicardStatus::Converged;
      break;
    }
  }

  const auto& d = rec.successive_diffs;
  double ratio = 0.0;
  bool have_ratio = false;
  for (std::size_t k = 1; k + 1 < d.size(); ++k) {
    if (d[k] > 0.0) {
      ratio = std::max(ratio, d[k + 1] / d[k]);
      have_ratio = true;
    }
  }
  if (!have_ratio && d.size() >= 2 && d[0] > 0.0) ratio = d[1] / d[0];
  rec.contraction_ratio = ratio;
  rec.at_horizon = iterate.back();
  return rec;
}

inline constexpr int kDefaultPicardNodes = 65;
inline constexpr int kDefaultPicardIters = 60;

/// Sup-norm gap at t = horizon between the IMEX run (dt = horizon / 2048)
/// and the converged Picard fixed point.
inline double cross_validate(const Field& u0, const ModelParams& params, double horizon,
                             int time_nodes = kDefaultPicardNodes) {
  StepControl ctrl;
  ctrl.dt = horizon / 2048.0;
  ctrl.t_end = horizon;
  ctrl.cadence = 1L << 40;
  ctrl.cfl_safety = 1.0;
  const SimulationResult sim = run_simulation(u0, params, ctrl);
  if (!sim.trace.status.completed())
    throw std::runtime_error("cross_validate: IMEX run ended with " + sim.trace.status.describe());
  const PicardRecord pic = picard_iterate(u0, params, horizon, time_nodes, kDefaultPicardIters);
  if (pic.status == PicardStatus::NoContraction)
    throw std::runtime_error("cross_validate: Picard iteration does not contract at horizon " +
                             std::to_string(horizon));
  Field delta(u0.grid);
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = sim.final[i] - pic.at_horizon[i];
  return sup_norm(delta);
}

}  // namespace kschemo
