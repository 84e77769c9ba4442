#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>

namespace kschemo {

/// Time-stepping controls. dt is the largest step the integrator may take;
/// the advective CFL limit can only shrink it. An unset dt means the
/// diffusive default 0.25 h^2 / (2N).
struct StepControl {
  std::optional<double> dt;
  double t_end = 1.0;
  double cfl_safety = 0.5;
  long max_steps = 10'000'000;
  /// Absolute sup-norm cap; unset means 1e6 x the initial sup-norm.
  std::optional<double> blowup_threshold;
  /// Record diagnostics every cadence accepted steps.
  long cadence = 10;
  /// Abort with ResolutionError when min u < -1e-6 ||u||_inf.
  bool positivity_guard = false;
  /// Energy-identity exponent recorded in the trace.
  double energy_r = 2.0;

  void validate() const {
    if (!(t_end > 0.0) || !std::isfinite(t_end))
      throw std::invalid_argument("control.t_end must be positive");
    if (dt && (!(*dt > 0.0) || !std::isfinite(*dt)))
      throw std::invalid_argument("control.dt must be positive");
    if (dt && *dt > t_end) throw std::invalid_argument("control.dt must not exceed control.t_end");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
      throw std::invalid_argument("control.cfl_safety must lie in (0, 1]");
    if (max_steps < 1) throw std::invalid_argument("control.max_steps must be >= 1");
    if (dt && static_cast<double>(max_steps) * *dt < t_end * (1.0 - 1e-12))
      throw std::invalid_argument("control.max_steps * control.dt must reach control.t_end");
    if (blowup_threshold && !(*blowup_threshold > 0.0))
      throw std::invalid_argument("control.blowup_threshold must be positive");
    if (cadence < 1) throw std::invalid_argument("output.cadence must be >= 1");
    if (!(energy_r >= 2.0)) throw std::invalid_argument("energy r must be >= 2");
  }
};

enum class StatusKind { Completed, BlowUp, NonFinite, ResolutionError, StepLimit };

inline const char* to_string(StatusKind k) {
  switch (k) {
    case StatusKind::Completed: return "Completed";
    case StatusKind::BlowUp: return "BlowUp";
    case StatusKind::NonFinite: return "NonFinite";
    case StatusKind::ResolutionError: return "ResolutionError";
    case StatusKind::StepLimit: return "StepLimit";
  }
  return "?";
}

struct RunStatus {
  StatusKind kind = StatusKind::Completed;
  double time = 0.0;  // time of the event for non-Completed kinds

  bool completed() const { return kind == StatusKind::Completed; }
  std::string describe() const {
    if (kind == StatusKind::Completed) return "Completed";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s(t=%.6g)", to_string(kind), time);
    return buf;
  }
};

}  // namespace kschemo
