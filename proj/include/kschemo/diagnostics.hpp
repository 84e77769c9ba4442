#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "kschemo/control.hpp"
#include "kschemo/grid.hpp"
#include "kschemo/model.hpp"
#include "kschemo/norms.hpp"
#include "kschemo/reduce.hpp"
#include "kschemo/spectral.hpp"

namespace kschemo {

/// Norm exponents that always appear in a trace (the CSV columns).
inline const std::vector<double>& standard_norm_ps() {
  static const std::vector<double> ps = {1.0, 2.0, 4.0, kInf};
  return ps;
}

struct TraceRow {
  double t = 0.0;
  long step = 0;
  double mass = 0.0;  // h^N sum u (signed)
  double min_u = 0.0;
  std::vector<double> u_lp;  // indexed like NormTrace::norm_ps
  std::vector<double> v_lp;
  std::vector<double> w_lp;
  double grad_v_sup = 0.0;
  double grad_w_sup = 0.0;
  double energy_residual = 0.0;
  double tail_mass_fraction = 0.0;
};

/// Time series of monitored quantities; one row per recorded step.
struct NormTrace {
  std::vector<double> norm_ps = standard_norm_ps();
  std::vector<TraceRow> rows;
  RunStatus status;

  std::size_t p_index(double p) const {
    for (std::size_t i = 0; i < norm_ps.size(); ++i)
      if (norm_ps[i] == p) return i;
    throw std::out_of_range("norm p=" + std::to_string(p) + " not recorded");
  }
  std::vector<double> times() const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.t);
    return out;
  }
  std::vector<double> u_norm(double p) const {
    const std::size_t k = p_index(p);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.u_lp[k]);
    return out;
  }
};

/// Standard exponents followed by any extra configured ones, deduplicated.
inline std::vector<double> merged_norm_ps(const std::vector<double>& extra) {
  std::vector<double> ps = standard_norm_ps();
  for (double p : extra) {
    if (std::isnan(p) || p < 1.0)
      throw std::invalid_argument("output.norm_ps entries must be >= 1");
    if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
  }
  return ps;
}

/// Fraction of the total mass lying in |x|_inf > L/2. Points exactly on the
/// cut get weight 1/2 per axis, so a constant field yields 1 - 2^-N exactly.
inline double tail_mass_fraction(const Field& u) {
  const Grid& g = u.grid;
  const double half = 0.5 * g.half_length();
  std::vector<double> axis_w(g.points_per_axis());
  for (int i = 0; i < g.points_per_axis(); ++i) {
    const double ax = std::abs(g.coordinate(i));
    axis_w[i] = ax < half ? 1.0 : (ax == half ? 0.5 : 0.0);
  }
  int idx[3];
  const double total = pairwise_sum(0, u.size(), [&](std::size_t i) { return u.values[i]; });
  if (total == 0.0) return 0.0;
  const double inside = pairwise_sum(0, u.size(), [&](std::size_t i) {
    g.real_indices(i, idx);
    double w = 1.0;
    for (int a = 0; a < g.dim(); ++a) w *= axis_w[idx[a]];
    return w * u.values[i];
  });
  return (total - inside) / total;
}

namespace detail {

inline bool is_integer(double x) { return std::floor(x) == x; }

}  // namespace detail

/// |LHS - RHS| of the L^r balance
///   int u^{r-1} u_t = -(4(r-1)/r^2) int |grad u^{r/2}|^2
///                     - (xi1 (r-1) lambda1 / r) int v u^r + (xi1 (r-1)/r) int f1(u) u^r
///                     + (xi2 (r-1) lambda2 / r) int w u^r - (xi2 (r-1)/r) int f2(u) u^r
/// evaluated on the semi-discrete state (u, v, w, dudt).
inline double energy_identity_residual(const Field& u, const Field& v, const Field& w,
                                       const Field& dudt, const ModelParams& p, double r) {
  if (!(r >= 2.0)) throw std::invalid_argument("energy_identity_residual: r must be >= 2");
  const Grid& g = u.grid;
  require_same_grid(g, v.grid, "energy_identity_residual");
  require_same_grid(g, w.grid, "energy_identity_residual");
  require_same_grid(g, dudt.grid, "energy_identity_residual");

  const bool integer_powers = detail::is_integer(r) && detail::is_integer(r / 2.0);
  const double scale = sup_norm(u);
  if (!integer_powers && min_value(u) < -1e-8 * scale)
    throw std::invalid_argument(
        "energy_identity_residual: negative density with fractional powers");
  auto pw = [&](double x, double e) {
    if (integer_powers) return std::pow(x, e);
    return x > 0.0 ? std::pow(x, e) : 0.0;
  };

  const double vol = g.cell_volume();
  auto integrate = [&](auto&& term) { return vol * pairwise_sum(0, u.size(), term); };

  const double lhs = integrate([&](std::size_t i) { return pw(u[i], r - 1.0) * dudt[i]; });

  Field half_power(g);
  for (std::size_t i = 0; i < u.size(); ++i) half_power[i] = pw(u[i], r / 2.0);
  const VectorField grad = spectral_gradient(half_power);
  const double dissipation = integrate([&](std::size_t i) {
    double s = 0.0;
    for (const auto& c : grad) s += c[i] * c[i];
    return s;
  });
  const double attract =
      integrate([&](std::size_t i) { return (f1_eval(u[i], p) - p.lambda1 * v[i]) * pw(u[i], r); });
  const double repel =
      integrate([&](std::size_t i) { return (f2_eval(u[i], p) - p.lambda2 * w[i]) * pw(u[i], r); });

  const double a = (r - 1.0) / r;
  const double rhs = -(4.0 * (r - 1.0) / (r * r)) * dissipation + p.xi1 * a * attract - p.xi2 * a * repel;
  return std::abs(lhs - rhs);
}

/// Post-hoc classification of a recorded trace: the first non-finite sup-norm
/// gives NonFinite, the first sup-norm above the threshold gives BlowUp.
/// An unset threshold means 1e6 x the first recorded sup-norm.
inline RunStatus detect_blowup(const NormTrace& trace, const StepControl& ctrl) {
  if (trace.rows.empty()) throw std::invalid_argument("detect_blowup: empty trace");
  const std::size_t k = trace.p_index(kInf);
  const double threshold =
      ctrl.blowup_threshold ? *ctrl.blowup_threshold : 1e6 * trace.rows.front().u_lp[k];
  for (const auto& row : trace.rows) {
    const double s = row.u_lp[k];
    if (!std::isfinite(s) || !std::isfinite(row.mass)) return {StatusKind::NonFinite, row.t};
    if (threshold > 0.0 && s > threshold) return {StatusKind::BlowUp, row.t};
  }
  return {StatusKind::Completed, 0.0};
}

/// Largest ratio (max over t > t_split) / (max over t <= t_split) across
/// the monitored norms: u in every recorded L^p, sup of v and w, and the
/// signal gradient sup-norms. A norm that vanishes on both halves counts as 0.
inline double plateau_ratio(const NormTrace& trace, double t_split) {
  if (trace.rows.empty()) return 0.0;
  std::vector<std::vector<double>> series;
  for (std::size_t k = 0; k < trace.norm_ps.size(); ++k) {
    std::vector<double> s;
    for (const auto& r : trace.rows) s.push_back(r.u_lp[k]);
    series.push_back(std::move(s));
  }
  const std::size_t kinf = trace.p_index(kInf);
  std::vector<double> vs, ws, gv, gw;
  for (const auto& r : trace.rows) {
    vs.push_back(r.v_lp[kinf]);
    ws.push_back(r.w_lp[kinf]);
    gv.push_back(r.grad_v_sup);
    gw.push_back(r.grad_w_sup);
  }
  series.push_back(vs);
  series.push_back(ws);
  series.push_back(gv);
  series.push_back(gw);

  double worst = 0.0;
  for (const auto& s : series) {
    double first = 0.0, second = 0.0;
    bool any_second = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!std::isfinite(s[i])) return kInf;
      if (trace.rows[i].t <= t_split) {
        first = std::max(first, s[i]);
      } else {
        second = std::max(second, s[i]);
        any_second = true;
      }
    }
    if (!any_second || second == 0.0) continue;
    if (first == 0.0) return kInf;
    worst = std::max(worst, second / first);
  }
  return worst;
}

enum class SemigroupEstimate { Decay, GradientSmoothing };

inline const char* to_string(SemigroupEstimate e) {
  return e == SemigroupEstimate::Decay ? "semigroup_decay" : "gradient_smoothing";
}

struct SemigroupReport {
  SemigroupEstimate estimate = SemigroupEstimate::Decay;
  double alpha = 0.0;  // Decay
  double p = 2.0;      // GradientSmoothing
  double q = 2.0;
  double lambda = 1.0;
  std::vector<double> times;   // times actually sampled
  std::vector<double> ratios;  // worst ratio over samples at each time
  double worst_constant = 0.0;
};

/// sup_{y>0} y^alpha e^{-y/2}: the bound on the decay ratio with delta = lambda/2.
inline double semigroup_decay_bound(double alpha) {
  if (alpha == 0.0) return 1.0;
  return std::pow(2.0 * alpha / std::exp(1.0), alpha);
}

/// Normalized operator ratio for A = -Delta + lambda and T(t) = e^{-tA}:
///   ratio(t) = ||A^alpha T(t) f||_2 / (t^{-alpha} e^{-delta t} ||f||_2), delta = lambda/2.
inline SemigroupReport verify_semigroup_decay(double alpha, double lambda,
                                              const std::vector<double>& time_grid,
                                              const std::vector<Field>& samples) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("verify_semigroup_decay: alpha must lie in [0, 1]");
  require_positive_lambda(lambda, "verify_semigroup_decay");
  if (time_grid.empty() || samples.empty())
    throw std::invalid_argument("verify_semigroup_decay: empty time grid or sample set");
  for (double t : time_grid)
    if (!(t > 0.0)) throw std::invalid_argument("verify_semigroup_decay: times must be positive");

  const double delta = 0.5 * lambda;
  SemigroupReport rep;
  rep.estimate = SemigroupEstimate::Decay;
  rep.alpha = alpha;
  rep.lambda = lambda;
  rep.times = time_grid;
  rep.ratios.assign(time_grid.size(), 0.0);

  for (const auto& f : samples) {
    const double fnorm = lp_norm(f, 2.0);
    if (fnorm == 0.0) continue;
    const SpectralField F = forward_transform(f);
    const Grid& g = f.grid;
    for (std::size_t it = 0; it < time_grid.size(); ++it) {
      const double t = time_grid[it];
      SpectralField G(g);
      for_each_mode(g, [&](std::size_t i, const int*, const double* k) {
        const double mu = squared_wavenumber(g, k) + lambda;
        G.coefficients[i] = F.coefficients[i] * std::pow(mu, alpha) * std::exp(-t * mu);
      });
      const double num = lp_norm(inverse_transform(G), 2.0);
      const double ratio = num * std::pow(t, alpha) * std::exp(delta * t) / fnorm;
      rep.ratios[it] = std::max(rep.ratios[it], ratio);
    }
  }
  rep.worst_constant = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  return rep;
}

/// Normalized smoothing ratio for T(t) = e^{t(Delta - I)}:
///   ratio(t) = ||T(t) div F||_q / (t^{-1/2 - (N/2)(1/p - 1/q)} e^{-t} ||F||_p).
/// Times below h^2 are not resolved by the grid and are skipped.
inline SemigroupReport verify_gradient_smoothing(double p, double q,
                                                 const std::vector<double>& time_grid,
                                                 const std::vector<VectorField>& samples) {
  if (std::isnan(p) || p < 1.0) throw std::invalid_argument("verify_gradient_smoothing: p must be >= 1");
  if (std::isnan(q) || q < p) throw std::invalid_argument("verify_gradient_smoothing: q must be >= p");
  if (time_grid.empty() || samples.empty())
    throw std::invalid_argument("verify_gradient_smoothing: empty time grid or sample set");
  const Grid& g = samples.front().front().grid;
  const double t_min = g.spacing() * g.spacing();
  const double inv_p = 1.0 / p;
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  const double beta = 0.5 + 0.5 * g.dim() * (inv_p - inv_q);

  SemigroupReport rep;
  rep.estimate = SemigroupEstimate::GradientSmoothing;
  rep.p = p;
  rep.q = q;
  for (double t : time_grid)
    if (t >= t_min) rep.times.push_back(t);
  if (rep.times.empty())
    throw std::invalid_argument("verify_gradient_smoothing: every time lies below t_min = h^2");
  rep.ratios.assign(rep.times.size(), 0.0);

  for (const auto& F : samples) {
    if (static_cast<int>(F.size()) != g.dim())
      throw std::invalid_argument("verify_gradient_smoothing: component count != dim");
    const double fnorm = lp_norm(F, p);
    if (fnorm == 0.0) continue;
    std::vector<SpectralField> hats;
    for (const auto& c : F) hats.push_back(forward_transform(c));
    const SpectralField D = spectral_divergence_hat(hats);
    for (std::size_t it = 0; it < rep.times.size(); ++it) {
      const double t = rep.times[it];
      SpectralField G = D;
      apply_heat_semigroup_in_place(G, t, 1.0);
      const double num = lp_norm(inverse_transform(G), q);
      const double ratio = num * std::pow(t, beta) * std::exp(t) / fnorm;
      rep.ratios[it] = std::max(rep.ratios[it], ratio);
    }
  }
  rep.worst_constant = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  return rep;
}

}  // namespace kschemo
