#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "kschemo/elliptic.hpp"
#include "kschemo/grid.hpp"
#include "kschemo/spectral.hpp"

namespace kschemo {

/// Coefficients of the attraction-repulsion system
///   u_t = div(grad u - xi1 u grad v + xi2 u grad w)
///   0 = Delta v - lambda1 v + f1(u),  0 = Delta w - lambda2 w + f2(u)
/// with productions f1(s) = c1 s^l, f2(s) = c2 s^m.
struct ModelParams {
  double xi1 = 1.0;
  double xi2 = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double l = 1.0;
  double m = 1.0;
  int dim = 2;

  /// Throws std::invalid_argument naming the first offending field.
  /// Sensitivities may be zero when allow_zero_sensitivity is set, which is
  /// how pure-diffusion reference runs are expressed.
  void validate(bool allow_zero_sensitivity = true) const {
    auto positive = [](double x, const char* name) {
      if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument(std::string("params.") + name + " must be positive");
    };
    auto nonneg = [](double x, const char* name) {
      if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument(std::string("params.") + name + " must be non-negative");
    };
    if (allow_zero_sensitivity) {
      nonneg(xi1, "xi1");
      nonneg(xi2, "xi2");
    } else {
      positive(xi1, "xi1");
      positive(xi2, "xi2");
    }
    positive(lambda1, "lambda1");
    positive(lambda2, "lambda2");
    positive(c1, "c1");
    positive(c2, "c2");
    positive(l, "l");
    positive(m, "m");
    if (dim < 1 || dim > 3) throw std::invalid_argument("params.dim must be 1, 2 or 3");
  }
};

// Negative densities are numerical noise; production is clamped to zero there.
inline double production(double s, double scale, double exponent) {
  if (!(s > 0.0)) return 0.0;
  if (exponent == 1.0) return scale * s;
  if (exponent == 2.0) return scale * s * s;
  return scale * std::pow(s, exponent);
}

inline double f1_eval(double s, const ModelParams& p) { return production(s, p.c1, p.l); }
inline double f2_eval(double s, const ModelParams& p) { return production(s, p.c2, p.m); }

enum class RegimeTag { BoundedA, BoundedB, Uncovered };

inline const char* to_string(RegimeTag t) {
  switch (t) {
    case RegimeTag::BoundedA: return "BoundedA";
    case RegimeTag::BoundedB: return "BoundedB";
    case RegimeTag::Uncovered: return "Uncovered";
  }
  return "?";
}

inline RegimeTag regime_from_string(const std::string& s) {
  if (s == "BoundedA") return RegimeTag::BoundedA;
  if (s == "BoundedB") return RegimeTag::BoundedB;
  if (s == "Uncovered") return RegimeTag::Uncovered;
  throw std::invalid_argument("unknown regime tag '" + s + "'");
}

struct Regime {
  RegimeTag tag = RegimeTag::Uncovered;
  std::string detail;
};

/// Global-boundedness regimes for the production exponents:
///   A: l > 2/N, m >= 1, l < m
///   B: l = m < 2/N
/// Equalities are tested with a 1e-12 relative tolerance so that inputs such
/// as l = 0.6666666666667 for N = 3 land on the critical value.
inline Regime classify_regime(const ModelParams& p) {
  const double crit = 2.0 / p.dim;
  auto eq = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  const bool l_eq_crit = eq(p.l, crit);
  const bool l_above = p.l > crit && !l_eq_crit;
  const bool l_below = p.l < crit && !l_eq_crit;
  const bool l_eq_m = eq(p.l, p.m);
  const bool m_ge_1 = p.m >= 1.0 || eq(p.m, 1.0);

  std::ostringstream why;
  why << "N=" << p.dim << ", 2/N=" << crit << ", l=" << p.l << ", m=" << p.m << ": ";
  Regime r;
  if (l_above && m_ge_1 && p.l < p.m && !l_eq_m) {
    r.tag = RegimeTag::BoundedA;
    why << "l > 2/N, m >= 1 and l < m";
  } else if (l_eq_m && l_below) {
    r.tag = RegimeTag::BoundedB;
    why << "l = m < 2/N";
  } else {
    r.tag = RegimeTag::Uncovered;
    if (l_eq_m) {
      why << "l = m but l " << (l_eq_crit ? "= 2/N (critical)" : "> 2/N");
    } else if (!l_above) {
      why << "l " << (l_eq_crit ? "= 2/N" : "< 2/N") << " with l != m";
    } else if (!m_ge_1) {
      why << "m < 1";
    } else {
      why << "l > m";
    }
  }
  r.detail = why.str();
  return r;
}

/// Signal fields and chemotactic drift for one density snapshot.
struct SignalState {
  SpectralField v_hat;
  SpectralField w_hat;
  /// div(-xi1 u grad v + xi2 u grad w), dealiased; zero mode exactly 0.
  SpectralField drift_hat;
  /// ||grad(xi2 w - xi1 v)||_inf, the advective speed.
  double drift_speed = 0.0;
};

inline SpectralField production_hat(const Field& u, double scale, double exponent) {
  Field f(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) f.values[i] = production(u.values[i], scale, exponent);
  SpectralField F = forward_transform(f);
  dealias_in_place(F);
  return F;
}

/// The flux -xi1 u grad v + xi2 u grad w equals u grad(phi) with
/// phi = xi2 w - xi1 v, so a single potential gradient is formed.
inline SignalState evaluate_signals(const Field& u, const ModelParams& p) {
  const Grid& g = u.grid;
  SignalState s;
  s.v_hat = production_hat(u, p.c1, p.l);
  helmholtz_solve_in_place(s.v_hat, p.lambda1);
  s.w_hat = production_hat(u, p.c2, p.m);
  helmholtz_solve_in_place(s.w_hat, p.lambda2);

  SpectralField phi_hat(g);
  for (std::size_t i = 0; i < phi_hat.size(); ++i)
    phi_hat.coefficients[i] = p.xi2 * s.w_hat.coefficients[i] - p.xi1 * s.v_hat.coefficients[i];

  std::vector<SpectralField> flux_hat;
  flux_hat.reserve(g.dim());
  Field speed2(g, 0.0);
  for (int a = 0; a < g.dim(); ++a) {
    Field dphi = inverse_transform(spectral_partial(phi_hat, a));
    for (std::size_t i = 0; i < dphi.size(); ++i) {
      speed2.values[i] += dphi.values[i] * dphi.values[i];
      dphi.values[i] *= u.values[i];
    }
    SpectralField F = forward_transform(dphi);
    dealias_in_place(F);
    flux_hat.push_back(std::move(F));
  }
  s.drift_speed = std::sqrt(sup_norm(speed2));
  s.drift_hat = spectral_divergence_hat(flux_hat);
  return s;
}

struct RhsResult {
  Field dudt;
  Field v;
  Field w;
};

/// Semi-discrete right-hand side: dudt = Lap u + div(-xi1 u grad v + xi2 u grad w).
inline RhsResult assemble_rhs(const Field& u, const ModelParams& p) {
  const Grid& g = u.grid;
  SignalState s = evaluate_signals(u, p);
  SpectralField U = forward_transform(u);
  for_each_mode(g, [&](std::size_t i, const int*, const double* k) {
    s.drift_hat.coefficients[i] -= squared_wavenumber(g, k) * U.coefficients[i];
  });
  s.drift_hat.coefficients[0] = 0.0;
  return {inverse_transform(s.drift_hat), inverse_transform(s.v_hat), inverse_transform(s.w_hat)};
}

}  // namespace kschemo
