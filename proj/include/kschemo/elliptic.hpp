#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "kschemo/grid.hpp"
#include "kschemo/norms.hpp"
#include "kschemo/spectral.hpp"

namespace kschemo {

inline void require_positive_lambda(double lambda, const char* where) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument(std::string(where) + ": lambda must be positive");
}

/// (lambda - Delta)^{-1} applied to spectral coefficients in place.
inline void helmholtz_solve_in_place(SpectralField& F, double lambda) {
  require_positive_lambda(lambda, "helmholtz_solve");
  const Grid& g = F.grid;
  for_each_mode(g, [&](std::size_t p, const int*, const double* k) {
    F.coefficients[p] /= lambda + squared_wavenumber(g, k);
  });
}

/// Solve lambda v - Delta v = f on the torus.
inline Field helmholtz_solve(const Field& f, double lambda) {
  require_positive_lambda(lambda, "helmholtz_solve");
  SpectralField F = forward_transform(f);
  helmholtz_solve_in_place(F, lambda);
  return inverse_transform(F);
}

namespace detail {

// 4-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 4> kGaussNodes = {
    -0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

}  // namespace detail

/// Resolvent via its heat-kernel time integral,
///   (lambda - Delta)^{-1} f = int_0^inf e^{-lambda s} e^{s Delta} f ds.
///
/// With s = -log(1 - tau)/lambda the integral becomes
///   (1/lambda) int_0^1 e^{s(tau) Delta} f dtau,
/// evaluated by composite 4-point Gauss-Legendre on quad_steps equal panels.
/// Each node calls apply_heat_semigroup in physical space, so this path
/// shares no multiplier code with helmholtz_solve.
inline Field bessel_potential_apply(const Field& f, double lambda, int quad_steps = 256) {
  require_positive_lambda(lambda, "bessel_potential_apply");
  if (quad_steps < 32)
    throw std::invalid_argument("bessel_potential_apply: quad_steps must be >= 32, got " +
                                std::to_string(quad_steps));
  Field acc(f.grid, 0.0);
  const double panel = 1.0 / quad_steps;
  for (int q = 0; q < quad_steps; ++q) {
    const double mid = (q + 0.5) * panel;
    for (std::size_t node = 0; node < detail::kGaussNodes.size(); ++node) {
      const double tau = mid + 0.5 * panel * detail::kGaussNodes[node];
      const double s = -std::log1p(-tau) / lambda;
      const double w = 0.5 * panel * detail::kGaussWeights[node] / lambda;
      const Field heat = apply_heat_semigroup(f, s, 0.0);
      for (std::size_t i = 0; i < acc.size(); ++i) acc.values[i] += w * heat.values[i];
    }
  }
  return acc;
}

struct ResolventReport {
  double lambda = 0.0;
  double sup_ratio = 0.0;   // ||(lambda-Delta)^{-1}u||_inf * lambda / ||u||_inf
  double grad_ratio = 0.0;  // ||grad (lambda-Delta)^{-1}u||_inf * sqrt(lambda) / (sqrt(N) ||u||_inf)
  int sample_count = 0;

  bool within_bounds(double tol = 1e-9) const {
    return sup_ratio <= 1.0 + tol && grad_ratio <= 1.0 + tol;
  }
};

/// Worst-case sup and gradient ratios of the resolvent over the samples.
/// Zero samples contribute nothing (both ratios are 0/0).
inline ResolventReport verify_resolvent_bounds(const std::vector<Field>& samples, double lambda) {
  require_positive_lambda(lambda, "verify_resolvent_bounds");
  if (samples.empty()) throw std::invalid_argument("verify_resolvent_bounds: no samples");
  const Grid& g = samples.front().grid;
  ResolventReport rep;
  rep.lambda = lambda;
  for (const auto& u : samples) {
    require_same_grid(g, u.grid, "verify_resolvent_bounds");
    const double unorm = sup_norm(u);
    ++rep.sample_count;
    if (unorm == 0.0) continue;
    SpectralField V = forward_transform(u);
    helmholtz_solve_in_place(V, lambda);
    const Field v = inverse_transform(V);
    const VectorField grad = spectral_gradient(V);
    rep.sup_ratio = std::max(rep.sup_ratio, sup_norm(v) * lambda / unorm);
    rep.grad_ratio = std::max(rep.grad_ratio, sup_norm(grad) * std::sqrt(lambda) /
                                                  (std::sqrt(double(g.dim())) * unorm));
  }
  return rep;
}

}  // namespace kschemo
