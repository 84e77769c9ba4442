#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "kschemo/grid.hpp"
#include "kschemo/norms.hpp"
#include "kschemo/spectral.hpp"

namespace kschemo {

/// amplitude * exp(-|x - center|^2 / (2 width^2)), no periodic images.
inline Field gaussian(const Grid& g, double amplitude, double width,
                      const std::vector<double>& center = {}) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian: width must be positive");
  return sample_field(g, [&](const double* x) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double c = a < static_cast<int>(center.size()) ? center[a] : 0.0;
      r2 += (x[a] - c) * (x[a] - c);
    }
    return amplitude * std::exp(-0.5 * r2 / (width * width));
  });
}

/// Rescale f so its discrete integral equals mass.
inline Field with_mass(Field f, double mass) {
  const double current = integral(f);
  if (current == 0.0) throw std::invalid_argument("with_mass: field has zero integral");
  const double s = mass / current;
  for (double& x : f.values) x *= s;
  return f;
}

/// Keep only modes with every |j_a| <= max_index; Nyquist is always removed.
inline SpectralField band_limit(SpectralField F, int max_index) {
  const Grid& g = F.grid;
  for_each_mode(g, [&](std::size_t p, const int* idx, const double*) {
    for (int a = 0; a < g.dim(); ++a) {
      if (std::abs(idx[a]) > max_index || std::abs(idx[a]) == g.points_per_axis() / 2) {
        F.coefficients[p] = 0.0;
        return;
      }
    }
  });
  return F;
}

/// Random real field with Gaussian Fourier coefficients on |j_a| <= max_index
/// (default n/4), normalized to sup-norm 1. Deterministic for a given engine
/// state.
inline Field band_limited_random(const Grid& g, std::mt19937_64& rng, int max_index = -1,
                                 bool zero_mean = false) {
  if (max_index < 0) max_index = g.points_per_axis() / 4;
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField F(g);
  for (auto& c : F.coefficients) {
    const double re = normal(rng);
    const double im = normal(rng);
    c = {re, im};
  }
  F = band_limit(std::move(F), max_index);
  if (zero_mean) F.coefficients[0] = 0.0;
  // Round-trip through physical space to restore conjugate symmetry.
  Field f = inverse_transform(F);
  f = inverse_transform(band_limit(forward_transform(f), max_index));
  if (zero_mean) {
    SpectralField G = forward_transform(f);
    G.coefficients[0] = 0.0;
    f = inverse_transform(G);
  }
  const double s = sup_norm(f);
  if (s > 0.0)
    for (double& x : f.values) x /= s;
  return f;
}

inline std::vector<Field> band_limited_samples(const Grid& g, std::uint64_t seed, int count,
                                               int max_index = -1) {
  std::mt19937_64 rng(seed);
  std::vector<Field> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(band_limited_random(g, rng, max_index));
  return out;
}

inline std::vector<VectorField> band_limited_vector_samples(const Grid& g, std::uint64_t seed,
                                                            int count, int max_index = -1) {
  std::mt19937_64 rng(seed);
  std::vector<VectorField> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    VectorField F;
    for (int a = 0; a < g.dim(); ++a) F.push_back(band_limited_random(g, rng, max_index));
    out.push_back(std::move(F));
  }
  return out;
}

/// Gradient of the periodized Gaussian with Fourier symbol
/// exp(-width^2 |k|^2 / 2 - i k.center), scaled to unit L2 norm.
inline VectorField gaussian_gradient(const Grid& g, double width, const std::vector<double>& center) {
  SpectralField G(g);
  for_each_mode(g, [&](std::size_t p, const int*, const double* k) {
    double phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) phase -= k[a] * center[a];
    G.coefficients[p] = std::exp(-0.5 * width * width * squared_wavenumber(g, k)) *
                        std::complex<double>(std::cos(phase), std::sin(phase));
  });
  VectorField F = spectral_gradient(G);
  const double s = lp_norm(F, 2.0);
  if (s > 0.0)
    for (auto& c : F)
      for (double& x : c.values) x /= s;
  return F;
}

/// Probe set for smoothing estimates: even entries are band-limited random
/// fields, odd entries gradients of localized bumps with random centre and
/// width log-uniform in [2h, L/2]. Prefixes agree across counts.
inline std::vector<VectorField> smoothing_probe_samples(const Grid& g, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::mt19937_64 bump_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w_lo = 2.0 * g.spacing(), w_hi = 0.5 * g.half_length();
  std::vector<VectorField> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (i % 2 == 0) {
      VectorField F;
      for (int a = 0; a < g.dim(); ++a) F.push_back(band_limited_random(g, rng));
      out.push_back(std::move(F));
    } else {
      const double width = w_lo * std::pow(w_hi / w_lo, unit(bump_rng));
      std::vector<double> c(g.dim());
      for (double& x : c) x = g.half_length() * (2.0 * unit(bump_rng) - 1.0);
      out.push_back(gaussian_gradient(g, width, c));
    }
  }
  return out;
}

}  // namespace kschemo
