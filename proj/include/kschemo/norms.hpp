#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kschemo/grid.hpp"
#include "kschemo/reduce.hpp"

namespace kschemo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// h^N * sum f
inline double integral(const Field& f) {
  return f.grid.cell_volume() *
         pairwise_sum(0, f.size(), [&](std::size_t i) { return f.values[i]; });
}

inline double sup_norm(const Field& f) {
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

inline double min_value(const Field& f) {
  double m = kInf;
  for (double x : f.values) m = std::min(m, x);
  return m;
}

/// Discrete L^p norm (h^N sum |f|^p)^(1/p); p = inf is the grid maximum.
inline double lp_norm(const Field& f, double p) {
  if (std::isnan(p) || p < 1.0)
    throw std::invalid_argument("lp_norm: p must be >= 1, got " + std::to_string(p));
  if (std::isinf(p)) return sup_norm(f);
  const double vol = f.grid.cell_volume();
  if (p == 1.0)
    return vol * pairwise_sum(0, f.size(), [&](std::size_t i) { return std::abs(f.values[i]); });
  if (p == 2.0)
    return std::sqrt(
        vol * pairwise_sum(0, f.size(), [&](std::size_t i) { return f.values[i] * f.values[i]; }));
  // Scale by the max to keep large p from overflowing.
  const double s = sup_norm(f);
  if (s == 0.0) return 0.0;
  const double sum = pairwise_sum(0, f.size(), [&](std::size_t i) {
    return std::pow(std::abs(f.values[i]) / s, p);
  });
  return s * std::pow(vol * sum, 1.0 / p);
}

/// L^p norm of the pointwise Euclidean magnitude of a vector field.
inline double lp_norm(const VectorField& F, double p) {
  if (F.empty()) throw std::invalid_argument("lp_norm: empty vector field");
  Field mag(F.front().grid);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    double s = 0.0;
    for (const auto& c : F) s += c.values[i] * c.values[i];
    mag.values[i] = std::sqrt(s);
  }
  return lp_norm(mag, p);
}

inline double sup_norm(const VectorField& F) { return lp_norm(F, kInf); }

}  // namespace kschemo
