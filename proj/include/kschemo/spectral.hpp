#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "kschemo/grid.hpp"

namespace kschemo {

namespace detail {

// FFTW planning is not thread-safe; execution of an existing plan on fresh
// buffers is. Plans are created once per (dim, n, direction) and reused.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan forward(const Grid& g) { return get(g, true); }
  fftw_plan backward(const Grid& g) { return get(g, false); }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const Grid& g, bool forward) {
    const auto key = std::make_tuple(g.dim(), g.points_per_axis(), forward);
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int dims[3] = {g.points_per_axis(), g.points_per_axis(), g.points_per_axis()};
    RealBuffer real(g.size());
    ComplexBuffer spec(g.spectral_size());
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    fftw_plan plan =
        forward ? fftw_plan_dft_r2c(g.dim(), dims, real.data(), cplx, FFTW_ESTIMATE)
                : fftw_plan_dft_c2r(g.dim(), dims, cplx, real.data(), FFTW_ESTIMATE);
    if (!plan) throw std::runtime_error("fft: planner failed");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

inline bool is_nyquist(const Grid& g, int signed_idx) {
  return signed_idx == -g.points_per_axis() / 2 || signed_idx == g.points_per_axis() / 2;
}

}  // namespace detail

/// Visit every stored spectral mode: fn(offset, idx[], k[]) with idx the
/// signed per-axis indices and k the wavenumbers.
template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  int idx[3] = {0, 0, 0};
  double k[3] = {0.0, 0.0, 0.0};
  for (std::size_t p = 0; p < g.spectral_size(); ++p) {
    g.spectral_indices(p, idx);
    for (int a = 0; a < g.dim(); ++a) k[a] = g.wavenumber_of_index(idx[a]);
    fn(p, static_cast<const int*>(idx), static_cast<const double*>(k));
  }
}

inline double squared_wavenumber(const Grid& g, const double* k) {
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a) s += k[a] * k[a];
  return s;
}

inline SpectralField forward_transform(const Field& f) {
  const Grid& g = f.grid;
  if (f.values.size() != g.size())
    throw std::invalid_argument("forward_transform: field size does not match grid");
  SpectralField out(g);
  RealBuffer scratch(f.values);
  fftw_execute_dft_r2c(detail::PlanCache::instance().forward(g), scratch.data(),
                       reinterpret_cast<fftw_complex*>(out.coefficients.data()));
  return out;
}

inline Field inverse_transform(const SpectralField& F) {
  const Grid& g = F.grid;
  if (F.coefficients.size() != g.spectral_size())
    throw std::invalid_argument("inverse_transform: coefficient count does not match grid");
  ComplexBuffer scratch(F.coefficients);  // c2r overwrites its input
  Field out(g);
  fftw_execute_dft_c2r(detail::PlanCache::instance().backward(g),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.values.data());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (double& x : out.values) x *= scale;
  return out;
}

/// Two-thirds rule: zero every mode with some |j_a| > n/3.
inline void dealias_in_place(SpectralField& F) {
  const Grid& g = F.grid;
  const int n = g.points_per_axis();
  for_each_mode(g, [&](std::size_t p, const int* idx, const double*) {
    for (int a = 0; a < g.dim(); ++a) {
      if (3 * std::abs(idx[a]) > n) {
        F.coefficients[p] = 0.0;
        return;
      }
    }
  });
}

inline SpectralField dealias(SpectralField F) {
  dealias_in_place(F);
  return F;
}

/// Spectral derivative along one axis. The Nyquist coefficient of that axis
/// is dropped so the result stays real.
inline SpectralField spectral_partial(const SpectralField& F, int axis) {
  const Grid& g = F.grid;
  SpectralField out(g);
  for_each_mode(g, [&](std::size_t p, const int* idx, const double* k) {
    if (detail::is_nyquist(g, idx[axis])) return;
    out.coefficients[p] = std::complex<double>(0.0, k[axis]) * F.coefficients[p];
  });
  return out;
}

inline VectorField spectral_gradient(const SpectralField& F) {
  VectorField grad;
  grad.reserve(F.grid.dim());
  for (int a = 0; a < F.grid.dim(); ++a)
    grad.push_back(inverse_transform(spectral_partial(F, a)));
  return grad;
}

inline VectorField spectral_gradient(const Field& f) {
  return spectral_gradient(forward_transform(f));
}

/// Sum_a i k_a F_a in Fourier space; the zero mode is identically 0.
inline SpectralField spectral_divergence_hat(const std::vector<SpectralField>& comps) {
  if (comps.empty()) throw std::invalid_argument("spectral_divergence: no components");
  const Grid& g = comps.front().grid;
  if (static_cast<int>(comps.size()) != g.dim())
    throw std::invalid_argument("spectral_divergence: expected " + std::to_string(g.dim()) +
                                " components, got " + std::to_string(comps.size()));
  for (const auto& c : comps) require_same_grid(g, c.grid, "spectral_divergence");
  SpectralField out(g);
  for_each_mode(g, [&](std::size_t p, const int* idx, const double* k) {
    std::complex<double> acc = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      if (detail::is_nyquist(g, idx[a])) continue;
      acc += std::complex<double>(0.0, k[a]) * comps[a].coefficients[p];
    }
    out.coefficients[p] = acc;
  });
  out.coefficients[0] = 0.0;
  return out;
}

inline Field spectral_divergence(const VectorField& comps) {
  if (comps.empty()) throw std::invalid_argument("spectral_divergence: no components");
  std::vector<SpectralField> hats;
  hats.reserve(comps.size());
  for (const auto& c : comps) hats.push_back(forward_transform(c));
  return inverse_transform(spectral_divergence_hat(hats));
}

/// Multiply by exp(-t (|k|^2 + shift)): shift = 1 is the semigroup of
/// Delta - I, shift = 0 plain heat flow.
inline void apply_heat_semigroup_in_place(SpectralField& F, double t, double shift) {
  if (!(t >= 0.0)) throw std::invalid_argument("apply_heat_semigroup: t must be >= 0");
  if (t == 0.0) return;
  const Grid& g = F.grid;
  for_each_mode(g, [&](std::size_t p, const int*, const double* k) {
    F.coefficients[p] *= std::exp(-t * (squared_wavenumber(g, k) + shift));
  });
}

inline Field apply_heat_semigroup(const Field& f, double t, double shift) {
  if (!(t >= 0.0)) throw std::invalid_argument("apply_heat_semigroup: t must be >= 0");
  if (t == 0.0) return f;
  SpectralField F = forward_transform(f);
  apply_heat_semigroup_in_place(F, t, shift);
  return inverse_transform(F);
}

inline Field spectral_laplacian(const Field& f) {
  SpectralField F = forward_transform(f);
  const Grid& g = F.grid;
  for_each_mode(g, [&](std::size_t p, const int*, const double* k) {
    F.coefficients[p] *= -squared_wavenumber(g, k);
  });
  return inverse_transform(F);
}

}  // namespace kschemo
