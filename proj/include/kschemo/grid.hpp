#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <fftw3.h>
#include <limits>
#include <new>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace kschemo {

/// Allocator backed by fftw_malloc so every buffer has the SIMD alignment
/// FFTW planned for. Plans are executed on arbitrary buffers via the
/// new-array interface, which requires identical alignment.
template <class T>
struct FftwAllocator {
  using value_type = T;

  FftwAllocator() noexcept = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    if (count == 0) return nullptr;
    void* p = fftw_malloc(count * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using RealBuffer = std::vector<double, FftwAllocator<double>>;
using ComplexBuffer =
    std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

/// Uniform periodic box [-L, L)^dim with n points per axis.
///
/// Sample i on an axis sits at x_i = -L + i*h, h = 2L/n. Fourier index j runs
/// over [-n/2, n/2) with wavenumber k_j = pi*j/L. Values are stored row-major
/// with axis 0 slowest; spectral coefficients use the FFTW real-to-complex
/// layout where the last axis holds only j = 0..n/2.
class Grid {
 public:
  Grid() = default;

  int dim() const { return dim_; }
  double half_length() const { return half_length_; }
  int points_per_axis() const { return n_; }
  double spacing() const { return spacing_; }
  double cell_volume() const { return std::pow(spacing_, dim_); }
  double box_volume() const { return std::pow(2.0 * half_length_, dim_); }

  std::size_t size() const { return real_size_; }
  std::size_t spectral_size() const { return spectral_size_; }
  /// Length of the stored last spectral axis (n/2 + 1).
  int spectral_last_extent() const { return n_ / 2 + 1; }

  double coordinate(int i) const { return -half_length_ + i * spacing_; }

  /// Signed Fourier index for storage position p on a full axis.
  int signed_index(int p) const { return p < n_ / 2 ? p : p - n_; }
  double wavenumber_of_index(int j) const {
    return std::numbers::pi * j / half_length_;
  }

  /// Per-axis wavenumber table ordered by signed index -n/2 .. n/2-1.
  std::vector<double> wavenumbers() const {
    std::vector<double> k(n_);
    for (int j = -n_ / 2; j < n_ / 2; ++j) k[j + n_ / 2] = wavenumber_of_index(j);
    return k;
  }

  /// Decompose a spectral storage offset into signed per-axis indices.
  void spectral_indices(std::size_t offset, int* idx) const {
    const int last = spectral_last_extent();
    idx[dim_ - 1] = static_cast<int>(offset % last);
    offset /= last;
    for (int a = dim_ - 2; a >= 0; --a) {
      idx[a] = signed_index(static_cast<int>(offset % n_));
      offset /= n_;
    }
  }

  /// Decompose a physical storage offset into per-axis sample indices.
  void real_indices(std::size_t offset, int* idx) const {
    for (int a = dim_ - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(offset % n_);
      offset /= n_;
    }
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && half_length_ == o.half_length_;
  }

  friend Grid make_grid(int dim, double half_length, int points_per_axis);

 private:
  int dim_ = 0;
  double half_length_ = 0.0;
  int n_ = 0;
  double spacing_ = 0.0;
  std::size_t real_size_ = 0;
  std::size_t spectral_size_ = 0;
};

inline Grid make_grid(int dim, double half_length, int points_per_axis) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("grid: dim must be 1, 2 or 3, got " +
                                std::to_string(dim));
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw std::invalid_argument("grid: half_length must be positive");
  if (points_per_axis < 8)
    throw std::invalid_argument("grid: points_per_axis must be >= 8, got " +
                                std::to_string(points_per_axis));
  if (points_per_axis % 2 != 0)
    throw std::invalid_argument("grid: points_per_axis must be even, got " +
                                std::to_string(points_per_axis));
  Grid g;
  g.dim_ = dim;
  g.half_length_ = half_length;
  g.n_ = points_per_axis;
  g.spacing_ = 2.0 * half_length / points_per_axis;
  g.real_size_ = 1;
  for (int a = 0; a < dim; ++a) g.real_size_ *= static_cast<std::size_t>(points_per_axis);
  g.spectral_size_ = g.real_size_ / points_per_axis * (points_per_axis / 2 + 1);
  return g;
}

/// Real lattice function on a Grid.
struct Field {
  Grid grid;
  RealBuffer values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const {
    for (double x : values)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

/// Fourier coefficients of a real field (half-spectrum layout, unnormalized
/// forward convention: the zero mode of a constant c equals c * n^dim).
struct SpectralField {
  Grid grid;
  ComplexBuffer coefficients;

  SpectralField() = default;
  explicit SpectralField(const Grid& g)
      : grid(g), coefficients(g.spectral_size(), std::complex<double>(0.0, 0.0)) {}

  std::size_t size() const { return coefficients.size(); }
};

using VectorField = std::vector<Field>;

/// Evaluate a callable f(const double* x) at every grid point.
template <class Fn>
Field sample_field(const Grid& g, Fn&& fn) {
  Field f(g);
  int idx[3];
  double x[3];
  for (std::size_t p = 0; p < g.size(); ++p) {
    g.real_indices(p, idx);
    for (int a = 0; a < g.dim(); ++a) x[a] = g.coordinate(idx[a]);
    f.values[p] = fn(static_cast<const double*>(x));
  }
  return f;
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace kschemo
