#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "kschemo/grid.hpp"
#include "kschemo/norms.hpp"
#include "kschemo/reduce.hpp"
#include "kschemo/samples.hpp"
#include "kschemo/spectral.hpp"

using namespace kschemo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l2_diff(const Field& a, const Field& b) {
  Field d(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return lp_norm(d, 2.0);
}

Field random_field(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Field f(g);
  for (double& x : f.values) x = normal(rng);
  return f;
}

}  // namespace

TEST_CASE("make_grid: definitions", "[grid]") {
  const Grid g = make_grid(1, kPi, 8);
  CHECK(g.spacing() == kPi / 4);
  const auto k = g.wavenumbers();
  REQUIRE(k.size() == 8);
  for (int j = -4; j < 4; ++j) CHECK_THAT(k[j + 4], WithinAbs(j, 1e-15));

  const Grid g2 = make_grid(2, 10.0, 256);
  CHECK(g2.size() == 256u * 256u);
  CHECK(g2.spacing() == 20.0 / 256);
  CHECK(g2.spacing() * g2.points_per_axis() == 2.0 * g2.half_length());
}

TEST_CASE("make_grid: wavenumber symmetry", "[grid]") {
  for (double L : {1.0, kPi, 10.0, 12.5}) {
    const Grid g = make_grid(1, L, 64);
    for (int j = 1; j < 32; ++j) CHECK(g.wavenumber_of_index(-j) == -g.wavenumber_of_index(j));
  }
}

TEST_CASE("make_grid: rejects bad input", "[grid]") {
  CHECK_THROWS_AS(make_grid(3, 10.0, 7), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 10.0, 6), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(2, 0.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(2, -1.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0, 1.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(4, 1.0, 16), std::invalid_argument);
}

TEST_CASE("pairwise_sum is exact on representable sums and order-fixed", "[reduce]") {
  std::vector<double> xs(1000, 0.5);
  CHECK(pairwise_sum(xs) == 500.0);
  CHECK(pairwise_sum(0, 0, [](std::size_t) { return 1.0; }) == 0.0);
  std::vector<double> r(4097);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& x : r) x = u(rng);
  CHECK(pairwise_sum(r) == pairwise_sum(r));
}

TEST_CASE("forward_transform: constant has only the zero mode", "[spectral]") {
  const Grid g = make_grid(2, kPi, 16);
  const SpectralField F = forward_transform(Field(g, 3.0));
  CHECK_THAT(F.coefficients[0].real(), WithinRel(3.0 * g.size(), 1e-14));
  for (std::size_t i = 1; i < F.size(); ++i) CHECK(std::abs(F.coefficients[i]) < 1e-12);
}

TEST_CASE("forward_transform: cos(x1) has exactly two modes", "[spectral]") {
  const Grid g = make_grid(1, kPi, 32);
  const Field f = sample_field(g, [](const double* x) { return std::cos(x[0]); });
  const SpectralField F = forward_transform(f);
  int nonzero = 0;
  for (std::size_t i = 0; i < F.size(); ++i)
    if (std::abs(F.coefficients[i]) > 1e-10) ++nonzero;
  // Half-spectrum storage keeps j = 1; its conjugate partner j = -1 is implied.
  CHECK(nonzero == 1);
  CHECK(std::abs(F.coefficients[1]) > 1.0);
  // In 2D both stored partners (+1, 0) and (-1, 0) appear.
  const Grid g2 = make_grid(2, kPi, 16);
  const SpectralField F2 = forward_transform(sample_field(g2, [](const double* x) { return std::cos(x[0]); }));
  nonzero = 0;
  for (std::size_t i = 0; i < F2.size(); ++i)
    if (std::abs(F2.coefficients[i]) > 1e-10) ++nonzero;
  CHECK(nonzero == 2);
}

TEST_CASE("transform round trip within 1e-12 for all dims and sizes", "[spectral][property]") {
  for (int dim : {1, 2, 3}) {
    for (int n : {8, 16, 32, 64}) {
      if (dim == 3 && n > 32) continue;
      const Grid g = make_grid(dim, 5.0, n);
      const Field f = random_field(g, 100 * dim + n);
      const Field back = inverse_transform(forward_transform(f));
      CHECK(l2_diff(f, back) <= 1e-12 * lp_norm(f, 2.0));
    }
  }
}

TEST_CASE("transform size mismatch is rejected", "[spectral]") {
  const Grid g = make_grid(1, 1.0, 16);
  Field bad(g);
  bad.values.resize(10);
  CHECK_THROWS_AS(forward_transform(bad), std::invalid_argument);
}

TEST_CASE("spectral_gradient: constant and eigenfunction", "[spectral]") {
  const Grid g = make_grid(2, kPi, 32);
  for (const auto& c : spectral_gradient(Field(g, 4.2))) CHECK(sup_norm(c) < 1e-14);

  const Field s = sample_field(g, [](const double* x) { return std::sin(x[0]); });
  const VectorField grad = spectral_gradient(s);
  REQUIRE(grad.size() == 2);
  CHECK(max_abs_diff(grad[0], sample_field(g, [](const double* x) { return std::cos(x[0]); })) < 1e-10);
  CHECK(sup_norm(grad[1]) < 1e-10);
}

TEST_CASE("spectral_gradient: product rule oracle", "[spectral]") {
  const Grid g = make_grid(2, kPi, 32);
  const Field f = sample_field(g, [](const double* x) { return std::sin(x[0]) * std::cos(x[1]); });
  const VectorField grad = spectral_gradient(f);
  const Field d0 = sample_field(g, [](const double* x) { return std::cos(x[0]) * std::cos(x[1]); });
  const Field d1 = sample_field(g, [](const double* x) { return -std::sin(x[0]) * std::sin(x[1]); });
  CHECK(max_abs_diff(grad[0], d0) <= 1e-10);
  CHECK(max_abs_diff(grad[1], d1) <= 1e-10);
  for (const auto& c : grad) CHECK(std::abs(integral(c)) < 1e-12);
}

TEST_CASE("spectral_gradient: wavelength scaling on a non-2pi box", "[spectral]") {
  const double L = 10.0;
  const Grid g = make_grid(1, L, 64);
  const double k = 3 * kPi / L;
  const Field f = sample_field(g, [&](const double* x) { return std::sin(k * x[0]); });
  const Field expect = sample_field(g, [&](const double* x) { return k * std::cos(k * x[0]); });
  CHECK(max_abs_diff(spectral_gradient(f)[0], expect) < 1e-12);
}

TEST_CASE("spectral_divergence: examples", "[spectral]") {
  const Grid g = make_grid(2, kPi, 32);
  VectorField c = {Field(g, 1.0), Field(g, -2.0)};
  CHECK(sup_norm(spectral_divergence(c)) < 1e-14);

  const Field s = sample_field(g, [](const double* x) { return std::sin(x[0]); });
  const Field div = spectral_divergence(spectral_gradient(s));
  CHECK(max_abs_diff(div, sample_field(g, [](const double* x) { return -std::sin(x[0]); })) < 1e-10);

  CHECK_THROWS_AS(spectral_divergence(VectorField{Field(g, 0.0)}), std::invalid_argument);
}

TEST_CASE("spectral_divergence: zero mean for arbitrary fields", "[spectral][property]") {
  for (int dim : {1, 2, 3}) {
    const Grid g = make_grid(dim, 3.0, dim == 3 ? 16 : 32);
    for (int trial = 0; trial < 5; ++trial) {
      VectorField F;
      for (int a = 0; a < dim; ++a) F.push_back(random_field(g, 7 * trial + a + 31 * dim));
      const Field div = spectral_divergence(F);
      const double mean = integral(div) / g.box_volume();
      CHECK(std::abs(mean) <= 1e-13 * lp_norm(F, kInf));
    }
  }
}

TEST_CASE("apply_heat_semigroup: examples", "[spectral]") {
  const Grid g = make_grid(2, kPi, 32);
  const Field c(g, 2.5);
  CHECK(max_abs_diff(apply_heat_semigroup(c, 3.7, 0.0), c) < 1e-13);

  const Field f = sample_field(g, [](const double* x) { return std::cos(x[0]); });
  const Field out = apply_heat_semigroup(f, 1.0, 1.0);
  const Field expect = sample_field(g, [](const double* x) { return std::exp(-2.0) * std::cos(x[0]); });
  CHECK(max_abs_diff(out, expect) <= 1e-10);

  CHECK(max_abs_diff(apply_heat_semigroup(f, 0.0, 1.0), f) < 1e-14);
  CHECK_THROWS_AS(apply_heat_semigroup(f, -1e-3, 0.0), std::invalid_argument);
}

TEST_CASE("apply_heat_semigroup: periodic Gaussian vs closed-form heat kernel", "[spectral]") {
  // The periodized Gaussian with variance s2 evolves into the periodized
  // Gaussian with variance s2 + 2t (scaled to keep the integral).
  const double L = 10.0, s2 = 1.0, t = 0.75;
  const Grid g = make_grid(1, L, 128);
  auto periodic = [&](double var, double amp) {
    return sample_field(g, [&](const double* x) {
      double s = 0.0;
      for (int m = -3; m <= 3; ++m) {
        const double d = x[0] - 2.0 * L * m;
        s += std::exp(-0.5 * d * d / var);
      }
      return amp * s;
    });
  };
  const Field u0 = periodic(s2, 1.0);
  const Field expect = periodic(s2 + 2.0 * t, std::sqrt(s2 / (s2 + 2.0 * t)));
  CHECK(max_abs_diff(apply_heat_semigroup(u0, t, 0.0), expect) <= 1e-8);
}

TEST_CASE("apply_heat_semigroup: semigroup property and mean behaviour", "[spectral][property]") {
  const Grid g = make_grid(2, 4.0, 32);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const Field f = band_limited_random(g, rng);
    for (double shift : {0.0, 1.0}) {
      const double s = 0.13 * (trial + 1), t = 0.29;
      const Field once = apply_heat_semigroup(f, s + t, shift);
      const Field twice = apply_heat_semigroup(apply_heat_semigroup(f, s, shift), t, shift);
      CHECK(max_abs_diff(once, twice) <= 1e-11);
    }
    const double m0 = integral(f);
    CHECK_THAT(integral(apply_heat_semigroup(f, 0.8, 0.0)), WithinAbs(m0, 1e-12 * (1 + std::abs(m0))));
    CHECK_THAT(integral(apply_heat_semigroup(f, 0.8, 1.0)),
               WithinAbs(std::exp(-0.8) * m0, 1e-12 * (1 + std::abs(m0))));
  }
}

TEST_CASE("dealias: examples and projection property", "[spectral]") {
  const Grid g = make_grid(1, kPi, 16);
  const Field low = sample_field(g, [](const double* x) { return 1.0 + std::cos(5 * x[0]) + std::sin(2 * x[0]); });
  CHECK(max_abs_diff(inverse_transform(dealias(forward_transform(low))), low) < 1e-13);

  const Field high = sample_field(g, [](const double* x) { return std::cos(7 * x[0]); });
  CHECK(sup_norm(inverse_transform(dealias(forward_transform(high)))) < 1e-14);

  const Grid g2 = make_grid(2, 2.0, 24);
  for (int trial = 0; trial < 5; ++trial) {
    const Field f = random_field(g2, 90 + trial);
    const Field d = inverse_transform(dealias(forward_transform(f)));
    CHECK(lp_norm(d, 2.0) <= lp_norm(f, 2.0) * (1 + 1e-14));
    // Idempotent.
    const Field dd = inverse_transform(dealias(forward_transform(d)));
    CHECK(max_abs_diff(d, dd) < 1e-13);
  }
}

TEST_CASE("eigenfunction exactness in 3D", "[spectral]") {
  const Grid g = make_grid(3, kPi, 16);
  const Field f = sample_field(g, [](const double* x) { return std::cos(x[0] + 2 * x[1] - x[2]); });
  const double k2 = 1 + 4 + 1;
  const Field lap = spectral_laplacian(f);
  Field expect = f;
  for (double& x : expect.values) x *= -k2;
  CHECK(max_abs_diff(lap, expect) < 1e-10);
  Field heat = f;
  for (double& x : heat.values) x *= std::exp(-0.1 * (k2 + 1));
  CHECK(max_abs_diff(apply_heat_semigroup(f, 0.1, 1.0), heat) < 1e-10);
}
