#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kschemo/diagnostics.hpp"
#include "kschemo/integrator.hpp"
#include "kschemo/samples.hpp"

using namespace kschemo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

NormTrace sup_trace(const std::vector<double>& t, const std::vector<double>& sup) {
  NormTrace tr;
  for (std::size_t i = 0; i < t.size(); ++i) {
    TraceRow r;
    r.t = t[i];
    r.mass = 1.0;
    r.u_lp.assign(tr.norm_ps.size(), 1.0);
    r.u_lp[tr.p_index(kInf)] = sup[i];
    r.v_lp.assign(tr.norm_ps.size(), 1.0);
    r.w_lp.assign(tr.norm_ps.size(), 1.0);
    r.grad_v_sup = r.grad_w_sup = 1.0;
    tr.rows.push_back(r);
  }
  return tr;
}

}  // namespace

TEST_CASE("lp_norm: constant field", "[diagnostics]") {
  const Grid g = make_grid(2, 3.0, 16);
  const double V = g.box_volume();
  for (double p : {1.0, 1.5, 2.0, 4.0, 7.0}) CHECK_THAT(lp_norm(Field(g, -2.0), p), WithinRel(2.0 * std::pow(V, 1.0 / p), 1e-13));
  CHECK(lp_norm(Field(g, -2.0), kInf) == 2.0);
  CHECK_THROWS_AS(lp_norm(Field(g, 1.0), 0.5), std::invalid_argument);
}

TEST_CASE("lp_norm: L1 versus signed mass", "[diagnostics]") {
  const Grid g = make_grid(1, kPi, 32);
  const Field pos = gaussian(g, 1.0, 0.7);
  CHECK_THAT(lp_norm(pos, 1.0), WithinRel(integral(pos), 1e-14));
  const Field mixed = sample_field(g, [](const double* x) { return std::cos(x[0]) + 0.2; });
  CHECK(lp_norm(mixed, 1.0) > integral(mixed) + 1e-3);
}

TEST_CASE("lp_norm: Hoelder interpolation on 100 random fields", "[diagnostics][property]") {
  const Grid g = make_grid(2, 2.0, 16);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    Field f(g);
    for (double& x : f.values) x = normal(rng) * (1 + trial % 7);
    const double l1 = lp_norm(f, 1.0), l2 = lp_norm(f, 2.0), li = lp_norm(f, kInf);
    CHECK(l2 <= std::sqrt(l1 * li) * (1 + 1e-13));
    // Homogeneity.
    Field h = f;
    for (double& x : h.values) x *= -3.0;
    CHECK_THAT(lp_norm(h, 4.0), WithinRel(3.0 * lp_norm(f, 4.0), 1e-13));
  }
}

TEST_CASE("lp_norm: vector fields use the Euclidean magnitude", "[diagnostics]") {
  const Grid g = make_grid(1, 1.0, 8);
  VectorField F = {Field(g, 3.0), Field(g, 4.0)};
  CHECK_THAT(sup_norm(F), WithinRel(5.0, 1e-15));
  CHECK_THAT(lp_norm(F, 2.0), WithinRel(5.0 * std::sqrt(2.0), 1e-14));
}

TEST_CASE("tail_mass_fraction: examples", "[diagnostics]") {
  const Grid g = make_grid(2, 10.0, 64);
  CHECK(tail_mass_fraction(gaussian(g, 1.0, 0.5)) < 1e-8);
  CHECK(tail_mass_fraction(Field(g, 2.0)) == 0.75);
  CHECK(tail_mass_fraction(Field(g, 0.0)) == 0.0);
  const Grid g1 = make_grid(1, 10.0, 64);
  CHECK(tail_mass_fraction(Field(g1, 1.0)) == 0.5);
  const Grid g3 = make_grid(3, 10.0, 16);
  CHECK(tail_mass_fraction(Field(g3, 1.0)) == 1.0 - 0.125);
}

TEST_CASE("energy_identity_residual: equilibrium and zero", "[diagnostics]") {
  const Grid g = make_grid(2, 10.0, 64);
  ModelParams p;
  p.l = 1.5;
  p.m = 2.0;
  p.lambda1 = 0.7;
  p.xi1 = 1.3;
  for (double c : {0.1, 0.5, 2.0}) {
    const Field u(g, c);
    const RhsResult r = assemble_rhs(u, p);
    for (double rr : {2.0, 3.0, 4.0}) CHECK(energy_identity_residual(u, r.v, r.w, r.dudt, p, rr) <= 1e-12);
  }
  const Field z(g, 0.0);
  CHECK(energy_identity_residual(z, z, z, z, p, 2.0) == 0.0);
  CHECK_THROWS_AS(energy_identity_residual(z, z, z, z, p, 1.5), std::invalid_argument);
}

TEST_CASE("energy_identity_residual: negative density with fractional powers", "[diagnostics]") {
  const Grid g = make_grid(1, 5.0, 16);
  Field u(g, 1.0);
  u[0] = -0.5;
  const ModelParams p;
  CHECK_THROWS_AS(energy_identity_residual(u, u, u, u, p, 3.0), std::invalid_argument);
  CHECK_NOTHROW(energy_identity_residual(u, u, u, u, p, 2.0));
}

TEST_CASE("energy_identity_residual: spectral convergence", "[diagnostics]") {
  ModelParams p;
  p.l = 1.5;
  p.m = 2.0;
  std::vector<double> res;
  for (int n : {64, 128}) {
    const Grid g = make_grid(2, 10.0, n);
    const Field u = with_mass(gaussian(g, 1.0, 0.7, {0.3, -0.2}), 20.0);
    const RhsResult r = assemble_rhs(u, p);
    res.push_back(energy_identity_residual(u, r.v, r.w, r.dudt, p, 2.0));
  }
  CHECK(res[0] >= 4.0 * res[1]);
}

TEST_CASE("detect_blowup: examples", "[diagnostics]") {
  StepControl c;
  c.blowup_threshold = 10.0;
  CHECK(detect_blowup(sup_trace({0, 1, 2, 3}, {5, 4, 3, 2}), c).kind == StatusKind::Completed);

  const RunStatus b = detect_blowup(sup_trace({0, 1, 2, 3}, {5, 8, 11, 20}), c);
  CHECK(b.kind == StatusKind::BlowUp);
  CHECK(b.time == 2.0);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const RunStatus n = detect_blowup(sup_trace({0, 1, 2, 3}, {5, nan, 11, nan}), c);
  CHECK(n.kind == StatusKind::NonFinite);
  CHECK(n.time == 1.0);

  StepControl dflt;
  CHECK(detect_blowup(sup_trace({0, 1}, {1, 2e6}), dflt).kind == StatusKind::BlowUp);
  CHECK(detect_blowup(sup_trace({0, 1}, {1, 9e5}), dflt).kind == StatusKind::Completed);
  CHECK_THROWS_AS(detect_blowup(NormTrace{}, c), std::invalid_argument);
}

TEST_CASE("plateau_ratio compares second-half and first-half maxima", "[diagnostics]") {
  CHECK_THAT(plateau_ratio(sup_trace({0, 1, 2, 3}, {2, 1, 1, 1}), 1.5), WithinRel(1.0, 1e-15));
  CHECK_THAT(plateau_ratio(sup_trace({0, 1, 2, 3}, {1, 2, 3, 4}), 1.5), WithinRel(2.0, 1e-15));
}

TEST_CASE("verify_semigroup_decay: alpha = 0 is a contraction", "[diagnostics]") {
  const Grid g = make_grid(2, kPi, 32);
  const auto s = band_limited_samples(g, 3, 8);
  const SemigroupReport r = verify_semigroup_decay(0.0, 1.0, {0.01, 0.1, 1.0, 10.0}, s);
  CHECK(r.worst_constant <= 1.0);
  CHECK(semigroup_decay_bound(0.0) == 1.0);
}

TEST_CASE("verify_semigroup_decay: single-mode analytic ratio", "[diagnostics]") {
  const Grid g = make_grid(2, kPi, 32);
  const Field f = sample_field(g, [](const double* x) { return std::cos(2 * x[0] + x[1]); });
  const double lambda = 1.5, mu = 5.0 + lambda, delta = lambda / 2;
  const std::vector<double> times = {0.01, 0.05, 0.2, 0.7, 2.0};
  for (double alpha : {0.25, 0.5, 1.0}) {
    const SemigroupReport r = verify_semigroup_decay(alpha, lambda, times, {f});
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double t = times[i];
      const double expect = std::pow(mu, alpha) * std::exp(-t * (mu - delta)) * std::pow(t, alpha);
      CHECK_THAT(r.ratios[i], WithinAbs(expect, 1e-10));
    }
    CHECK(r.worst_constant <= semigroup_decay_bound(alpha));
  }
  CHECK_THROWS_AS(verify_semigroup_decay(0.5, 1.0, {}, {f}), std::invalid_argument);
  CHECK_THROWS_AS(verify_semigroup_decay(0.5, 1.0, {1.0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(verify_semigroup_decay(1.5, 1.0, {1.0}, {f}), std::invalid_argument);
}

TEST_CASE("verify_semigroup_decay: random samples are stable under time-grid refinement", "[diagnostics]") {
  const Grid g = make_grid(2, kPi, 32);
  const auto s = band_limited_samples(g, 17, 16);
  auto grid = [](int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = 1e-2 * std::pow(1e3, double(i) / (n - 1));
    return t;
  };
  const double c1 = verify_semigroup_decay(0.5, 1.0, grid(32), s).worst_constant;
  const double c2 = verify_semigroup_decay(0.5, 1.0, grid(64), s).worst_constant;
  const double c3 = verify_semigroup_decay(0.5, 1.0, grid(128), s).worst_constant;
  CHECK(std::isfinite(c1));
  CHECK(std::abs(c2 - c1) <= 0.05 * c1);
  CHECK(std::abs(c3 - c1) <= 0.05 * c1);
}

TEST_CASE("verify_gradient_smoothing: single-mode maximum is (2e)^-1/2", "[diagnostics]") {
  const Grid g = make_grid(1, kPi, 64);
  // F = sin(k x) with k = 3: T(t) div F = k cos(kx) e^{-t(k^2+1)}.
  const double k = 3.0;
  const VectorField F = {sample_field(g, [&](const double* x) { return std::sin(k * x[0]); })};
  const double t_star = 1.0 / (2.0 * k * k);
  const SemigroupReport r = verify_gradient_smoothing(2.0, 2.0, {0.5 * t_star, t_star, 2.0 * t_star}, {F});
  CHECK_THAT(r.ratios[1], WithinAbs(1.0 / std::sqrt(2.0 * std::numbers::e), 1e-8));
  CHECK_THAT(r.worst_constant, WithinAbs(1.0 / std::sqrt(2.0 * std::numbers::e), 1e-8));
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const double t = r.times[i];
    CHECK_THAT(r.ratios[i], WithinAbs(k * std::exp(-t * k * k) * std::sqrt(t), 1e-12));
  }
}

TEST_CASE("verify_gradient_smoothing: zero field and argument checks", "[diagnostics]") {
  const Grid g = make_grid(2, kPi, 16);
  const VectorField z = {Field(g, 0.0), Field(g, 0.0)};
  const SemigroupReport r = verify_gradient_smoothing(2.0, kInf, {0.1, 1.0}, {z});
  for (double x : r.ratios) CHECK(x == 0.0);
  CHECK_THROWS_AS(verify_gradient_smoothing(2.0, 1.0, {1.0}, {z}), std::invalid_argument);
  // Times below h^2 are skipped; all below is an error.
  const double h2 = g.spacing() * g.spacing();
  CHECK(verify_gradient_smoothing(2.0, 2.0, {0.5 * h2, 2 * h2}, {z}).times.size() == 1);
  CHECK_THROWS_AS(verify_gradient_smoothing(2.0, 2.0, {0.5 * h2}, {z}), std::invalid_argument);
}

TEST_CASE("verify_gradient_smoothing: stable under doubling n", "[diagnostics]") {
  std::vector<double> t;
  for (int i = 0; i < 24; ++i) t.push_back(2e-2 * std::pow(500.0, i / 23.0));
  std::vector<double> c;
  for (int n : {32, 64}) {
    const Grid g = make_grid(2, kPi, n);
    c.push_back(verify_gradient_smoothing(2.0, kInf, t, smoothing_probe_samples(g, 5, 16)).worst_constant);
  }
  CHECK(std::isfinite(c[0]));
  CHECK(std::abs(c[1] - c[0]) <= 0.10 * std::max(c[0], c[1]));
}
