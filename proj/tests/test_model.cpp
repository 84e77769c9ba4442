#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "kschemo/model.hpp"
#include "kschemo/samples.hpp"

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

ModelParams params(double l, double m, int dim = 2) {
  ModelParams p;
  p.l = l;
  p.m = m;
  p.dim = dim;
  return p;
}

Field chemotactic_part(const Field& u, const ModelParams& p) {
  const RhsResult r = assemble_rhs(u, p);
  const Field lap = spectral_laplacian(u);
  Field c(u.grid);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = r.dudt[i] - lap[i];
  return c;
}

}  // namespace

TEST_CASE("f1_eval / f2_eval: examples", "[model]") {
  ModelParams p = params(2.0, 3.0);
  CHECK(f1_eval(0.0, p) == 0.0);
  CHECK(f2_eval(0.0, p) == 0.0);
  CHECK(f1_eval(3.0, p) == 9.0);
  CHECK(f1_eval(-0.5, p) == 0.0);
  CHECK(f2_eval(-0.5, p) == 0.0);
  p.c2 = 0.5;
  CHECK_THAT(f2_eval(2.0, p), WithinRel(4.0, 1e-15));
  for (double e : {0.3, 0.5, 1.0, 1.5, 2.0}) CHECK(production(-0.5, 1.0, e) == 0.0);
}

TEST_CASE("production is nondecreasing and attains its bound", "[model][property]") {
  for (double e : {0.25, 0.5, 1.0, 1.5, 3.0}) {
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double s = 0.05 * i;
      const double f = production(s, 1.7, e);
      CHECK(f >= prev);
      CHECK(f >= 0.0);
      CHECK_THAT(f, WithinAbs(1.7 * std::pow(s, e), 1e-15 * (1 + f)));
      prev = f;
    }
  }
}

TEST_CASE("ModelParams::validate names the offending field", "[model]") {
  ModelParams p = params(-1.0, 2.0);
  CHECK_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("params.l"));
  p = params(1.0, 2.0);
  p.lambda2 = 0.0;
  CHECK_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("params.lambda2"));
  p = params(1.0, 2.0);
  p.xi1 = 0.0;
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS_WITH(p.validate(false), Catch::Matchers::ContainsSubstring("params.xi1"));
  p = params(1.0, 2.0, 4);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("classify_regime: examples", "[model]") {
  CHECK(classify_regime(params(1.5, 2.0)).tag == RegimeTag::BoundedA);
  CHECK(classify_regime(params(0.5, 0.5)).tag == RegimeTag::BoundedB);
  const Regime crit = classify_regime(params(1.0, 1.0));
  CHECK(crit.tag == RegimeTag::Uncovered);
  CHECK_THAT(crit.detail, Catch::Matchers::ContainsSubstring("critical"));
  const Regime mixed = classify_regime(params(0.5, 2.0));
  CHECK(mixed.tag == RegimeTag::Uncovered);
  CHECK_THAT(mixed.detail, Catch::Matchers::ContainsSubstring("l < 2/N"));
}

TEST_CASE("classify_regime: boundary cases", "[model]") {
  // l > m fails A; m < 1 fails A.
  CHECK(classify_regime(params(2.0, 1.5)).tag == RegimeTag::Uncovered);
  CHECK(classify_regime(params(0.9, 0.95, 1)).tag == RegimeTag::Uncovered);
  // m = 1 exactly is allowed in A (N = 3: 2/N = 2/3).
  CHECK(classify_regime(params(0.8, 1.0, 3)).tag == RegimeTag::BoundedA);
  // l exactly at 2/N is excluded from both regimes.
  CHECK(classify_regime(params(2.0 / 3.0, 1.0, 3)).tag == RegimeTag::Uncovered);
  CHECK(classify_regime(params(0.6666666666667, 0.6666666666667, 3)).tag == RegimeTag::Uncovered);
  // N = 1: 2/N = 2, B needs l = m < 2.
  CHECK(classify_regime(params(1.5, 1.5, 1)).tag == RegimeTag::BoundedB);
  CHECK(classify_regime(params(2.5, 3.0, 1)).tag == RegimeTag::BoundedA);
}

TEST_CASE("regime tags round-trip through strings", "[model]") {
  for (RegimeTag t : {RegimeTag::BoundedA, RegimeTag::BoundedB, RegimeTag::Uncovered})
    CHECK(regime_from_string(to_string(t)) == t);
  CHECK_THROWS_AS(regime_from_string("Bounded"), std::invalid_argument);
}

TEST_CASE("assemble_rhs: homogeneous steady state", "[model]") {
  const Grid g = make_grid(2, 5.0, 32);
  ModelParams p = params(1.5, 2.0);
  p.lambda1 = 0.5;
  p.lambda2 = 3.0;
  p.c1 = 2.0;
  const double c = 0.8;
  const RhsResult r = assemble_rhs(Field(g, c), p);
  CHECK(max_abs_diff(r.v, Field(g, f1_eval(c, p) / p.lambda1)) < 1e-14);
  CHECK(max_abs_diff(r.w, Field(g, f2_eval(c, p) / p.lambda2)) < 1e-14);
  CHECK(sup_norm(r.dudt) < 1e-14);
}

TEST_CASE("assemble_rhs: zero density", "[model]") {
  const Grid g = make_grid(2, 5.0, 16);
  const RhsResult r = assemble_rhs(Field(g, 0.0), params(1.5, 2.0));
  CHECK(sup_norm(r.dudt) == 0.0);
  CHECK(sup_norm(r.v) == 0.0);
  CHECK(sup_norm(r.w) == 0.0);
}

TEST_CASE("assemble_rhs: pure diffusion eigenfunction", "[model]") {
  const Grid g = make_grid(2, kPi, 32);
  ModelParams p = params(1.5, 2.0);
  p.xi1 = p.xi2 = 0.0;
  const Field u = sample_field(g, [](const double* x) { return std::cos(x[0]); });
  Field expect = u;
  for (double& x : expect.values) x = -x;
  CHECK(max_abs_diff(assemble_rhs(u, p).dudt, expect) < 1e-12);
}

TEST_CASE("assemble_rhs: zero mean, parity and antisymmetry", "[model][property]") {
  const Grid g = make_grid(2, 8.0, 64);
  // Even in each coordinate about the grid origin (x = 0 is a grid point).
  const Field u = sample_field(g, [](const double* x) {
    return 2.0 * std::exp(-0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1])) + 0.5 * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 8.0);
  });
  ModelParams p = params(1.5, 2.0);
  p.xi1 = 2.0;
  p.xi2 = 0.7;
  p.lambda1 = 0.8;
  p.lambda2 = 1.9;
  p.c1 = 1.3;
  p.c2 = 0.6;
  const RhsResult r = assemble_rhs(u, p);
  CHECK(std::abs(integral(r.dudt)) <= 1e-13 * lp_norm(r.dudt, 1.0));

  const int n = g.points_per_axis();
  auto mirror = [&](std::size_t pos, int axis) {
    int idx[2];
    g.real_indices(pos, idx);
    idx[axis] = (n - idx[axis]) % n;
    return static_cast<std::size_t>(idx[0]) * n + idx[1];
  };
  double parity = 0.0;
  for (std::size_t i = 0; i < r.dudt.size(); ++i)
    for (int a = 0; a < 2; ++a) parity = std::max(parity, std::abs(r.dudt[i] - r.dudt[mirror(i, a)]));
  CHECK(parity <= 1e-10);

  ModelParams q = p;
  std::swap(q.xi1, q.xi2);
  std::swap(q.lambda1, q.lambda2);
  std::swap(q.c1, q.c2);
  std::swap(q.l, q.m);
  const Field a = chemotactic_part(u, p);
  const Field b = chemotactic_part(u, q);
  double anti = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) anti = std::max(anti, std::abs(a[i] + b[i]));
  CHECK(anti <= 1e-10);
  CHECK(sup_norm(a) > 1e-3);
}

TEST_CASE("evaluate_signals: drift speed is the potential gradient sup", "[model]") {
  const Grid g = make_grid(1, kPi, 64);
  ModelParams p = params(1.0, 1.0, 1);
  p.xi2 = 0.0;
  // v solves (1 - d2)v = 1 + 0.5 cos x  ->  v = 1 + 0.25 cos x, phi = -v.
  const Field u = sample_field(g, [](const double* x) { return 1.0 + 0.5 * std::cos(x[0]); });
  const SignalState s = evaluate_signals(u, p);
  CHECK_THAT(s.drift_speed, WithinAbs(0.25, 1e-12));
  CHECK(s.drift_hat.coefficients[0] == std::complex<double>(0.0, 0.0));
}
