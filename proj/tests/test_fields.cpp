#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracmax/battery.hpp"
#include "fracmax/fields.hpp"
#include "fracmax/maximal_ops.hpp"

using namespace fracmax;
using nlohmann::json;

namespace {

DomainPtr unit_square(double h) { return build_domain(json{{"type", "box"}, {"lo", {0.0, 0.0}}, {"hi", {1.0, 1.0}}}, h); }
DomainPtr unit_disc_grid(double h) {
  return build_domain(json{{"type", "ball"}, {"center", {0.0, 0.0}}, {"radius", 1.0}}, h);
}
DomainPtr interval(double lo, double hi, double h) {
  return build_domain(json{{"type", "box"}, {"lo", {lo}}, {"hi", {hi}}}, h);
}

/// f = k on the k-th quarter of (0, 1).
ScalarField staircase() {
  auto d = interval(0.0, 1.0, 0x1p-6);
  return sample(d, [](const Point& x) { return std::floor(4.0 * x[0]) + 1.0; });
}

}  // namespace

TEST(FdGradient, ConstantHasZeroGradient) {
  auto g = fd_gradient(constant_field(unit_disc_grid(0x1p-5), 2.0));
  for (auto c : g.domain->cells)
    if (g.valid[c]) EXPECT_EQ(norm(g.values[c], 2), 0.0);
}

TEST(FdGradient, ExactOnAffine) {
  auto d = build_domain(json{{"type", "box"}, {"lo", {0.0, -1.0}}, {"hi", {2.0, 2.0}}}, 0x1p-5);
  auto g = fd_gradient(sample(d, [](const Point& x) { return x[0]; }), {false});
  std::size_t used = 0;
  for (auto c : d->cells)
    if (g.valid[c]) {
      ++used;
      EXPECT_NEAR(g.values[c][0], 1.0, 1e-12);
      EXPECT_NEAR(g.values[c][1], 0.0, 1e-12);
    }
  EXPECT_EQ(used, d->cells.size());
}

TEST(FdGradient, SineAtOriginWithinTaylorBound) {
  auto d = interval(-0.5, 0.5, 1e-3);
  auto g = fd_gradient(sample(d, [](const Point& x) { return std::sin(x[0]); }), {false});
  auto c = d->locate({0.0, 0.0});
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(g.values[*c][0], 1.0, 1e-6);
}

TEST(LpNorm, ConstantOnUnitBox) {
  auto one = constant_field(unit_square(0x1p-5), 1.0);
  for (double p : {1.0, 2.0, 3.5, double(INFINITY)}) EXPECT_NEAR(lp_norm(one, p), 1.0, 1e-12);
  EXPECT_NEAR(lp_norm(constant_field(unit_square(0x1p-5), 2.0), 2.0), 2.0, 1e-12);
}

TEST(LpNorm, SingularRadialFieldAgainstRadialQuadrature) {
  auto u = sample(unit_disc_grid(0x1p-8), [](const Point& x) { return std::pow(1.0 - norm(x, 2), -0.25); });
  // int_0^1 (1 - s)^(-1/2) 2 pi s ds = 2 pi B(2, 1/2) = 8 pi / 3
  const double oracle = 8.0 * std::numbers::pi / 3.0;
  EXPECT_NEAR(std::pow(lp_norm(u, 2.0), 2.0) / oracle, 1.0, 0.01);
}

TEST(LpNorm, RejectsPBelowOne) { EXPECT_THROW(lp_norm(constant_field(unit_square(0.25), 1.0), 0.5), ConfigError); }

TEST(Distribution, Examples) {
  auto one = constant_field(unit_square(0x1p-5), 1.0);
  EXPECT_EQ(distribution_function(one, 2.0), 0.0);
  EXPECT_NEAR(distribution_function(one, 0.5), 1.0, 1e-12);
  EXPECT_NEAR(distribution_function(staircase(), 2.5), 0.5, 1e-12);
}

TEST(LayerCake, Examples) {
  EXPECT_NEAR(layer_cake_norm(constant_field(unit_square(0x1p-5), 1.0), 2.0), 1.0, 1e-12);
  auto st = staircase();
  EXPECT_NEAR(layer_cake_norm(st, 1.0) / lp_norm(st, 1.0), 1.0, 0.005);
  EXPECT_EQ(layer_cake_norm(constant_field(unit_square(0x1p-5), 0.0), 2.0), 0.0);
}

TEST(LayerCake, MatchesLpOnBatteryMembers) {
  auto d = unit_disc_grid(0x1p-6);
  for (const auto& m : {bump_a(), bump_b(), band_limited_member(3)}) {
    auto f = abs_field(m.sample_on(d));
    for (double s : {1.0, 2.0}) EXPECT_NEAR(layer_cake_norm(f, s) / std::pow(lp_norm(f, s), s), 1.0, 0.005) << m.name;
  }
}

TEST(LayerCake, LevelGridMustCoverRange) {
  auto st = staircase();
  EXPECT_THROW(layer_cake_norm(st, 1.0, {1.0, 2.0, 3.0}), FieldError);
  EXPECT_THROW(layer_cake_norm(st, 1.0, {1.5, 4.0}), FieldError);
}

TEST(Hardy, DeltaQuotientIsTheArea) {
  auto d = unit_square(0x1p-5);
  auto f = sample(d, [&](const Point& x) { return d->geometry->delta(x); });
  EXPECT_NEAR(hardy_quotient(f, 2.0), 1.0, 1e-12);
  EXPECT_NEAR(hardy_quotient(f, 3.0), 1.0, 1e-12);
}

TEST(Hardy, MaximalOfOneOnDiscGivesPi) {
  auto d = unit_disc_grid(0x1p-7);
  auto m = local_fractional_maximal(constant_field(d, 1.0), 1.0);
  EXPECT_NEAR(hardy_quotient(m, 2.0) / std::numbers::pi, 1.0, 0.02);
}

TEST(Interpolate, ConstantAffineAndQuadratic) {
  auto d = unit_disc_grid(0x1p-8);
  EXPECT_DOUBLE_EQ(interpolate(constant_field(d, 3.0), {0.3, 0.4}), 3.0);
  auto aff = sample(d, [](const Point& x) { return 2.0 * x[0] - x[1] + 0.5; });
  EXPECT_NEAR(interpolate(aff, {0.3, 0.4}), 0.6 - 0.4 + 0.5, 1e-13);
  auto sq = sample(d, [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; });
  EXPECT_NEAR(interpolate(sq, {0.3, 0.4}), 0.25, 1e-4);
}

TEST(Interpolate, OutsideDomainIsAnError) {
  auto d = unit_disc_grid(0x1p-5);
  EXPECT_THROW(interpolate(constant_field(d, 1.0), {0.999, 0.0}), FieldError);
}

TEST(OperatorParams, ExponentBookkeeping) {
  OperatorParams p(1.0, 1.5, 2);
  ASSERT_TRUE(p.p_star().has_value());
  EXPECT_NEAR(*p.p_star(), 6.0, 1e-12);
  EXPECT_NEAR(*p.q(), 1.5, 1e-12);
  EXPECT_FALSE(OperatorParams(1.0, 2.0, 2).p_star().has_value());
  EXPECT_THROW(OperatorParams(-1.0, 2.0, 2), ConfigError);
}

TEST(Fields, CsvIsDeterministic) {
  auto u = bump_a().sample_on(unit_disc_grid(0x1p-4));
  std::ostringstream a, b;
  u.write_csv(a);
  u.write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str().find("nan"), std::string::npos);
}
