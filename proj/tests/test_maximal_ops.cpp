#include <gtest/gtest.h>

#include <cmath>

#include "fracmax/battery.hpp"
#include "fracmax/maximal_ops.hpp"

using namespace fracmax;
using nlohmann::json;

namespace {

DomainPtr disc(double h, double radius = 1.0) {
  return build_domain(json{{"type", "ball"}, {"center", {0.0, 0.0}}, {"radius", radius}}, h);
}

CellSet cells_with_delta_above(const GridDomain& d, double lo) {
  CellSet out;
  for (auto c : d.cells)
    if (d.delta[c] >= lo && !d.ridge[c]) out.push_back(c);
  return out;
}

}  // namespace

TEST(BallAverage, Examples) {
  auto d = disc(0x1p-7);
  EXPECT_NEAR(ball_average(constant_field(d, 3.0), {0.1, 0.0}, 0.3), 3.0, 1e-13);
  const Point x{0.1 + 0.5 * d->h, 0.2 + 0.5 * d->h};
  auto c = d->locate(x);
  ASSERT_TRUE(c.has_value());
  const Point xc = d->center(*c);
  auto odd = sample(d, [&](const Point& y) { return y[0] - xc[0]; });
  EXPECT_NEAR(ball_average(odd, xc, 0.3), 0.0, 1e-12);
  auto sq = sample(d, [](const Point& y) { return y[0] * y[0] + y[1] * y[1]; });
  const double r = 0.5;
  EXPECT_NEAR(ball_average(sq, d->center(*d->locate({1e-9, 1e-9})), r), r * r / 2.0, 4.0 * d->h);
}

TEST(BallAverage, UnderResolvedBallIsAnError) {
  auto d = disc(0x1p-4);
  EXPECT_THROW(ball_average(constant_field(d, 1.0), {0.01, 0.01}, 1e-4), Error);
}

TEST(SphereAverage, Examples) {
  auto d = disc(0x1p-7);
  EXPECT_NEAR(sphere_average(constant_field(d, 2.0), {0.1, 0.1}, 0.4), 2.0, 1e-12);
  const Point x{0.1, -0.2};
  auto odd = sample(d, [&](const Point& y) { return y[0] - x[0]; });
  EXPECT_NEAR(sphere_average(odd, x, 0.3), 0.0, 1e-12);
  auto sq = sample(d, [](const Point& y) { return y[0] * y[0] + y[1] * y[1]; });
  EXPECT_NEAR(sphere_average(sq, {0.0, 0.0}, 0.5), 0.25, 1e-4);
}

TEST(SphereAverage, OneDimensionalTwoPointSphere) {
  auto d = build_domain(json{{"type", "box"}, {"lo", {0.0}}, {"hi", {2.0}}}, 0x1p-8);
  auto u = sample(d, [](const Point& y) { return y[0]; });
  const Point x = d->center(*d->locate({1.0 + 1e-9, 0.0}));
  EXPECT_NEAR(sphere_average(u, x, 0.25), x[0], 1e-12);
  auto s0 = local_spherical_maximal(u, 0.0);
  EXPECT_NEAR(s0[*d->locate({1.0 + 1e-9, 0.0})], 1.0, d->h);
}

TEST(LocalMaximal, OneGivesDeltaToTheAlpha) {
  auto d = disc(0x1p-7);
  auto one = constant_field(d, 1.0);
  const double g = 0.5 * d->h;
  for (double a : {0.5, 1.0, 1.5}) {
    auto m = local_fractional_maximal(one, a);
    for (auto c : cells_with_delta_above(*d, 0.1)) {
      const double want = std::pow(d->delta[c], a);
      ASSERT_LE(m[c], want + 1e-12);
      ASSERT_GE(m[c], want - a * std::pow(d->delta[c], a - 1.0) * g - 1e-12);
    }
  }
}

TEST(LocalMaximal, AlphaZeroOfConstant) {
  auto d = disc(0x1p-5);
  auto m = local_fractional_maximal(constant_field(d, 2.5), 0.0);
  for (auto c : d->cells) EXPECT_DOUBLE_EQ(m[c], 2.5);
}

TEST(LocalMaximal, StarvedCellsAreFlagged) {
  auto d = disc(0x1p-4);
  auto m = local_fractional_maximal(constant_field(d, 1.0), 1.0, RadiusGrid{RadiusPolicy::uniform, 0.5});
  std::size_t starved = 0;
  for (auto c : d->cells)
    if (m.flags[c] & kRadiusStarved) {
      ++starved;
      EXPECT_EQ(m[c], 0.0);
    }
  EXPECT_GT(starved, 0u);
}

TEST(LocalMaximal, UniformPolicyIsDominatedByLattice) {
  auto d = disc(0x1p-6);
  auto u = bump_a().sample_on(d);
  auto lat = local_fractional_maximal(u, 1.0);
  auto uni = local_fractional_maximal(u, 1.0, RadiusGrid{RadiusPolicy::uniform, 0.0});
  for (auto c : d->cells) EXPECT_LE(uni[c], lat[c] + 1e-12);
}

TEST(RestrictedMaximal, BetaOneIsTheLocalOperator) {
  auto d = disc(0x1p-6);
  auto u = bump_b().sample_on(d);
  auto a = local_fractional_maximal(u, 1.0);
  auto b = restricted_maximal(u, 1.0, 1.0);
  EXPECT_EQ(a.values, b.values);
}

TEST(RestrictedMaximal, OneGivesScaledDelta) {
  auto d = disc(0x1p-7);
  auto one = constant_field(d, 1.0);
  auto m = restricted_maximal(one, 1.0, 24.0);
  auto full = local_fractional_maximal(one, 1.0);
  const double g = 0.5 * d->h;
  for (auto c : cells_with_delta_above(*d, 0.5)) {
    EXPECT_LE(m[c], d->delta[c] / 24.0 + 1e-12);
    EXPECT_GE(m[c], d->delta[c] / 24.0 - g);
    EXPECT_LE(m[c], full[c]);
  }
  EXPECT_THROW(restricted_maximal(one, 1.0, 0.5), ConfigError);
}

TEST(GlobalMaximal, IndicatorOfUnitBall) {
  auto d = disc(0x1p-6);
  auto chi = constant_field(d, 1.0);
  CellSet centre{*d->locate({1e-9, 1e-9})};
  auto m0 = global_fractional_maximal(chi, 0.0, 3.0, {}, &centre);
  EXPECT_NEAR(m0[centre[0]], 1.0, 1e-12);
  auto m1 = global_fractional_maximal(chi, 1.0, 3.0, {}, &centre);
  // sup_r r min(1, 1/r^2) = 1 at r = 1
  EXPECT_NEAR(m1[centre[0]], 1.0, 0.02);
}

TEST(GlobalMaximal, ZeroFieldAndTailCheck) {
  auto d = disc(0x1p-5);
  auto zero = constant_field(d, 0.0);
  auto m = global_fractional_maximal(zero, 1.0, 3.0);
  for (auto c : d->cells) EXPECT_EQ(m[c], 0.0);
  EXPECT_THROW(global_fractional_maximal(constant_field(d, 1.0), 1.0, 0.05), OperatorError);
  EXPECT_THROW(global_fractional_maximal(zero, 2.0, 3.0), ConfigError);
}

TEST(CubeMaximal, AlphaZeroOfConstant) {
  auto d = build_domain(json{{"type", "box"}, {"lo", {0.0, 0.0}}, {"hi", {1.0, 1.0}}}, 0x1p-5);
  auto m = cube_maximal(constant_field(d, 1.75), 0.0);
  for (auto c : d->cells) EXPECT_NEAR(m[c], 1.75, 1e-12);
}

TEST(CubeMaximal, UnitProfileClosedForm) {
  auto d = build_domain(json{{"type", "box"}, {"lo", {0.0, -1.0}}, {"hi", {2.0, 2.0}}}, 0x1p-6);
  auto one = constant_field(d, 1.0);
  CellSet probes;
  for (auto c : d->cells) {
    auto x = d->center(c);
    if (x[0] > 0.2 && x[0] < 1.0 && x[1] > 0.0 && x[1] < 1.0) probes.push_back(c);
  }
  auto m = cube_maximal(one, 1.5, &probes);
  for (auto c : probes) {
    const double want = std::pow(d->center(c)[0], 1.5);
    EXPECT_NEAR(m[c] / want, 1.0, 0.05);
  }
}

TEST(FractionalAverage, OneGivesScaledDeltaExactly) {
  auto d = disc(0x1p-6);
  auto one = constant_field(d, 1.0);
  auto a = fractional_average(one, 1.5, 0.5);
  auto m = local_fractional_maximal(one, 1.5);
  for (auto c : d->cells) {
    if (!a.valid(c)) continue;
    EXPECT_NEAR(a[c], std::pow(0.5 * d->delta[c], 1.5), 1e-14);
    EXPECT_LE(a[c], m[c] + 1e-12);
  }
  EXPECT_THROW(fractional_average(one, 1.0, 1.0), ConfigError);
}

TEST(FractionalAverage, ConstantGradientMatchesClosedForm) {
  auto d = disc(0x1p-7);
  const double c0 = 2.0, a = 1.5, t = 0.5;
  auto u = constant_field(d, c0);
  auto g = analytic_gradient_uta_Lp_form(u, a, t);
  for (auto c : cells_with_delta_above(*d, 0.2)) {
    if (!g.valid[c]) continue;
    const double delta = d->delta[c];
    const double scale = c0 * a * std::pow(t * delta, a - 1.0) * t;
    EXPECT_NEAR(g.values[c][0], scale * d->ddelta[c][0], 0.05 * scale);
    EXPECT_NEAR(g.values[c][1], scale * d->ddelta[c][1], 0.05 * scale);
  }
}

TEST(MaximalOverScales, SingleScaleAndDenseScales) {
  auto d = disc(0x1p-6);
  auto one = constant_field(d, 1.0);
  auto half = maximal_over_scales(one, 1.0, {0.5});
  for (auto c : d->cells) EXPECT_NEAR(half[c], 0.5 * d->delta[c], 1e-14);
  std::vector<double> dense;
  for (int j = 1; j < 64; ++j) dense.push_back(j / 64.0);
  auto full = maximal_over_scales(one, 1.0, dense);
  auto m = local_fractional_maximal(one, 1.0);
  for (auto c : d->cells) {
    EXPECT_GE(full[c], 63.0 / 64.0 * d->delta[c] - 1e-12);
    EXPECT_LE(full[c], m[c] + 1e-12);
  }
  EXPECT_THROW(maximal_over_scales(one, 1.0, {}), ConfigError);
}

TEST(MaximalOverScales, MonotoneUnderInclusion) {
  auto d = disc(0x1p-6);
  auto u = band_limited_member(5).sample_on(d);
  auto coarse = maximal_over_scales(u, 1.0, {0.25, 0.5, 0.75});
  auto fine = maximal_over_scales(u, 1.0, {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875});
  for (auto c : d->cells) EXPECT_LE(coarse[c], fine[c]);
}

TEST(SphericalMaximal, OneGivesDeltaUpToCap) {
  auto d = disc(0x1p-6);
  auto s = local_spherical_maximal(constant_field(d, 1.0), 1.0);
  for (auto c : cells_with_delta_above(*d, 0.1)) {
    EXPECT_LE(s[c], d->delta[c] + 1e-12);
    EXPECT_GE(s[c], d->delta[c] - std::sqrt(2.0) * d->h - 1e-12);
  }
}
