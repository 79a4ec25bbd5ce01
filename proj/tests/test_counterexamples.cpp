#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "fracmax/counterexamples.hpp"
#include "fracmax/maximal_ops.hpp"

using namespace fracmax;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double singular_u(double x, double y, double e) { return std::pow(1.0 - std::hypot(x, y), -e); }

/// Mean of (1 - |y|)^(-e) over B(x, 1 - eps), x = (eps, 0), in polar
/// coordinates about x.
double polar_ball_mean(double eps, double e) {
  const double d = 1.0 - eps;
  auto radial = [&](double th) {
    return GK::integrate(
        [&](double r) { return singular_u(eps + r * std::cos(th), r * std::sin(th), e) * r; }, 0.0, d, 10, 1e-11);
  };
  const double total = 2.0 * GK::integrate(radial, 0.0, std::numbers::pi, 10, 1e-10);
  return total / (std::numbers::pi * d * d);
}

/// Mean over the circle |y - x| = 1 - eps, with theta = pi s^3 to tame the
/// singular direction.
double polar_sphere_mean(double eps, double e) {
  const double d = 1.0 - eps;
  auto f = [&](double s) {
    const double th = std::numbers::pi * s * s * s;
    // 1 - |y|^2 = 4 eps d sin^2(th / 2) because eps + d = 1
    const double sn = std::sin(0.5 * th);
    const double gap = 4.0 * eps * d * sn * sn / (1.0 + std::hypot(eps + d * std::cos(th), d * std::sin(th)));
    return std::pow(gap, -e) * 3.0 * std::numbers::pi * s * s;
  };
  return GK::integrate(f, 0.0, 1.0, 20, 1e-12) / std::numbers::pi;
}

/// |D M_1 u| along the radius: the maximising radius is delta = 1 - eps, so
/// M_1 u(eps) = (1 - eps) mean(eps).
double fd_grad(double eps, double e) {
  const double k = 1e-3;
  auto m1 = [&](double s) { return (1.0 - s) * polar_ball_mean(s, e); };
  return std::abs((-m1(eps + 2 * k) + 8 * m1(eps + k) - 8 * m1(eps - k) + m1(eps - 2 * k)) / (12 * k));
}

struct Frozen {
  double eps, m0, s0, grad;
};
const Frozen kFrozen[] = {{0.2, 1.30739, 2.18301, 1.54447}, {0.1, 1.35517, 2.54148, 2.00014},
                          {0.05, 1.40188, 2.99420, 2.57106}};

}  // namespace

TEST(BallSingular, RadialOracleMatchesFrozenValues) {
  for (const auto& f : kFrozen) {
    auto v = ball_singular_radial_oracle(f.eps, 0.25);
    EXPECT_NEAR(v.ball_mean, f.m0, 1e-5) << f.eps;
    EXPECT_NEAR(v.sphere_mean, f.s0, 1e-5) << f.eps;
    EXPECT_NEAR(v.grad_norm, f.grad, 1e-5) << f.eps;
  }
}

TEST(BallSingular, PolarQuadratureMatchesFrozenValues) {
  for (const auto& f : kFrozen) {
    EXPECT_NEAR(polar_ball_mean(f.eps, 0.25), f.m0, 1e-5) << f.eps;
    EXPECT_NEAR(polar_sphere_mean(f.eps, 0.25), f.s0, 1e-5) << f.eps;
    EXPECT_NEAR(fd_grad(f.eps, 0.25), f.grad, 1e-4) << f.eps;
  }
}

TEST(BallSingular, RatioGrowsTowardsTheCentre) {
  double prev = 0.0;
  for (const auto& f : kFrozen) {
    const double ratio = f.grad / f.m0;
    EXPECT_GT(ratio, prev);
    prev = ratio;
  }
}

TEST(BallSingular, LpPowerClosedForm) {
  // integral over the disc of (1 - |y|)^(-1/2): 2 pi B(2, 1/2) = 8 pi / 3
  EXPECT_NEAR(ball_singular_lp_power(0.5), 8.0 * std::numbers::pi / 3.0, 1e-12);
}

TEST(BallSingular, RejectsBetaOutsideUnitInterval) {
  EXPECT_THROW(gen_ball_singular(2.0, 1.0, 0x1p-5), ConfigError);
  EXPECT_THROW(gen_ball_singular(2.0, 0.0, 0x1p-5), ConfigError);
}

TEST(RoomsCorridors, RoomValue) {
  RoomsCorridors rc;
  rc.pprime = 2.0;
  rc.p = 1.5;
  rc.K = 3;
  EXPECT_DOUBLE_EQ(rc.room_value(2), 4.0);
  EXPECT_DOUBLE_EQ(rc.value({2.125, 0.125}), 4.0);
  EXPECT_DOUBLE_EQ(rc.room_side(2), 0.25);
  EXPECT_DOUBLE_EQ(rc.corridor_width(2), 1.0 / 64.0);
}

TEST(RoomsCorridors, ValueIsContinuousAlongCorridor) {
  RoomsCorridors rc;
  rc.pprime = 2.5;
  rc.K = 3;
  for (int k = 1; k <= 3; ++k) {
    const double b = rc.room_lo(k) + rc.room_side(k);
    EXPECT_NEAR(rc.value({b + 1e-12, 0.0}), rc.room_value(k), 1e-9);
    EXPECT_NEAR(rc.value({k + 1.0 - 1e-12, 0.0}), rc.room_value(k + 1), 1e-9);
  }
}

TEST(RoomsCorridors, UnderResolvedCorridorIsRejected) {
  EXPECT_THROW(gen_rooms_corridors(2.5, 1.25, 1.5, 3, 0x1p-4), Error);
}

TEST(RoomsCorridors, PredictedMaximalOnHalfRoom) {
  RoomsCorridors rc;
  rc.pprime = 2.5;
  rc.alpha = 1.5;
  rc.K = 3;
  const Point x{1.3, 0.2};
  ASSERT_EQ(rc.half_room(x), 1);
  EXPECT_NEAR(rc.predicted_M(1, x), std::pow(0.2, 1.5) * std::pow(2.0, 2.0 / 2.5), 1e-12);
}

TEST(CubeAniso, ClosedFormForUnitProfile) {
  CubeAniso c{parse_profile("const:1"), 1.5};
  for (double x1 : {0.1, 0.5, 0.9}) EXPECT_NEAR(c.predicted(x1), std::pow(x1, 1.5), 1e-14);
}

TEST(CubeAniso, RejectsNegativeProfile) { EXPECT_THROW(parse_profile("affine:1,-1"), ConfigError); }

TEST(CubeAniso, GridMatchesClosedForm) {
  auto g = gen_cube_aniso(parse_profile("affine:1,1"), 1.5, 0x1p-6);
  CubeAniso c{parse_profile("affine:1,1"), 1.5};
  CellSet probes;
  for (auto cell : g.domain->cells) {
    Point x = g.domain->center(cell);
    if (x[0] > 0.25 && x[0] < 1.0 && x[1] > 0.0 && x[1] < 1.0) probes.push_back(cell);
  }
  auto m = cube_maximal(g.u, 1.5, &probes);
  double worst = 0.0;
  for (auto cell : probes) {
    const double want = c.predicted(g.domain->center(cell)[0]);
    worst = std::max(worst, std::abs(m[cell] - want) / want);
  }
  EXPECT_LT(worst, 0.05);
}

TEST(Punctured, ExponentsAndRadii) {
  auto m = make_punctured(0.5, 1.0, 3);
  EXPECT_EQ(m.beta, 2);
  for (int k = 1; k <= 3; ++k) EXPECT_DOUBLE_EQ(m.ball_radius(k), std::ldexp(1.0, -3 * k - 1));
  EXPECT_NEAR(m.predicted_ratio(), std::sqrt(2.0), 1e-15);
}

TEST(Punctured, DeltaAtMidpointBetweenPunctures) {
  auto m = make_punctured(0.5, 1.0, 2);
  // S_2 = {1/4 + j/64}; halfway between two neighbours
  EXPECT_DOUBLE_EQ(m.shape->delta({0.25 + 1.5 / 64.0, 0.0}), std::ldexp(1.0, -7));
}

TEST(Punctured, UnderResolvedPunctureIsRejected) { EXPECT_THROW(gen_punctured(0.5, 1.0, 3, 0x1p-10), ConfigError); }

TEST(Punctured, MaximalOfOneIsDeltaToTheAlpha) {
  auto g = gen_punctured(0.5, 1.0, 2, 0x1p-12);
  auto m = local_fractional_maximal(g.u, 0.5);
  const double gstep = 0.5 * g.domain->h;
  for (auto c : g.domain->cells) {
    const double d = g.domain->delta[c];
    if (d < 0.01) continue;
    ASSERT_LE(m[c], std::pow(d, 0.5) + 1e-12);
    ASSERT_GE(m[c], std::pow(d, 0.5) - 0.5 * std::pow(d, -0.5) * gstep - 1e-12);
  }
}
