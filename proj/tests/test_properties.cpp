#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fracmax/battery.hpp"
#include "fracmax/maximal_ops.hpp"
#include "fracmax/metric_discrete.hpp"

using namespace fracmax;
using nlohmann::json;

namespace {

constexpr int kCases = 12;

DomainPtr random_domain(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> side(0.6, 1.4);
  if (rng() % 2 == 0) return build_domain(json{{"type", "ball"}, {"center", {0.0, 0.0}}, {"radius", side(rng)}}, 0x1p-5);
  return build_domain(json{{"type", "box"}, {"lo", {0.0, 0.0}}, {"hi", {side(rng), side(rng)}}}, 0x1p-5);
}

/// Rough field: independent cell values, some negative, some zero.
ScalarField random_field(const DomainPtr& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> v(-2.0, 2.0);
  ScalarField f(d);
  for (auto c : d->cells) f[c] = (rng() % 5 == 0) ? 0.0 : v(rng);
  return f;
}

ScalarField add(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  for (auto c : a.domain->cells) out[c] = a[c] + b[c];
  return out;
}

ScalarField scaled(const ScalarField& a, double s) {
  ScalarField out = a;
  for (auto c : a.domain->cells) out[c] = s * a[c];
  return out;
}

}  // namespace

TEST(Property, Sublinearity) {
  std::mt19937_64 rng(101);
  for (int k = 0; k < kCases; ++k) {
    auto d = random_domain(rng);
    auto u = random_field(d, rng), v = random_field(d, rng);
    const double a = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    auto mu = local_fractional_maximal(u, a), mv = local_fractional_maximal(v, a);
    auto muv = local_fractional_maximal(add(u, v), a);
    for (auto c : d->cells) ASSERT_TRUE(leq_exact(muv[c], mu[c] + mv[c])) << k;
  }
}

TEST(Property, PowerOfTwoHomogeneityIsExact) {
  std::mt19937_64 rng(202);
  for (int k = 0; k < kCases; ++k) {
    auto d = random_domain(rng);
    auto u = random_field(d, rng);
    const double a = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const double s = std::ldexp(1.0, static_cast<int>(rng() % 9) - 4);
    auto m = local_fractional_maximal(u, a);
    auto ms = local_fractional_maximal(scaled(u, -s), a);
    for (auto c : d->cells) ASSERT_EQ(ms[c], s * m[c]) << k;
  }
}

TEST(Property, HomogeneityWithinRoundoff) {
  std::mt19937_64 rng(303);
  for (int k = 0; k < kCases; ++k) {
    auto d = random_domain(rng);
    auto u = random_field(d, rng);
    const double s = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    auto m = local_spherical_maximal(u, 1.0);
    auto ms = local_spherical_maximal(scaled(u, s), 1.0);
    for (auto c : d->cells) ASSERT_NEAR(ms[c], s * m[c], 1e-12 * std::max(1.0, s * m[c])) << k;
  }
}

TEST(Property, MonotoneInAbsoluteValue) {
  std::mt19937_64 rng(404);
  for (int k = 0; k < kCases; ++k) {
    auto d = random_domain(rng);
    auto u = random_field(d, rng);
    ScalarField v = u;
    for (auto c : d->cells) v[c] = -(std::abs(u[c]) + 0.25);
    auto mu = local_fractional_maximal(u, 1.0), mv = local_fractional_maximal(v, 1.0);
    for (auto c : d->cells) ASSERT_LE(mu[c], mv[c]) << k;
  }
}

TEST(Property, RestrictedLocalGlobalChain) {
  std::mt19937_64 rng(505);
  for (int k = 0; k < kCases; ++k) {
    auto d = random_domain(rng);
    auto u = random_field(d, rng);
    const double a = std::uniform_real_distribution<double>(0.0, 1.5)(rng);
    const double beta = std::uniform_real_distribution<double>(1.0, 30.0)(rng);
    auto mr = restricted_maximal(u, a, beta);
    auto ml = local_fractional_maximal(u, a);
    CellSet probes;
    for (std::size_t i = 0; i < d->cells.size(); i += 37) probes.push_back(d->cells[i]);
    auto mg = global_fractional_maximal(u, a, 3.0, {}, &probes, false);
    for (auto c : d->cells) ASSERT_LE(mr[c], ml[c]) << k;
    for (auto c : probes) ASSERT_LE(ml[c], mg[c]) << k;
  }
}

TEST(Property, FractionalAverageBelowMaximal) {
  std::mt19937_64 rng(606);
  for (int k = 0; k < kCases; ++k) {
    auto d = random_domain(rng);
    auto u = abs_field(random_field(d, rng));
    const double t = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    auto avg = fractional_average(u, 1.0, t);
    auto m = local_fractional_maximal(u, 1.0);
    for (auto c : d->cells)
      if (avg.valid(c)) ASSERT_TRUE(leq_exact(avg[c], m[c])) << k;
  }
}

TEST(Property, ScaleSetInclusion) {
  std::mt19937_64 rng(707);
  for (int k = 0; k < kCases; ++k) {
    auto d = random_domain(rng);
    auto u = random_field(d, rng);
    std::vector<double> small, big;
    for (int j = 1; j < 32; ++j) {
      big.push_back(j / 32.0);
      if (rng() % 3 == 0) small.push_back(j / 32.0);
    }
    if (small.empty()) small.push_back(0.5);
    auto a = maximal_over_scales(u, 0.5, small), b = maximal_over_scales(u, 0.5, big);
    for (auto c : d->cells) ASSERT_LE(a[c], b[c]) << k;
  }
}

TEST(Property, WorkerCountDoesNotChangeResults) {
  std::mt19937_64 rng(808);
  auto d = random_domain(rng);
  auto u = random_field(d, rng);
  const int saved = worker_count();
  worker_count() = 1;
  auto one = local_fractional_maximal(u, 1.0);
  worker_count() = 3;
  auto three = local_fractional_maximal(u, 1.0);
  worker_count() = saved;
  EXPECT_EQ(one.values, three.values);
}

TEST(Property, WhitneyInvariantsOnRandomMetricSpaces) {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  for (int k = 0; k < kCases; ++k) {
    const std::size_t N = 120;
    std::vector<Point> pts(N);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    std::vector<double> dist(N * N), w(N);
    std::vector<std::uint8_t> om(N);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) dist[i * N + j] = ::fracmax::dist(pts[i], pts[j], 2);
      w[i] = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
      om[i] = rng() % 6 != 0;
    }
    auto s = MetricMeasureSpace::from_matrix(dist, w, om, 2.0);
    const double t = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    auto cov = build_whitney(s, t);
    EXPECT_EQ(cov.coverage, 1.0) << k;
    EXPECT_EQ(cov.sandwich_violations, 0u) << k;
    auto pou = build_partition(s, cov);
    EXPECT_LE(pou.sum_error, 1e-10) << k;
    EXPECT_EQ(pou.lower_violations, 0u) << k;
    EXPECT_EQ(pou.range_violations, 0u) << k;
  }
}

TEST(Property, BandLimitedMembersAreReproducible) {
  auto d = build_domain(json{{"type", "ball"}, {"center", {0.0, 0.0}}, {"radius", 1.0}}, 0x1p-5);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto a = band_limited_member(seed).sample_on(d), b = band_limited_member(seed).sample_on(d);
    EXPECT_EQ(a.values, b.values);
  }
  EXPECT_NE(band_limited_member(1).sample_on(d).values, band_limited_member(2).sample_on(d).values);
}
