#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fracmax/core.hpp"
#include "fracmax/fields.hpp"

namespace fracmax {

/// Test function with its exact gradient.
struct BatteryMember {
  std::string name;
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;  // empty for singular members
  bool smooth = true;  // takes part in pointwise gradient checks
  bool bump = false;

  ScalarField sample_on(const DomainPtr& dom) const { return sample(dom, value); }
  VectorField gradient_on(const DomainPtr& dom) const {
    if (!gradient) throw FieldError(name + " has no analytic gradient");
    return sample_vector(dom, gradient);
  }
};

inline BatteryMember constant_member(double c) {
  std::string name = "const_" + std::to_string(c);
  name.erase(name.find_last_not_of('0') + 1);
  if (name.back() == '.') name.pop_back();
  return {name, [c](const Point&) { return c; }, [](const Point&) { return Point{0.0, 0.0}; }};
}

inline BatteryMember affine_member() {
  return {"affine", [](const Point& x) { return 1.0 + 0.5 * x[0] - 0.25 * x[1]; },
          [](const Point&) { return Point{0.5, -0.25}; }};
}

inline BatteryMember gaussian_member(std::string name, Point center, double sigma) {
  auto f = [center, sigma](const Point& x) {
    double r2 = (x[0] - center[0]) * (x[0] - center[0]) + (x[1] - center[1]) * (x[1] - center[1]);
    return std::exp(-r2 / (2.0 * sigma * sigma));
  };
  auto g = [f, center, sigma](const Point& x) {
    double v = f(x) / (sigma * sigma);
    return Point{-(x[0] - center[0]) * v, -(x[1] - center[1]) * v};
  };
  BatteryMember m{std::move(name), f, g};
  m.bump = true;
  return m;
}

inline BatteryMember bump_a() { return gaussian_member("bump_a", {0.2, -0.1}, 0.3); }
inline BatteryMember bump_b() { return gaussian_member("bump_b", {-0.3, 0.25}, 0.2); }

/// c0 + sum_k a_k cos(2 pi f_k . x + phi_k) with six seeded modes, frequencies
/// in [-1.5, 1.5]^2 and c0 = sum |a_k| + 1/2, so the field stays >= 1/2.
inline BatteryMember band_limited_member(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto uniform = [&gen](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53;
  };
  struct Mode {
    double a, fx, fy, phi;
  };
  std::vector<Mode> modes(6);
  double c0 = 0.5;
  for (auto& m : modes) {
    m.a = uniform(-1.0, 1.0);
    m.fx = uniform(-1.5, 1.5);
    m.fy = uniform(-1.5, 1.5);
    m.phi = uniform(0.0, 2.0 * std::numbers::pi);
    c0 += std::abs(m.a);
  }
  const double two_pi = 2.0 * std::numbers::pi;
  auto f = [modes, c0, two_pi](const Point& x) {
    double v = c0;
    for (const auto& m : modes) v += m.a * std::cos(two_pi * (m.fx * x[0] + m.fy * x[1]) + m.phi);
    return v;
  };
  auto g = [modes, two_pi](const Point& x) {
    Point d{0.0, 0.0};
    for (const auto& m : modes) {
      double s = -m.a * two_pi * std::sin(two_pi * (m.fx * x[0] + m.fy * x[1]) + m.phi);
      d[0] += s * m.fx;
      d[1] += s * m.fy;
    }
    return d;
  };
  return {"band_" + std::to_string(seed), f, g};
}

/// (1 - |x|)^(-beta/p) on the unit ball of R^2.
inline BatteryMember singular_ball_member(double p, double beta) {
  const double e = beta / p;
  BatteryMember m{"singular_ball", [e](const Point& x) { return std::pow(1.0 - std::hypot(x[0], x[1]), -e); }, {}};
  m.smooth = false;
  return m;
}

inline std::vector<BatteryMember> band_limited_battery() {
  std::vector<BatteryMember> out;
  for (std::uint64_t s = 1; s <= 5; ++s) out.push_back(band_limited_member(s));
  return out;
}

/// Every member used by the exact-inequality and norm checks on the unit disc.
inline std::vector<BatteryMember> full_battery() {
  std::vector<BatteryMember> out{constant_member(1.0), constant_member(2.5), affine_member(), bump_a(), bump_b()};
  for (auto& m : band_limited_battery()) out.push_back(m);
  out.push_back(singular_ball_member(2.0, 0.5));
  return out;
}

}  // namespace fracmax
