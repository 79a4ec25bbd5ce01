#pragma once

// Generators for the four sharpness constructions, each with the closed-form
// quantities the construction predicts.

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fracmax/core.hpp"
#include "fracmax/domain_grid.hpp"
#include "fracmax/fields.hpp"
#include "fracmax/geometry.hpp"

namespace fracmax {

struct ExampleSpec {
  std::string id;
  nlohmann::json params;
  nlohmann::json predictions;
  bool under_resolved = false;
};

struct GeneratedExample {
  ExampleSpec spec;
  DomainPtr domain;
  ScalarField u;
};

// ---------------------------------------------------------------------------
// Singular field on the unit ball

struct BallSingularValues {
  double delta = 0.0;
  double ball_mean = 0.0;    // mean of u over B(x, 1 - |x|), i.e. M_0 u(x)
  double sphere_mean = 0.0;  // mean of u over the boundary sphere, the limit of S_0 u(x)
  double tangential = 0.0;   // mean of u (1 - nu . x/|x|) over the same sphere
  double grad_norm = 0.0;    // |D M_1 u(x)| = |ball_mean - 2 tangential|
};

/// One-dimensional quadratures for u = (1 - |y|)^(-e) on the unit disc at
/// |x| = eps, with the maximising radius 1 - eps and alpha = 1. The ball
/// integral runs over circles |y| = s (arc length inside B(x, 1 - eps)); the
/// sphere integrals run over the angle around x.
inline BallSingularValues ball_singular_radial_oracle(double eps, double e) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double delta = 1.0 - eps;
  auto u = [e](double s) { return std::pow(1.0 - s, -e); };
  const double pi = std::numbers::pi;
  const double split = delta - eps;  // circles below this radius lie inside the ball
  double inner = ts.integrate([&](double s) { return u(s) * 2.0 * pi * s; }, 0.0, split);
  double outer = ts.integrate(
      [&](double s, double sc) {
        const double one_minus_s = s > 0.5 * (split + 1.0) ? sc : 1.0 - s;
        const double c = std::clamp((s * s + eps * eps - delta * delta) / (2.0 * s * eps), -1.0, 1.0);
        return std::pow(one_minus_s, -e) * 2.0 * s * std::acos(c);
      },
      split, 1.0);
  BallSingularValues v;
  v.delta = delta;
  v.ball_mean = (inner + outer) / (pi * delta * delta);
  // On the sphere y = x + delta (cos t, sin t), 1 - |y| = 2 eps delta (1 - cos t) / (1 + |y|)
  // since eps + delta = 1; it vanishes like t^2 at t = 0. With t = w^2 the
  // weight (1 - |y|)^(-e) dt becomes a bounded multiple of w^(1 - 4e) dw.
  auto weight = [&](double w) {
    const double t = w * w, half = 0.5 * t;
    const double sinc = half > 0.0 ? std::sin(half) / half : 1.0;
    const double norm_y = std::sqrt(eps * eps + delta * delta + 2.0 * eps * delta * std::cos(t));
    const double scaled = eps * delta * sinc * sinc / (1.0 + norm_y);  // (1 - |y|) / w^4
    return std::pow(scaled, -e) * 2.0 * std::pow(w, 1.0 - 4.0 * e);
  };
  const double wmax = std::sqrt(pi);
  v.sphere_mean = ts.integrate(weight, 0.0, wmax) / pi;
  v.tangential = ts.integrate([&](double w) { return weight(w) * (1.0 - std::cos(w * w)); }, 0.0, wmax) / pi;
  v.grad_norm = std::abs(v.ball_mean - 2.0 * v.tangential);
  return v;
}

/// Integral of u^p over the unit disc: 2 pi / ((1 - beta)(2 - beta)).
inline double ball_singular_lp_power(double beta) { return 2.0 * std::numbers::pi / ((1.0 - beta) * (2.0 - beta)); }

inline GeneratedExample gen_ball_singular(double p, double beta, double h) {
  if (!(p > 1.0)) throw ConfigError("p must exceed 1");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  auto shape = std::make_shared<Ball>(2, Point{0.0, 0.0}, 1.0);
  auto dom = build_domain(shape, h);
  const double e = beta / p;
  auto u = sample(dom, [e](const Point& x) { return std::pow(1.0 - std::hypot(x[0], x[1]), -e); });
  for (auto c : dom->cells)
    if (dom->delta[c] < 0.5 * h) u.flags[c] |= kExcluded;
  GeneratedExample g{{"ball_singular", {{"p", p}, {"beta", beta}, {"h", h}, {"n", 2}}, {}, dom->under_resolved}, dom,
                     std::move(u)};
  nlohmann::json probes = nlohmann::json::array();
  // the sphere means are finite only for beta / p < 1/2
  for (double eps : {0.2, 0.1, 0.05}) {
    if (!(e < 0.5)) break;
    auto o = ball_singular_radial_oracle(eps, e);
    probes.push_back({{"abs_x", eps},
                      {"maximizing_radius", o.delta},
                      {"M0", o.ball_mean},
                      {"S0_limit", o.sphere_mean},
                      {"grad_M1", o.grad_norm},
                      {"ratio_M0", o.grad_norm / o.ball_mean},
                      {"ratio_M0_S0", o.grad_norm / (o.ball_mean + o.sphere_mean)},
                      {"half_sphere_lower_bound", 2.0 / (2.0 * std::pow(2.0 * eps, e))}});
  }
  g.spec.predictions = {{"u_at_origin", 1.0},
                        {"lp_norm_p_power", ball_singular_lp_power(beta)},
                        {"l1_norm", 2.0 * std::numbers::pi / ((1.0 - e) * (2.0 - e))},
                        {"probes", probes}};
  return g;
}

// ---------------------------------------------------------------------------
// Rooms and corridors

struct RoomsCorridors {
  double pprime = 2.0, p = 1.0, alpha = 1.0;
  int K = 1;
  int n = 2;

  double room_side(int k) const { return std::ldexp(1.0, -k); }
  double corridor_width(int k) const { return std::ldexp(1.0, -3 * k); }
  double room_value(int k) const { return std::pow(2.0, k * n / pprime); }
  double room_lo(int k) const { return static_cast<double>(k); }

  /// u: constant on rooms, linear in x_1 along each corridor.
  double value(const Point& x) const {
    for (int k = 1; k <= K; ++k) {
      const double a = room_lo(k), b = a + room_side(k);
      if (x[0] <= b && x[0] >= a) return room_value(k);
      if (x[0] > b && x[0] < k + 1.0) {
        const double s = (x[0] - b) / (k + 1.0 - b);
        return room_value(k) + s * (room_value(k + 1) - room_value(k));
      }
    }
    return room_value(K + 1);
  }

  /// Index k of the room whose half-size concentric cube contains x, or 0.
  int half_room(const Point& x) const {
    for (int k = 1; k <= K; ++k) {
      const double s = room_side(k), cx = room_lo(k) + 0.5 * s, cy = 0.5 * s;
      if (std::abs(x[0] - cx) < 0.25 * s && std::abs(x[1] - cy) < 0.25 * s) return k;
    }
    return 0;
  }

  double dist_to_room_complement(int k, const Point& x) const {
    const double s = room_side(k);
    return std::min({x[0] - room_lo(k), room_lo(k) + s - x[0], x[1], s - x[1]});
  }

  /// Predicted M_{alpha,Omega}u on the half room.
  double predicted_M(int k, const Point& x) const {
    return std::pow(dist_to_room_complement(k, x), alpha) * room_value(k);
  }

  /// Exponent of the lower bound |DM| >= C 2^(-k (alpha - 1 - n/p')).
  double gradient_scale(int k) const { return std::pow(2.0, -k * (alpha - 1.0 - n / pprime)); }

  nlohmann::json descriptor() const {
    nlohmann::json boxes = nlohmann::json::array();
    for (int k = 1; k <= K; ++k) {
      boxes.push_back({{"lo", {room_lo(k), 0.0}}, {"hi", {room_lo(k) + room_side(k), room_side(k)}}});
      boxes.push_back({{"lo", {room_lo(k) + room_side(k), 0.0}}, {"hi", {k + 1.0, corridor_width(k)}}});
    }
    return {{"type", "box_union"}, {"boxes", boxes}};
  }
};

inline GeneratedExample gen_rooms_corridors(double pprime, double p, double alpha, int K, double h,
                                            RoomsCorridors* model_out = nullptr) {
  if (!(p > 1.0) || !(pprime > p)) throw ConfigError("rooms_corridors needs 1 < p < p'");
  if (!(alpha >= 1.0)) throw ConfigError("rooms_corridors needs alpha >= 1");
  if (K < 1 || K > 4) throw ConfigError("rooms_corridors supports 1 <= K <= 4");
  RoomsCorridors m{pprime, p, alpha, K, 2};
  if (m.corridor_width(K) < 4.0 * h) throw ConfigError("corridor under-resolved");
  auto dom = build_domain(m.descriptor(), h);
  auto u = sample(dom, [&m](const Point& x) { return m.value(x); });
  nlohmann::json rooms = nlohmann::json::array();
  for (int k = 1; k <= K; ++k)
    rooms.push_back({{"k", k},
                     {"u_on_room", m.room_value(k)},
                     {"gradient_scale", m.gradient_scale(k)},
                     {"gradient_constant_lower", alpha * std::pow(0.25, alpha - 1.0)}});
  GeneratedExample g{{"rooms_corridors",
                      {{"pprime", pprime}, {"p", p}, {"alpha", alpha}, {"K", K}, {"h", h}, {"n", 2}},
                      {{"closed_form", "M = dist(x, complement of B_k)^alpha * 2^(k n / p') on the half room"},
                       {"rooms", rooms}},
                      dom->under_resolved},
                     dom, std::move(u)};
  if (model_out) *model_out = m;
  return g;
}

// ---------------------------------------------------------------------------
// Cube operator on a box with u(x) = v(x_1)

/// Non-negative profile v on [0, 2] with its primitive V(s) = int_0^s v.
struct Profile {
  std::string spec;
  std::function<double(double)> v;
  std::function<double(double)> primitive;
};

/// "const:c" or "affine:a,b" (v(t) = a + b t).
inline Profile parse_profile(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("profile must look like const:c or affine:a,b");
  const std::string kind = spec.substr(0, colon), args = spec.substr(colon + 1);
  Profile pr;
  pr.spec = spec;
  if (kind == "const") {
    double c = parse_number(args);
    pr.v = [c](double) { return c; };
    pr.primitive = [c](double s) { return c * s; };
  } else if (kind == "affine") {
    auto comma = args.find(',');
    if (comma == std::string::npos) throw ConfigError("affine profile needs a,b");
    double a = parse_number(args.substr(0, comma)), b = parse_number(args.substr(comma + 1));
    pr.v = [a, b](double t) { return a + b * t; };
    pr.primitive = [a, b](double s) { return a * s + 0.5 * b * s * s; };
  } else {
    throw ConfigError("unknown profile kind '" + kind + "'");
  }
  for (int k = 0; k <= 64; ++k)
    if (pr.v(2.0 * k / 64.0) < 0.0) throw ConfigError("profile v must be non-negative");
  return pr;
}

struct CubeAniso {
  Profile profile;
  double alpha = 1.5;

  /// Closed form on (0,1)^2: (1/2) x_1^(alpha-1) V(2 x_1).
  double predicted(double x1) const { return 0.5 * std::pow(x1, alpha - 1.0) * profile.primitive(2.0 * x1); }
  double predicted_d1(double x1) const {
    return 0.5 * (alpha - 1.0) * std::pow(x1, alpha - 2.0) * profile.primitive(2.0 * x1) +
           std::pow(x1, alpha - 1.0) * profile.v(2.0 * x1);
  }
  /// Lower bound v(2 x_1) (1/2)^(alpha - 1) on (1/2, 1) x (0, 1).
  double lower_bound(double x1) const { return profile.v(2.0 * x1) * std::pow(0.5, alpha - 1.0); }
};

inline GeneratedExample gen_cube_aniso(const Profile& v, double alpha, double h) {
  if (!(alpha > 1.0)) throw ConfigError("cube_aniso needs alpha > 1");
  auto dom = build_domain(nlohmann::json{{"type", "box"}, {"lo", {0.0, -1.0}}, {"hi", {2.0, 2.0}}}, h);
  auto u = sample(dom, [&v](const Point& x) { return v.v(x[0]); });
  GeneratedExample g{{"cube_aniso",
                      {{"profile", v.spec}, {"alpha", alpha}, {"h", h}, {"n", 2}},
                      {{"closed_form", "(1/2) x1^(alpha-1) int_0^(2 x1) v"},
                       {"derivative", "(1/2)(alpha-1) x1^(alpha-2) int_0^(2 x1) v + x1^(alpha-1) v(2 x1)"},
                       {"lower_bound", "v(2 x1) (1/2)^(alpha-1) on (1/2,1) x (0,1)"}},
                      dom->under_resolved},
                     dom, std::move(u)};
  return g;
}

// ---------------------------------------------------------------------------
// Punctured interval

struct Punctured {
  double alpha = 0.5;
  double r_exp = 1.0;
  int K = 1;
  int beta = 1;
  ShapePtr shape;

  /// Half spacing of S_k, which is also the radius of the disjoint balls around its points.
  double ball_radius(int k) const { return std::ldexp(1.0, -(1 + beta) * k - 1); }
  double spacing(int k) const { return std::ldexp(1.0, -(1 + beta) * k); }

  /// Growth factor of the shell integrals of |DM|^r.
  double predicted_ratio() const { return std::pow(2.0, (1.0 + beta) * (1.0 - alpha) * r_exp - 1.0); }

  double shell_lo(int k) const { return std::ldexp(1.0, -k); }
  double shell_hi(int k) const { return std::ldexp(1.0, 1 - k); }

  /// Shell k = [2^-k, 2^-k+1] as its own grid, spacing h_k = h 2^((1+beta)(K-k)).
  /// The innermost shell has no puncture at its left end, so its window
  /// reaches two spacings further left; integrate over [shell_lo, shell_hi] only.
  DomainPtr shell_domain(int k, double h_finest) const {
    if (k < 1 || k > K) throw ConfigError("shell index out of range");
    const double hk = std::ldexp(h_finest, (1 + beta) * (K - k));
    const double lo = k == K ? shell_lo(k) - 2.0 * spacing(k) : shell_lo(k);
    GridWindow w{{lo, 0.0}, {shell_hi(k), 0.0}};
    return build_domain(shape, hk, w);
  }
};

inline Punctured make_punctured(double alpha, double r_exp, int K) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("punctured needs alpha in (0, 1)");
  if (!(r_exp > 0.0)) throw ConfigError("punctured needs r > 0");
  if (K < 1 || K > 8) throw ConfigError("punctured supports 1 <= K <= 8");
  Punctured m;
  m.alpha = alpha;
  m.r_exp = r_exp;
  m.K = K;
  m.beta = static_cast<int>(std::ceil(1.0 / ((1.0 - alpha) * r_exp) - 1e-12));
  if (m.beta > 6) throw ConfigError("punctured: beta too large for the grid backend");
  std::vector<Point> pts;
  for (int k = 1; k <= K; ++k) {
    const std::int64_t count = std::int64_t{1} << (m.beta * k);
    for (std::int64_t j = 1; j <= count; ++j)
      pts.push_back({std::ldexp(1.0, -k) + static_cast<double>(j) * m.spacing(k), 0.0});
  }
  auto ball = std::make_shared<Ball>(1, Point{0.0, 0.0}, 2.0);
  auto removed = std::make_shared<PointSet>(1, std::move(pts));
  m.shape = std::make_shared<Difference>(ball, removed);
  return m;
}

inline GeneratedExample gen_punctured(double alpha, double r_exp, int K, double h, Punctured* model_out = nullptr) {
  Punctured m = make_punctured(alpha, r_exp, K);
  if (m.ball_radius(K) < 4.0 * h) throw ConfigError("puncture under-resolved");
  auto dom = build_domain(m.shape, h);
  auto u = constant_field(dom, 1.0);
  nlohmann::json shells = nlohmann::json::array();
  for (int k = 1; k <= K; ++k)
    shells.push_back({{"k", k}, {"ball_radius", m.ball_radius(k)}, {"points", std::int64_t{1} << (m.beta * k)}});
  GeneratedExample g{{"punctured",
                      {{"alpha", alpha}, {"r", r_exp}, {"K", K}, {"beta", m.beta}, {"h", h}, {"n", 1}},
                      {{"identity", "M_{alpha,Omega} 1 = delta^alpha"},
                       {"gradient_near_puncture", "alpha |y - x|^(alpha - 1)"},
                       {"shell_ratio", m.predicted_ratio()},
                       {"shells", shells}},
                      dom->under_resolved},
                     dom, std::move(u)};
  if (model_out) *model_out = m;
  return g;
}

}  // namespace fracmax
