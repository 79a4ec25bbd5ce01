#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace fracmax {

/// Point in R^n, n <= 2. Unused trailing coordinates are zero.
using Point = std::array<double, 2>;

inline constexpr int kMaxDim = 2;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class FieldError : public Error {
 public:
  using Error::Error;
};

class OperatorError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline double norm(const Point& p, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += p[k] * p[k];
  return std::sqrt(s);
}

inline Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point add(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point scale(const Point& a, double s) { return {a[0] * s, a[1] * s}; }

inline double dist(const Point& a, const Point& b, int dim) { return norm(sub(a, b), dim); }

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    default: return std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
  }
}

/// Parses "p/q", an integer, or a decimal literal. Exact rationals keep the
/// radius grids reproducible when h and t are dyadic.
inline double parse_number(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) throw ConfigError("empty numeric value");
  auto to_double = [](std::string_view s) {
    std::string buf(s);
    char* end = nullptr;
    double v = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str() || *end != '\0') throw ConfigError("not a number: '" + buf + "'");
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    double num = to_double(trim(text.substr(0, slash)));
    double den = to_double(trim(text.substr(slash + 1)));
    if (den == 0.0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return to_double(text);
}

/// Worker count for data-parallel loops. Defaults to FRACMAX_THREADS or 1.
inline int& worker_count() {
  static int count = [] {
    if (const char* env = std::getenv("FRACMAX_THREADS")) {
      int v = std::atoi(env);
      if (v > 0) return v;
    }
    return 1;
  }();
  return count;
}

/// Runs fn(i) for i in [0, n). Every index writes only its own output slot,
/// so the result does not depend on the worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int workers = std::max(1, worker_count());
  if (workers == 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// (max - min) / min over positive values; 0 for fewer than two values.
inline double relative_spread(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo <= 0.0) return *hi > 0.0 ? INFINITY : 0.0;
  return (*hi - *lo) / *lo;
}

/// |b - a| / |a|.
inline double relative_drift(double a, double b) {
  if (a == 0.0) return b == 0.0 ? 0.0 : INFINITY;
  return std::abs(b - a) / std::abs(a);
}

/// Slack for inequalities that hold exactly in real arithmetic but whose two
/// sides are evaluated by different floating-point expressions.
inline constexpr double kRoundoff = 1e-12;

inline bool leq_exact(double lhs, double rhs) {
  return lhs <= rhs + kRoundoff * std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

}  // namespace fracmax
