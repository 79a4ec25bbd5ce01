#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "fracmax/core.hpp"

namespace fracmax {

/// Lattice offsets sorted by squared length (ties by dj, then di). Offsets of
/// equal length form a group; a ball {d < r} around a cell centre is always a
/// prefix made of whole groups, so one walk over the prefix visits every
/// ball radius in increasing order.
struct BallStencil {
  int dim = 2;
  int stride = 0;  // row length of the grid the linear offsets refer to
  std::vector<std::int64_t> lin;
  std::vector<int> di, dj;
  std::vector<std::int64_t> group_s;   // squared length of each group, in cells^2
  std::vector<std::size_t> group_end;  // offsets [0, group_end[g]) have length <= group g
  std::vector<int> group_reach;        // max |di|, |dj| over offsets up to group g

  std::size_t groups() const { return group_s.size(); }
  std::int64_t max_s() const { return group_s.empty() ? -1 : group_s.back(); }

  /// Group radii in physical units for spacing h.
  std::vector<double> radii(double h) const {
    std::vector<double> r(group_s.size());
    for (std::size_t g = 0; g < r.size(); ++g) r[g] = std::sqrt(static_cast<double>(group_s[g])) * h;
    return r;
  }
};

using StencilPtr = std::shared_ptr<const BallStencil>;

namespace detail {

inline StencilPtr make_ball_stencil(int dim, int stride, std::int64_t max_s) {
  auto st = std::make_shared<BallStencil>();
  st->dim = dim;
  st->stride = stride;
  const int reach = static_cast<int>(std::floor(std::sqrt(static_cast<double>(max_s)))) + 1;
  struct Off {
    std::int64_t s;
    int dj, di;
  };
  std::vector<Off> offs;
  for (int b = (dim == 2 ? -reach : 0); b <= (dim == 2 ? reach : 0); ++b)
    for (int a = -reach; a <= reach; ++a) {
      std::int64_t s = static_cast<std::int64_t>(a) * a + static_cast<std::int64_t>(b) * b;
      if (s <= max_s) offs.push_back({s, b, a});
    }
  std::sort(offs.begin(), offs.end(), [](const Off& x, const Off& y) {
    return std::tie(x.s, x.dj, x.di) < std::tie(y.s, y.dj, y.di);
  });
  st->lin.reserve(offs.size());
  int cur_reach = 0;
  for (std::size_t k = 0; k < offs.size(); ++k) {
    st->lin.push_back(offs[k].di + static_cast<std::int64_t>(offs[k].dj) * stride);
    st->di.push_back(offs[k].di);
    st->dj.push_back(offs[k].dj);
    cur_reach = std::max({cur_reach, std::abs(offs[k].di), std::abs(offs[k].dj)});
    if (k + 1 == offs.size() || offs[k + 1].s != offs[k].s) {
      st->group_s.push_back(offs[k].s);
      st->group_end.push_back(k + 1);
      st->group_reach.push_back(cur_reach);
    }
  }
  return st;
}

}  // namespace detail

/// Shared stencil covering squared offset lengths up to at least max_s.
inline StencilPtr ball_stencil(int dim, int stride, std::int64_t max_s) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, StencilPtr> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, dim == 2 ? stride : 0);
  auto it = cache.find(key);
  if (it != cache.end() && it->second->max_s() >= max_s) return it->second;
  std::int64_t want = max_s;
  if (it != cache.end()) want = std::max(want, it->second->max_s());
  auto st = detail::make_ball_stencil(dim, dim == 2 ? stride : 0, want);
  cache[key] = st;
  return st;
}

/// Stencil reaching physical radius r on a grid with spacing h.
inline StencilPtr ball_stencil_for_radius(int dim, int stride, double r, double h) {
  double cells = r / h + 1.0;
  return ball_stencil(dim, stride, static_cast<std::int64_t>(std::ceil(cells * cells)));
}

/// Uniform circle sampling: m nodes at angles 2 pi (k + 1/2) / m, m even so
/// that antipodal nodes pair up. For n = 1 the "circle" is the two endpoints.
struct CircleRule {
  int m = 0;
  std::vector<double> cos_t, sin_t;
};

inline int circle_samples(double r, double h) {
  int m = std::max(16, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r / h)));
  return m + (m & 1);
}

inline const CircleRule& circle_rule(int m) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<CircleRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[m];
  if (!slot) {
    slot = std::make_unique<CircleRule>();
    slot->m = m;
    slot->cos_t.resize(m);
    slot->sin_t.resize(m);
    for (int k = 0; k < m; ++k) {
      double th = 2.0 * std::numbers::pi * (k + 0.5) / m;
      slot->cos_t[k] = std::cos(th);
      slot->sin_t[k] = std::sin(th);
    }
  }
  return *slot;
}

}  // namespace fracmax
