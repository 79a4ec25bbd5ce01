#pragma once

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "fracmax/core.hpp"
#include "fracmax/geometry.hpp"

namespace fracmax {

/// Open set on a uniform cell-centred grid. A cell belongs to the domain iff
/// its centre does; delta and its gradient come from the analytic geometry.
class GridDomain {
 public:
  int dim = 2;
  double h = 0.0;
  Point origin{0.0, 0.0};
  int nx = 0;
  int ny = 1;
  std::vector<std::uint8_t> mask;
  std::vector<double> delta;
  std::vector<Point> ddelta;
  std::vector<std::uint8_t> ridge;
  std::vector<std::size_t> cells;  // masked cell indices in row-major order
  ShapePtr geometry;
  nlohmann::json descriptor;
  bool under_resolved = false;

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  int col(std::size_t c) const { return static_cast<int>(c % nx); }
  int row(std::size_t c) const { return static_cast<int>(c / nx); }

  Point center(int i, int j) const {
    Point p{origin[0] + (i + 0.5) * h, 0.0};
    if (dim == 2) p[1] = origin[1] + (j + 0.5) * h;
    return p;
  }
  Point center(std::size_t c) const { return center(col(c), row(c)); }

  bool masked(std::size_t c) const { return mask[c] != 0; }
  bool in_grid(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

  /// Cell whose closed square contains x, if it lies in the grid.
  std::optional<std::size_t> locate(const Point& x) const {
    int i = static_cast<int>(std::floor((x[0] - origin[0]) / h));
    int j = dim == 2 ? static_cast<int>(std::floor((x[1] - origin[1]) / h)) : 0;
    if (!in_grid(i, j)) return std::nullopt;
    return index(i, j);
  }

  double cell_volume() const { return dim == 2 ? h * h : h; }
  double max_delta() const {
    double m = 0.0;
    for (auto c : cells) m = std::max(m, delta[c]);
    return m;
  }

  /// True when the straight segment between two masked cell centres stays in
  /// the open set. Two balls B(a, delta_a), B(b, delta_b) overlapping along the
  /// segment settle it; otherwise the segment is sphere-traced.
  bool connected(std::size_t a, std::size_t b) const {
    if (!masked(a) || !masked(b)) return false;
    const Point pa = center(a), pb = center(b);
    const double len = dist(pa, pb, dim);
    if (delta[a] + delta[b] > len * (1.0 + 1e-12)) return true;
    Point dir = scale(sub(pb, pa), 1.0 / len);
    double s = 0.0;
    for (int step = 0; step < 64; ++step) {
      Point p = add(pa, scale(dir, s));
      double d = geometry->delta(p);
      if (d <= 1e-14 * std::max(1.0, len)) return false;
      s += d;
      if (s >= len || s + delta[b] > len * (1.0 + 1e-12)) return true;
    }
    return false;
  }

  nlohmann::json metadata() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["h"] = h;
    j["origin"] = detail::point_to_json(origin, dim);
    j["shape"] = dim == 2 ? nlohmann::json::array({nx, ny}) : nlohmann::json::array({nx});
    j["geometry"] = descriptor;
    j["masked_cells"] = cells.size();
    j["under_resolved"] = under_resolved;
    std::size_t ridge_count = 0;
    for (auto c : cells) ridge_count += ridge[c];
    j["ridge_cells"] = ridge_count;
    return j;
  }

  /// Row-major delta grid, zero on unmasked cells, one grid row per line.
  void write_delta_csv(std::ostream& os) const {
    os.precision(17);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (i) os << ',';
        os << delta[index(i, j)];
      }
      os << '\n';
    }
  }
};

using DomainPtr = std::shared_ptr<const GridDomain>;

/// Axis-aligned window that restricts the grid. The grid then starts exactly
/// at window.lo, so dyadic windows give dyadic cell boundaries.
struct GridWindow {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
};

/// Builds the grid for an analytic shape at spacing h. Without a window the
/// grid covers the bounding box plus one padding cell, aligned so that cell
/// boundaries are integer multiples of h.
inline DomainPtr build_domain(ShapePtr shape, double h, std::optional<GridWindow> window = std::nullopt) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid spacing must be positive");
  if (!shape->has_interior()) throw DomainError("degenerate domain");
  auto dom = std::make_shared<GridDomain>();
  dom->dim = shape->dim();
  dom->h = h;
  dom->geometry = shape;
  dom->descriptor = shape->to_json();
  dom->under_resolved = h > shape->min_feature();

  Point lo, hi;
  if (window) {
    lo = window->lo;
    hi = window->hi;
  } else {
    auto bb = shape->bbox();
    for (int k = 0; k < dom->dim; ++k) {
      lo[k] = std::floor(bb.lo[k] / h) * h - h;
      hi[k] = std::ceil(bb.hi[k] / h) * h + h;
    }
  }
  dom->origin = {lo[0], dom->dim == 2 ? lo[1] : 0.0};
  auto count = [&](int k) {
    double n = std::round((hi[k] - lo[k]) / h);
    if (n < 1.0 || n > 4.0e8) throw ConfigError("grid window yields an invalid cell count");
    return static_cast<int>(n);
  };
  dom->nx = count(0);
  dom->ny = dom->dim == 2 ? count(1) : 1;
  if (static_cast<double>(dom->nx) * dom->ny > 2.0e8) throw ConfigError("grid too large");

  const std::size_t total = dom->size();
  dom->mask.assign(total, 0);
  dom->delta.assign(total, 0.0);
  dom->ddelta.assign(total, Point{0.0, 0.0});
  dom->ridge.assign(total, 0);

  std::vector<std::uint8_t> tie(total, 0);
  parallel_for(total, [&](std::size_t c) {
    Point x = dom->center(c);
    if (!shape->contains(x)) return;
    Nearest n = shape->boundary_nearest(x);
    if (!(n.distance > 0.0)) return;
    dom->mask[c] = 1;
    dom->delta[c] = n.distance;
    dom->ddelta[c] = scale(sub(x, n.foot), 1.0 / n.distance);
    tie[c] = n.unique ? 0 : 1;
  });
  for (std::size_t c = 0; c < total; ++c)
    if (dom->mask[c]) dom->cells.push_back(c);
  if (dom->cells.empty()) throw DomainError("degenerate domain");

  // Ridge: nearest boundary point not unique, or delta's gradient turns
  // sharply between neighbouring cells (the ridge passes between them).
  parallel_for(dom->cells.size(), [&](std::size_t k) {
    const std::size_t c = dom->cells[k];
    if (tie[c]) {
      dom->ridge[c] = 1;
      return;
    }
    const int i = dom->col(c), j = dom->row(c);
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int s = 0; s < (dom->dim == 2 ? 4 : 2); ++s) {
      int a = i + di[s], b = j + dj[s];
      if (!dom->in_grid(a, b)) continue;
      std::size_t nb = dom->index(a, b);
      if (!dom->mask[nb]) continue;
      if (dist(dom->ddelta[c], dom->ddelta[nb], dom->dim) > 0.5) {
        dom->ridge[c] = 1;
        return;
      }
    }
  });
  return dom;
}

inline DomainPtr build_domain(const nlohmann::json& descriptor, double h, std::optional<GridWindow> window = std::nullopt) {
  return build_domain(make_shape(descriptor), h, window);
}

}  // namespace fracmax
