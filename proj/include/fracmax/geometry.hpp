#pragma once

// Analytic descriptions of open sets in R^n (n = 1, 2) with exact Euclidean
// distance to the complement. Every shape answers "which boundary point is
// nearest", so callers get both delta and its a.e. gradient.

#include <json.hpp>

#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fracmax/core.hpp"

namespace fracmax {

/// Nearest point of some closed set to a query point.
struct Nearest {
  double distance = std::numeric_limits<double>::infinity();
  Point foot{};
  bool unique = true;
};

namespace detail {

inline double tie_tolerance(double d) { return 1e-13 * std::max(1.0, std::abs(d)); }

inline void merge_nearest(Nearest& best, const Nearest& cand, int dim) {
  if (cand.distance < best.distance - tie_tolerance(cand.distance)) {
    best = cand;
  } else if (cand.distance <= best.distance + tie_tolerance(cand.distance)) {
    if (!cand.unique || dist(cand.foot, best.foot, dim) > 1e-12) best.unique = false;
  }
}

inline Point point_from_json(const nlohmann::json& j) {
  Point p{0.0, 0.0};
  if (j.is_number()) {
    p[0] = j.get<double>();
    return p;
  }
  if (!j.is_array() || j.empty() || j.size() > 2) throw ConfigError("point must have 1 or 2 coordinates");
  for (std::size_t k = 0; k < j.size(); ++k) p[k] = j[k].get<double>();
  return p;
}

inline int point_dim(const nlohmann::json& j) { return j.is_number() ? 1 : static_cast<int>(j.size()); }

inline nlohmann::json point_to_json(const Point& p, int dim) {
  nlohmann::json j = nlohmann::json::array();
  for (int k = 0; k < dim; ++k) j.push_back(p[k]);
  return j;
}

}  // namespace detail

struct BoundingBox {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
};

class Shape {
 public:
  explicit Shape(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("shape dimension must be 1 or 2");
  }
  virtual ~Shape() = default;

  int dim() const { return dim_; }

  /// Membership in the open set.
  virtual bool contains(const Point& x) const = 0;
  virtual bool closure_contains(const Point& x) const = 0;
  /// For x in the open set: nearest point of the complement.
  virtual Nearest boundary_nearest(const Point& x) const = 0;
  /// For x outside the closure: nearest point of the closure.
  virtual Nearest exterior_nearest(const Point& x) const = 0;
  /// Largest r such that the open cube of half-side r around x lies in the set.
  virtual double linf_inner(const Point& x) const = 0;
  /// Chebyshev distance from x to the closure.
  virtual double linf_outer(const Point& x) const = 0;
  virtual BoundingBox bbox() const = 0;
  /// Smallest length scale the shape must resolve (diameter, width, spacing).
  virtual double min_feature() const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual bool has_interior() const { return true; }

  double delta(const Point& x) const { return contains(x) ? boundary_nearest(x).distance : 0.0; }

 private:
  int dim_;
};

using ShapePtr = std::shared_ptr<const Shape>;

class Ball final : public Shape {
 public:
  Ball(int dim, Point center, double radius) : Shape(dim), c_(center), r_(radius) {
    if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  }

  bool contains(const Point& x) const override { return dist(x, c_, dim()) < r_; }
  bool closure_contains(const Point& x) const override { return dist(x, c_, dim()) <= r_; }

  Nearest boundary_nearest(const Point& x) const override {
    Point v = sub(x, c_);
    double len = norm(v, dim());
    Nearest n;
    n.distance = r_ - len;
    if (len == 0.0) {
      n.foot = add(c_, Point{r_, 0.0});
      n.unique = false;
    } else {
      n.foot = add(c_, scale(v, r_ / len));
    }
    return n;
  }

  Nearest exterior_nearest(const Point& x) const override {
    Point v = sub(x, c_);
    double len = norm(v, dim());
    Nearest n;
    n.distance = std::max(0.0, len - r_);
    n.foot = len > 0.0 ? add(c_, scale(v, r_ / len)) : c_;
    return n;
  }

  double linf_inner(const Point& x) const override {
    const int n = dim();
    double s = 0.0, q = 0.0;
    for (int k = 0; k < n; ++k) {
      double a = std::abs(x[k] - c_[k]);
      s += a;
      q += a * a;
    }
    double disc = s * s - n * (q - r_ * r_);
    if (disc < 0.0) return 0.0;
    return std::max(0.0, (-s + std::sqrt(disc)) / n);
  }

  double linf_outer(const Point& x) const override {
    // Smallest r such that the closed cube [x - r, x + r] meets the closed ball.
    auto gap = [&](double r) {
      double s = 0.0;
      for (int k = 0; k < dim(); ++k) {
        double d = std::max(0.0, std::abs(x[k] - c_[k]) - r);
        s += d * d;
      }
      return std::sqrt(s);
    };
    if (gap(0.0) <= r_) return 0.0;
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k < dim(); ++k) hi = std::max(hi, std::abs(x[k] - c_[k]));
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (gap(mid) <= r_ ? hi : lo) = mid;
    }
    return hi;
  }

  BoundingBox bbox() const override {
    BoundingBox b;
    for (int k = 0; k < dim(); ++k) {
      b.lo[k] = c_[k] - r_;
      b.hi[k] = c_[k] + r_;
    }
    return b;
  }

  double min_feature() const override { return 2.0 * r_; }

  nlohmann::json to_json() const override {
    return {{"type", "ball"}, {"center", detail::point_to_json(c_, dim())}, {"radius", r_}};
  }

  const Point& center() const { return c_; }
  double radius() const { return r_; }

 private:
  Point c_;
  double r_;
};

class Box final : public Shape {
 public:
  Box(int dim, Point lo, Point hi) : Shape(dim), lo_(lo), hi_(hi) {
    for (int k = 0; k < dim; ++k)
      if (!(hi[k] > lo[k])) throw ConfigError("box must have hi > lo on every axis");
  }

  bool contains(const Point& x) const override {
    for (int k = 0; k < dim(); ++k)
      if (!(x[k] > lo_[k] && x[k] < hi_[k])) return false;
    return true;
  }
  bool closure_contains(const Point& x) const override {
    for (int k = 0; k < dim(); ++k)
      if (x[k] < lo_[k] || x[k] > hi_[k]) return false;
    return true;
  }

  Nearest boundary_nearest(const Point& x) const override {
    Nearest best;
    for (int k = 0; k < dim(); ++k) {
      Nearest lo;
      lo.distance = x[k] - lo_[k];
      lo.foot = x;
      lo.foot[k] = lo_[k];
      detail::merge_nearest(best, lo, dim());
      Nearest hi;
      hi.distance = hi_[k] - x[k];
      hi.foot = x;
      hi.foot[k] = hi_[k];
      detail::merge_nearest(best, hi, dim());
    }
    return best;
  }

  Nearest exterior_nearest(const Point& x) const override {
    Nearest n;
    n.foot = x;
    for (int k = 0; k < dim(); ++k) n.foot[k] = std::clamp(x[k], lo_[k], hi_[k]);
    n.distance = dist(x, n.foot, dim());
    return n;
  }

  double linf_inner(const Point& x) const override {
    double r = std::numeric_limits<double>::infinity();
    for (int k = 0; k < dim(); ++k) r = std::min({r, x[k] - lo_[k], hi_[k] - x[k]});
    return std::max(0.0, r);
  }

  double linf_outer(const Point& x) const override {
    double r = 0.0;
    for (int k = 0; k < dim(); ++k) r = std::max({r, lo_[k] - x[k], x[k] - hi_[k]});
    return r;
  }

  BoundingBox bbox() const override { return {lo_, hi_}; }

  double min_feature() const override {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < dim(); ++k) m = std::min(m, hi_[k] - lo_[k]);
    return m;
  }

  nlohmann::json to_json() const override {
    return {{"type", "box"}, {"lo", detail::point_to_json(lo_, dim())}, {"hi", detail::point_to_json(hi_, dim())}};
  }

  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }

 private:
  Point lo_, hi_;
};

/// Interior of a finite union of closed axis-aligned boxes. The boundary is
/// assembled from the box edges minus the parts covered from the outside by
/// another box, so delta is exact even where boxes share faces.
class BoxUnion final : public Shape {
 public:
  BoxUnion(int dim, std::vector<Box> boxes) : Shape(dim), boxes_(std::move(boxes)) {
    if (boxes_.empty()) throw ConfigError("box_union needs at least one box");
    for (const auto& b : boxes_)
      if (b.dim() != dim) throw ConfigError("box_union boxes must share the dimension");
    build_boundary();
  }

  bool contains(const Point& x) const override {
    return closure_contains(x) && boundary_nearest(x).distance > 0.0;
  }
  bool closure_contains(const Point& x) const override {
    for (const auto& b : boxes_)
      if (b.closure_contains(x)) return true;
    return false;
  }

  Nearest boundary_nearest(const Point& x) const override {
    Nearest best;
    for (const auto& s : segments_) {
      Nearest n;
      n.foot = s.a;
      if (dim() == 2) {
        int t = s.axis;  // tangential axis
        n.foot[t] = std::clamp(x[t], s.a[t], s.b[t]);
      }
      n.distance = dist(x, n.foot, dim());
      detail::merge_nearest(best, n, dim());
    }
    return best;
  }

  Nearest exterior_nearest(const Point& x) const override {
    Nearest best;
    for (const auto& b : boxes_) detail::merge_nearest(best, b.exterior_nearest(x), dim());
    return best;
  }

  double linf_inner(const Point& x) const override {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& s : segments_) {
      double d = 0.0;
      for (int k = 0; k < dim(); ++k) {
        double lo = std::min(s.a[k], s.b[k]), hi = std::max(s.a[k], s.b[k]);
        d = std::max(d, std::max({0.0, lo - x[k], x[k] - hi}));
      }
      r = std::min(r, d);
    }
    return r;
  }

  double linf_outer(const Point& x) const override {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& b : boxes_) r = std::min(r, b.linf_outer(x));
    return r;
  }

  BoundingBox bbox() const override {
    BoundingBox out = boxes_.front().bbox();
    for (const auto& b : boxes_) {
      for (int k = 0; k < dim(); ++k) {
        out.lo[k] = std::min(out.lo[k], b.lo()[k]);
        out.hi[k] = std::max(out.hi[k], b.hi()[k]);
      }
    }
    return out;
  }

  double min_feature() const override {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& b : boxes_) m = std::min(m, b.min_feature());
    return m;
  }

  nlohmann::json to_json() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : boxes_) arr.push_back({{"lo", detail::point_to_json(b.lo(), dim())}, {"hi", detail::point_to_json(b.hi(), dim())}});
    return {{"type", "box_union"}, {"boxes", arr}};
  }

  const std::vector<Box>& boxes() const { return boxes_; }

 private:
  struct Segment {
    Point a, b;  // a <= b along the tangential axis
    int axis = 0;
  };

  void build_boundary() {
    const int n = dim();
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
      const Box& A = boxes_[i];
      for (int normal = 0; normal < n; ++normal) {
        for (int side = 0; side < 2; ++side) {
          const double face = side == 0 ? A.lo()[normal] : A.hi()[normal];
          if (n == 1) {
            bool covered = false;
            for (std::size_t j = 0; j < boxes_.size() && !covered; ++j) {
              if (j == i) continue;
              const Box& B = boxes_[j];
              covered = side == 1 ? (B.lo()[0] <= face && face < B.hi()[0]) : (B.lo()[0] < face && face <= B.hi()[0]);
            }
            if (!covered) segments_.push_back({Point{face, 0.0}, Point{face, 0.0}, 0});
            continue;
          }
          const int t = 1 - normal;
          std::vector<std::pair<double, double>> pieces{{A.lo()[t], A.hi()[t]}};
          for (std::size_t j = 0; j < boxes_.size(); ++j) {
            if (j == i) continue;
            const Box& B = boxes_[j];
            bool outward = side == 1 ? (B.lo()[normal] <= face && face < B.hi()[normal])
                                     : (B.lo()[normal] < face && face <= B.hi()[normal]);
            if (!outward) continue;
            std::vector<std::pair<double, double>> next;
            for (auto [lo, hi] : pieces) {
              double clo = B.lo()[t], chi = B.hi()[t];
              if (chi <= lo || clo >= hi) {
                next.push_back({lo, hi});
                continue;
              }
              if (clo > lo) next.push_back({lo, clo});
              if (chi < hi) next.push_back({chi, hi});
            }
            pieces = std::move(next);
          }
          for (auto [lo, hi] : pieces) {
            Segment s;
            s.axis = t;
            s.a[normal] = face;
            s.b[normal] = face;
            s.a[t] = lo;
            s.b[t] = hi;
            segments_.push_back(s);
          }
        }
      }
    }
  }

  std::vector<Box> boxes_;
  std::vector<Segment> segments_;
};

/// Finite point set; has empty interior and only serves as a removed set.
class PointSet final : public Shape {
 public:
  PointSet(int dim, std::vector<Point> points) : Shape(dim), pts_(std::move(points)) {
    if (pts_.empty()) throw ConfigError("point set must not be empty");
    std::sort(pts_.begin(), pts_.end());
  }

  bool contains(const Point&) const override { return false; }
  bool closure_contains(const Point& x) const override {
    auto it = std::lower_bound(pts_.begin(), pts_.end(), x);
    return it != pts_.end() && *it == x;
  }
  Nearest boundary_nearest(const Point&) const override {
    throw DomainError("a point set has no interior");
  }

  Nearest exterior_nearest(const Point& x) const override {
    Nearest best;
    scan(x, [&](const Point& p) {
      Nearest n;
      n.foot = p;
      n.distance = dist(x, p, dim());
      detail::merge_nearest(best, n, dim());
      return best.distance;
    });
    return best;
  }

  double linf_inner(const Point&) const override { return 0.0; }

  double linf_outer(const Point& x) const override {
    double best = std::numeric_limits<double>::infinity();
    scan(x, [&](const Point& p) {
      double d = 0.0;
      for (int k = 0; k < dim(); ++k) d = std::max(d, std::abs(p[k] - x[k]));
      best = std::min(best, d);
      return best;
    });
    return best;
  }

  BoundingBox bbox() const override {
    BoundingBox b{pts_.front(), pts_.front()};
    for (const auto& p : pts_)
      for (int k = 0; k < dim(); ++k) {
        b.lo[k] = std::min(b.lo[k], p[k]);
        b.hi[k] = std::max(b.hi[k], p[k]);
      }
    return b;
  }

  double min_feature() const override {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts_.size(); ++i)
      for (std::size_t j = i + 1; j < pts_.size() && pts_[j][0] - pts_[i][0] < m; ++j)
        m = std::min(m, dist(pts_[i], pts_[j], dim()));
    return m;
  }

  bool has_interior() const override { return false; }

  nlohmann::json to_json() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pts_) arr.push_back(detail::point_to_json(p, dim()));
    return {{"type", "points"}, {"points", arr}};
  }

  const std::vector<Point>& points() const { return pts_; }

 private:
  // Visits candidates outward from x along the first axis; visit returns the
  // current best distance, which prunes the sweep.
  template <class Visit>
  void scan(const Point& x, Visit&& visit) const {
    auto mid = std::lower_bound(pts_.begin(), pts_.end(), x);
    double best = std::numeric_limits<double>::infinity();
    for (auto it = mid; it != pts_.end(); ++it) {
      if ((*it)[0] - x[0] > best) break;
      best = visit(*it);
    }
    for (auto it = mid; it != pts_.begin();) {
      --it;
      if (x[0] - (*it)[0] > best) break;
      best = visit(*it);
    }
  }

  std::vector<Point> pts_;
};

/// Union of open sets whose closures are pairwise disjoint.
class DisjointUnion final : public Shape {
 public:
  DisjointUnion(int dim, std::vector<ShapePtr> children) : Shape(dim), children_(std::move(children)) {
    if (children_.empty()) throw ConfigError("union needs at least one child");
    for (std::size_t i = 0; i < children_.size(); ++i) {
      if (children_[i]->dim() != dim || !children_[i]->has_interior())
        throw ConfigError("union children must be open sets of the same dimension");
      for (std::size_t j = i + 1; j < children_.size(); ++j) {
        auto a = children_[i]->bbox(), b = children_[j]->bbox();
        bool apart = false;
        for (int k = 0; k < dim; ++k) apart = apart || a.hi[k] < b.lo[k] || b.hi[k] < a.lo[k];
        if (!apart)
          throw ConfigError("union children must have disjoint bounding boxes (use box_union for touching boxes)");
      }
    }
  }

  bool contains(const Point& x) const override {
    return std::any_of(children_.begin(), children_.end(), [&](const ShapePtr& c) { return c->contains(x); });
  }
  bool closure_contains(const Point& x) const override {
    return std::any_of(children_.begin(), children_.end(), [&](const ShapePtr& c) { return c->closure_contains(x); });
  }
  Nearest boundary_nearest(const Point& x) const override {
    for (const auto& c : children_)
      if (c->contains(x)) return c->boundary_nearest(x);
    throw DomainError("boundary_nearest queried outside the union");
  }
  Nearest exterior_nearest(const Point& x) const override {
    Nearest best;
    for (const auto& c : children_) detail::merge_nearest(best, c->exterior_nearest(x), dim());
    return best;
  }
  double linf_inner(const Point& x) const override {
    for (const auto& c : children_)
      if (c->contains(x)) return c->linf_inner(x);
    return 0.0;
  }
  double linf_outer(const Point& x) const override {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& c : children_) r = std::min(r, c->linf_outer(x));
    return r;
  }
  BoundingBox bbox() const override {
    BoundingBox out = children_.front()->bbox();
    for (const auto& c : children_) {
      auto b = c->bbox();
      for (int k = 0; k < dim(); ++k) {
        out.lo[k] = std::min(out.lo[k], b.lo[k]);
        out.hi[k] = std::max(out.hi[k], b.hi[k]);
      }
    }
    return out;
  }
  double min_feature() const override {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : children_) m = std::min(m, c->min_feature());
    return m;
  }
  nlohmann::json to_json() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : children_) arr.push_back(c->to_json());
    return {{"type", "union"}, {"children", arr}};
  }

 private:
  std::vector<ShapePtr> children_;
};

/// base minus the closure of removed.
class Difference final : public Shape {
 public:
  Difference(ShapePtr base, ShapePtr removed) : Shape(base->dim()), base_(std::move(base)), removed_(std::move(removed)) {
    if (removed_->dim() != dim()) throw ConfigError("difference operands must share the dimension");
    if (!base_->has_interior()) throw ConfigError("difference base must be an open set");
  }

  bool contains(const Point& x) const override { return base_->contains(x) && !removed_->closure_contains(x); }
  bool closure_contains(const Point& x) const override { return base_->closure_contains(x); }
  Nearest boundary_nearest(const Point& x) const override {
    Nearest best = base_->boundary_nearest(x);
    detail::merge_nearest(best, removed_->exterior_nearest(x), dim());
    return best;
  }
  Nearest exterior_nearest(const Point&) const override {
    throw DomainError("a difference cannot itself be removed from another set");
  }
  double linf_inner(const Point& x) const override {
    return std::min(base_->linf_inner(x), removed_->linf_outer(x));
  }
  double linf_outer(const Point& x) const override { return base_->linf_outer(x); }
  BoundingBox bbox() const override { return base_->bbox(); }
  double min_feature() const override { return std::min(base_->min_feature(), removed_->min_feature()); }
  nlohmann::json to_json() const override {
    return {{"type", "difference"}, {"base", base_->to_json()}, {"remove", removed_->to_json()}};
  }

  const ShapePtr& base() const { return base_; }
  const ShapePtr& removed() const { return removed_; }

 private:
  ShapePtr base_;
  ShapePtr removed_;
};

/// Builds a shape from its JSON descriptor.
///
///   {"type":"ball","center":[0,0],"radius":1}
///   {"type":"box","lo":[0,0],"hi":[2,2]}
///   {"type":"box_union","boxes":[{"lo":..,"hi":..},...]}
///   {"type":"union","children":[...]}           closures pairwise disjoint
///   {"type":"difference","base":{..},"remove":{..}}
///   {"type":"points","points":[[x,y],...]}      removed sets only
///   {"type":"punctured","base":{..},"points":[...]}
///
/// Coordinates may be scalars for n = 1.
inline ShapePtr make_shape(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError("geometry descriptor needs a 'type'");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "ball") {
      int dim = detail::point_dim(j.at("center"));
      return std::make_shared<Ball>(dim, detail::point_from_json(j.at("center")), j.at("radius").get<double>());
    }
    if (type == "box") {
      int dim = detail::point_dim(j.at("lo"));
      if (detail::point_dim(j.at("hi")) != dim) throw ConfigError("box lo/hi dimension mismatch");
      return std::make_shared<Box>(dim, detail::point_from_json(j.at("lo")), detail::point_from_json(j.at("hi")));
    }
    if (type == "box_union") {
      std::vector<Box> boxes;
      int dim = 0;
      for (const auto& b : j.at("boxes")) {
        dim = detail::point_dim(b.at("lo"));
        boxes.emplace_back(dim, detail::point_from_json(b.at("lo")), detail::point_from_json(b.at("hi")));
      }
      if (boxes.empty()) throw ConfigError("box_union needs boxes");
      return std::make_shared<BoxUnion>(dim, std::move(boxes));
    }
    if (type == "union") {
      std::vector<ShapePtr> children;
      for (const auto& c : j.at("children")) children.push_back(make_shape(c));
      if (children.empty()) throw ConfigError("union needs children");
      return std::make_shared<DisjointUnion>(children.front()->dim(), std::move(children));
    }
    if (type == "difference") {
      return std::make_shared<Difference>(make_shape(j.at("base")), make_shape(j.at("remove")));
    }
    if (type == "points" || type == "punctured") {
      const auto& arr = j.at("points");
      if (arr.empty()) throw ConfigError("points list is empty");
      int dim = detail::point_dim(arr.front());
      std::vector<Point> pts;
      for (const auto& p : arr) pts.push_back(detail::point_from_json(p));
      auto set = std::make_shared<PointSet>(dim, std::move(pts));
      if (type == "points") return set;
      return std::make_shared<Difference>(make_shape(j.at("base")), set);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed '" + type + "' descriptor: " + e.what());
  }
  throw ConfigError("unknown geometry type '" + type + "'");
}

}  // namespace fracmax
