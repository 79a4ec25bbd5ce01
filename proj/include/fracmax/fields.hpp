#pragma once

#include <json.hpp>

#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "fracmax/core.hpp"
#include "fracmax/domain_grid.hpp"

namespace fracmax {

/// Per-cell status bits carried by scalar fields.
enum CellFlag : std::uint8_t {
  kInvalid = 1,         // not computed or not meaningful; ignored by every reduction
  kRadiusStarved = 2,   // no admissible radius below the defining bound
  kUnderResolved = 4,   // the ball or sphere at this cell is below grid resolution
  kExcluded = 8,        // near a singular set; skipped by sup-ratio checks
};

/// Selected cell indices (row-major, sorted). Operators accept an optional
/// selection and leave every other cell flagged kInvalid.
using CellSet = std::vector<std::size_t>;

class ScalarField {
 public:
  DomainPtr domain;
  std::vector<double> values;
  std::vector<std::uint8_t> flags;

  ScalarField() = default;
  explicit ScalarField(DomainPtr dom) : domain(std::move(dom)) {
    values.assign(domain->size(), 0.0);
    flags.assign(domain->size(), 0);
    for (std::size_t c = 0; c < flags.size(); ++c)
      if (!domain->masked(c)) flags[c] = kInvalid;
  }

  double operator[](std::size_t c) const { return values[c]; }
  double& operator[](std::size_t c) { return values[c]; }
  bool valid(std::size_t c) const { return domain->masked(c) && !(flags[c] & kInvalid); }

  /// Cells that are valid and carry none of the given extra flags.
  template <class Fn>
  void for_each_valid(Fn&& fn, std::uint8_t skip = 0) const {
    for (auto c : domain->cells)
      if (!(flags[c] & (kInvalid | skip))) fn(c);
  }

  double max_value() const {
    double m = 0.0;
    for_each_valid([&](std::size_t c) { m = std::max(m, values[c]); });
    return m;
  }

  void write_csv(std::ostream& os) const {
    os.precision(17);
    for (int j = 0; j < domain->ny; ++j) {
      for (int i = 0; i < domain->nx; ++i) {
        if (i) os << ',';
        std::size_t c = domain->index(i, j);
        if (valid(c)) os << values[c];
        else os << "nan";
      }
      os << '\n';
    }
  }

  nlohmann::json header() const {
    auto j = domain->metadata();
    j["kind"] = "scalar";
    return j;
  }
};

class VectorField {
 public:
  DomainPtr domain;
  std::vector<Point> values;
  std::vector<std::uint8_t> valid;

  VectorField() = default;
  explicit VectorField(DomainPtr dom) : domain(std::move(dom)) {
    values.assign(domain->size(), Point{0.0, 0.0});
    valid.assign(domain->size(), 0);
  }

  ScalarField magnitude() const {
    ScalarField out(domain);
    for (auto c : domain->cells) {
      if (valid[c]) out[c] = norm(values[c], domain->dim);
      else out.flags[c] |= kInvalid;
    }
    return out;
  }

  void write_csv(std::ostream& os) const {
    os.precision(17);
    os << (domain->dim == 2 ? "i,j,x,y,g1,g2\n" : "i,x,g1\n");
    for (auto c : domain->cells) {
      if (!valid[c]) continue;
      Point x = domain->center(c);
      if (domain->dim == 2)
        os << domain->col(c) << ',' << domain->row(c) << ',' << x[0] << ',' << x[1] << ',' << values[c][0] << ','
           << values[c][1] << '\n';
      else
        os << domain->col(c) << ',' << x[0] << ',' << values[c][0] << '\n';
    }
  }
};

/// Samples fn at every masked cell centre.
inline ScalarField sample(DomainPtr dom, const std::function<double(const Point&)>& fn) {
  ScalarField f(dom);
  for (auto c : dom->cells) {
    double v = fn(dom->center(c));
    if (std::isnan(v)) throw FieldError("field value is NaN");
    if (!std::isfinite(v)) throw FieldError("field value is not finite");
    f[c] = v;
  }
  return f;
}

inline VectorField sample_vector(DomainPtr dom, const std::function<Point(const Point&)>& fn) {
  VectorField f(dom);
  for (auto c : dom->cells) {
    f.values[c] = fn(dom->center(c));
    f.valid[c] = 1;
  }
  return f;
}

inline ScalarField constant_field(DomainPtr dom, double value) {
  return sample(std::move(dom), [value](const Point&) { return value; });
}

inline ScalarField abs_field(const ScalarField& f) {
  ScalarField out = f;
  for (auto& v : out.values) v = std::abs(v);
  return out;
}

/// Exponent bookkeeping: p* = np/(n - alpha p), q = np/(n - (alpha - 1)p).
struct OperatorParams {
  double alpha = 0.0;
  double p = 2.0;
  int n = 2;

  OperatorParams() = default;
  OperatorParams(double a, double pp, int dim) : alpha(a), p(pp), n(dim) { validate(); }

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a finite number >= 0");
    if (!(p >= 1.0)) throw ConfigError("p must be >= 1");
    if (n < 1) throw ConfigError("dimension must be >= 1");
    auto ps = p_star(), qq = q();
    if (alpha >= 1.0 && ps && qq && !(*qq < *ps)) throw ConfigError("exponent ordering q < p* violated");
  }

  std::optional<double> p_star() const {
    if (alpha * p >= n) return std::nullopt;
    return n * p / (n - alpha * p);
  }
  std::optional<double> q() const {
    if ((alpha - 1.0) * p >= n) return std::nullopt;
    return n * p / (n - (alpha - 1.0) * p);
  }
};

struct GradientOptions {
  bool exclude_ridge = true;
};

/// Finite-difference gradient: central where both neighbours are usable,
/// one-sided where one is, invalid otherwise. A neighbour is usable when it is
/// valid and the segment to it stays inside the domain.
inline VectorField fd_gradient(const ScalarField& f, GradientOptions opt = {}, const CellSet* only = nullptr) {
  const GridDomain& d = *f.domain;
  VectorField g(f.domain);
  auto usable = [&](std::size_t c, int i, int j) -> std::optional<std::size_t> {
    if (!d.in_grid(i, j)) return std::nullopt;
    std::size_t nb = d.index(i, j);
    if (!f.valid(nb) || !d.connected(c, nb)) return std::nullopt;
    return nb;
  };
  auto one = [&](std::size_t c) {
    if (!f.valid(c)) return;
    if (opt.exclude_ridge && d.ridge[c]) return;
    const int i = d.col(c), j = d.row(c);
    Point grad{0.0, 0.0};
    for (int axis = 0; axis < d.dim; ++axis) {
      auto plus = axis == 0 ? usable(c, i + 1, j) : usable(c, i, j + 1);
      auto minus = axis == 0 ? usable(c, i - 1, j) : usable(c, i, j - 1);
      if (plus && minus) grad[axis] = (f[*plus] - f[*minus]) / (2.0 * d.h);
      else if (plus) grad[axis] = (f[*plus] - f[c]) / d.h;
      else if (minus) grad[axis] = (f[c] - f[*minus]) / d.h;
      else return;
    }
    g.values[c] = grad;
    g.valid[c] = 1;
  };
  if (only) {
    parallel_for(only->size(), [&](std::size_t k) { one((*only)[k]); });
  } else {
    parallel_for(d.cells.size(), [&](std::size_t k) { one(d.cells[k]); });
  }
  return g;
}

/// Gradient of delta as a vector field; ridge cells are left invalid.
inline VectorField grad_delta(const DomainPtr& dom) {
  VectorField g(dom);
  for (auto c : dom->cells) {
    g.values[c] = dom->ddelta[c];
    g.valid[c] = dom->ridge[c] ? 0 : 1;
  }
  return g;
}

/// (sum |f|^p h^n)^(1/p) over valid cells; p = infinity gives the max.
inline double lp_norm(const ScalarField& f, double p) {
  if (!(p >= 1.0)) throw ConfigError("lp_norm needs p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    f.for_each_valid([&](std::size_t c) { m = std::max(m, std::abs(f[c])); });
    return m;
  }
  double s = 0.0;
  f.for_each_valid([&](std::size_t c) { s += std::pow(std::abs(f[c]), p); });
  return std::pow(s * f.domain->cell_volume(), 1.0 / p);
}

/// Measure of {f > lambda}.
inline double distribution_function(const ScalarField& f, double lambda) {
  std::size_t count = 0;
  f.for_each_valid([&](std::size_t c) { count += f[c] > lambda; });
  return static_cast<double>(count) * f.domain->cell_volume();
}

/// count levels log-spaced from the smallest positive value to the max of f.
inline std::vector<double> log_levels(const ScalarField& f, int count = 200) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  f.for_each_valid([&](std::size_t c) {
    if (f[c] > 0.0) {
      lo = std::min(lo, f[c]);
      hi = std::max(hi, f[c]);
    }
  });
  if (hi == 0.0) return {};
  if (count < 2 || lo == hi) return {lo, hi};
  std::vector<double> t(count);
  const double ratio = std::log(hi / lo);
  for (int k = 0; k < count; ++k) t[k] = lo * std::exp(ratio * k / (count - 1));
  t.front() = lo;
  t.back() = hi;
  return t;
}

/// s * integral of t^(s-1) mu(f > t) dt on the given increasing level grid.
/// Between levels a < b the measure is interpolated linearly in log t and
/// integrated exactly against d(t^s); below the first level it is mu(f > 0).
inline double layer_cake_norm(const ScalarField& f, double s, const std::vector<double>& t_grid) {
  if (!(s >= 1.0)) throw ConfigError("layer_cake_norm needs s >= 1");
  std::vector<double> vals;
  f.for_each_valid([&](std::size_t c) {
    if (f[c] > 0.0) vals.push_back(f[c]);
  });
  if (vals.empty()) return 0.0;
  std::sort(vals.begin(), vals.end());
  if (t_grid.empty() || t_grid.front() > vals.front() || t_grid.back() < vals.back())
    throw FieldError("level grid does not cover the range of the field");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] >= t_grid[k - 1])) throw FieldError("level grid must be increasing");
  const double vol = f.domain->cell_volume();
  auto mu = [&](double t) {
    auto it = std::upper_bound(vals.begin(), vals.end(), t);
    return static_cast<double>(vals.end() - it) * vol;
  };
  double total = std::pow(t_grid.front(), s) * static_cast<double>(vals.size()) * vol;
  double prev_mu = mu(t_grid.front());
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double a = t_grid[k - 1], b = t_grid[k];
    const double cur_mu = mu(b);
    if (b > a) {
      const double as = std::pow(a, s), bs = std::pow(b, s), lr = std::log(b / a);
      total += prev_mu * (bs - as) + (cur_mu - prev_mu) * (bs - (bs - as) / (s * lr));
    }
    prev_mu = cur_mu;
  }
  return total;
}

inline double layer_cake_norm(const ScalarField& f, double s) { return layer_cake_norm(f, s, log_levels(f)); }

/// sum (|f| / delta)^q h^n over valid cells.
inline double hardy_quotient(const ScalarField& f, double q) {
  if (!(q >= 1.0)) throw ConfigError("hardy_quotient needs q >= 1");
  const auto& d = *f.domain;
  double s = 0.0;
  f.for_each_valid([&](std::size_t c) { s += std::pow(std::abs(f[c]) / d.delta[c], q); });
  return s * d.cell_volume();
}

/// Multilinear interpolation from the 2^n surrounding cell centres, all of
/// which must be valid.
inline double interpolate(const ScalarField& f, const Point& x) {
  const auto& d = *f.domain;
  const double fx = (x[0] - d.origin[0]) / d.h - 0.5;
  const int i0 = static_cast<int>(std::floor(fx));
  const double wx = fx - i0;
  if (d.dim == 1) {
    if (!d.in_grid(i0, 0) || !d.in_grid(i0 + 1, 0)) throw FieldError("interpolation outside domain");
    std::size_t a = d.index(i0, 0), b = d.index(i0 + 1, 0);
    if (!f.valid(a) || !f.valid(b)) throw FieldError("interpolation outside domain");
    return (1.0 - wx) * f[a] + wx * f[b];
  }
  const double fy = (x[1] - d.origin[1]) / d.h - 0.5;
  const int j0 = static_cast<int>(std::floor(fy));
  const double wy = fy - j0;
  if (!d.in_grid(i0, j0) || !d.in_grid(i0 + 1, j0 + 1)) throw FieldError("interpolation outside domain");
  std::size_t c00 = d.index(i0, j0), c10 = c00 + 1, c01 = c00 + d.nx, c11 = c01 + 1;
  if (!f.valid(c00) || !f.valid(c10) || !f.valid(c01) || !f.valid(c11))
    throw FieldError("interpolation outside domain");
  return (1.0 - wy) * ((1.0 - wx) * f[c00] + wx * f[c10]) + wy * ((1.0 - wx) * f[c01] + wx * f[c11]);
}

}  // namespace fracmax
