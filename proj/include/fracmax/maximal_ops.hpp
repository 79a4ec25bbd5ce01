#pragma once

// Maximal operators on a GridDomain. Balls follow the cell-centre rule: the
// ball B(x, r) at a cell centre x is the set of cells whose centres lie at
// distance < r from x.
//
// Radius candidates. Over r in (d_{g-1}, d_g] the cell set of B(x, r) is
// fixed, so r^alpha * mean is largest at r = d_g. The default lattice policy
// therefore evaluates every distinct lattice distance below the bound plus the
// bound itself (the open supremum), which is the exact supremum of the
// discretised operator. The uniform policy samples r = j g instead.

#include <json.hpp>

#include <optional>
#include <vector>

#include "fracmax/core.hpp"
#include "fracmax/domain_grid.hpp"
#include "fracmax/fields.hpp"
#include "fracmax/stencil.hpp"

namespace fracmax {

enum class RadiusPolicy { lattice, uniform };

struct RadiusGrid {
  RadiusPolicy policy = RadiusPolicy::lattice;
  double granularity = 0.0;  // uniform policy step; 0 means h / 2

  double step(double h) const { return granularity > 0.0 ? granularity : 0.5 * h; }

  nlohmann::json to_json(double h) const {
    return {{"policy", policy == RadiusPolicy::lattice ? "lattice" : "uniform"}, {"granularity", step(h)}};
  }
};

namespace detail {

/// |u| on the whole grid, zero off the domain.
inline std::vector<double> dense_abs(const ScalarField& u) {
  std::vector<double> a(u.domain->size(), 0.0);
  for (auto c : u.domain->cells) {
    if (u.flags[c] & kInvalid) throw OperatorError("input field has invalid cells inside the domain");
    a[c] = std::abs(u[c]);
  }
  return a;
}

inline std::vector<double> dense_signed(const ScalarField& u) {
  std::vector<double> a(u.domain->size(), 0.0);
  for (auto c : u.domain->cells) {
    if (u.flags[c] & kInvalid) throw OperatorError("input field has invalid cells inside the domain");
    a[c] = u[c];
  }
  return a;
}

template <class Fn>
void for_cells(const GridDomain& d, const CellSet* only, Fn&& fn) {
  if (only) {
    for (auto c : *only)
      if (c >= d.size() || !d.masked(c)) throw OperatorError("selected cell is outside the domain");
    parallel_for(only->size(), [&](std::size_t k) { fn((*only)[k]); });
  } else {
    parallel_for(d.cells.size(), [&](std::size_t k) { fn(d.cells[k]); });
  }
}

/// Prefix sums over the lattice stencil for one cell. Offsets are consumed a
/// group at a time; each group is reduced with four partial sums in a fixed
/// order, so every operator sharing this walker produces identical sums.
class BallWalker {
 public:
  BallWalker(const GridDomain& d, StencilPtr st, const double* a, bool zero_extend)
      : d_(d), st_(std::move(st)), a_(a), zero_extend_(zero_extend), rad_(st_->radii(d.h)) {}

  const std::vector<double>& radii() const { return rad_; }
  const BallStencil& stencil() const { return *st_; }

  /// Number of groups with radius < r.
  std::size_t groups_below(double r) const {
    std::size_t g = static_cast<std::size_t>(std::lower_bound(rad_.begin(), rad_.end(), r) - rad_.begin());
    if (g == rad_.size()) throw OperatorError("stencil too small for the requested radius");
    return g;
  }

  class Cursor {
   public:
    Cursor(const BallWalker& w, std::size_t cell, std::size_t max_groups) : w_(w), cell_(cell) {
      const auto& d = w.d_;
      i_ = d.col(cell);
      j_ = d.row(cell);
      base_ = static_cast<std::int64_t>(cell);
      if (max_groups > 0) {
        int reach = w.st_->group_reach[max_groups - 1];
        fast_ = i_ - reach >= 0 && i_ + reach < d.nx && (d.dim == 1 || (j_ - reach >= 0 && j_ + reach < d.ny));
        if (!fast_ && !w.zero_extend_) throw OperatorError("ball leaves the grid window");
      }
    }

    /// Advance so that the sum covers groups [0, g).
    void advance_to(std::size_t g) {
      const auto& st = *w_.st_;
      while (groups_ < g) {
        const std::size_t end = st.group_end[groups_];
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        std::size_t k = k_;
        if (fast_) {
          const double* a = w_.a_ + base_;
          const std::int64_t* lin = st.lin.data();
          for (; k + 4 <= end; k += 4) {
            s0 += a[lin[k]];
            s1 += a[lin[k + 1]];
            s2 += a[lin[k + 2]];
            s3 += a[lin[k + 3]];
          }
          for (; k < end; ++k) s0 += a[lin[k]];
        } else {
          auto at = [&](std::size_t q) {
            int ii = i_ + st.di[q], jj = j_ + st.dj[q];
            return w_.d_.in_grid(ii, jj) ? w_.a_[w_.d_.index(ii, jj)] : 0.0;
          };
          for (; k + 4 <= end; k += 4) {
            s0 += at(k);
            s1 += at(k + 1);
            s2 += at(k + 2);
            s3 += at(k + 3);
          }
          for (; k < end; ++k) s0 += at(k);
        }
        sum_ += (s0 + s1) + (s2 + s3);
        k_ = end;
        ++groups_;
      }
    }

    double sum() const { return sum_; }
    std::size_t count() const { return k_; }
    double mean() const { return sum_ / static_cast<double>(k_); }

   private:
    const BallWalker& w_;
    std::size_t cell_;
    int i_ = 0, j_ = 0;
    std::int64_t base_ = 0;
    bool fast_ = true;
    std::size_t groups_ = 0;
    std::size_t k_ = 0;
    double sum_ = 0.0;
  };

  Cursor cursor(std::size_t cell, std::size_t max_groups) const { return Cursor(*this, cell, max_groups); }

 private:
  const GridDomain& d_;
  StencilPtr st_;
  const double* a_;
  bool zero_extend_;
  std::vector<double> rad_;
};

struct PowTable {
  double alpha = 0.0;
  std::vector<double> val;
};

inline PowTable pow_table(double alpha, const std::vector<double>& rad) {
  PowTable t{alpha, std::vector<double>(rad.size())};
  for (std::size_t g = 0; g < rad.size(); ++g) t.val[g] = std::pow(rad[g], alpha);
  return t;
}

/// Supremum of r^alpha * mean over {d < r}, 0 < r < bound, for several alphas
/// in one walk. Returns the number of groups below the bound. The uniform
/// policy expects rg.granularity to be resolved already.
inline std::size_t ball_sup(const BallWalker& w, const std::vector<PowTable>& tabs, const RadiusGrid& rg,
                            std::size_t cell, double bound, double center_value, double* out) {
  for (std::size_t k = 0; k < tabs.size(); ++k) out[k] = tabs[k].alpha == 0.0 ? center_value : 0.0;
  if (!(bound > 0.0)) return 0;
  const std::size_t G = w.groups_below(bound);
  auto cur = w.cursor(cell, G);
  if (rg.policy == RadiusPolicy::lattice) {
    for (std::size_t g = 1; g < G; ++g) {
      cur.advance_to(g);
      const double m = cur.mean();
      for (std::size_t k = 0; k < tabs.size(); ++k) out[k] = std::max(out[k], tabs[k].val[g] * m);
    }
    cur.advance_to(G);
    const double m = cur.mean();
    for (std::size_t k = 0; k < tabs.size(); ++k) out[k] = std::max(out[k], std::pow(bound, tabs[k].alpha) * m);
  } else {
    const double g = rg.granularity;
    for (std::size_t j = 1;; ++j) {
      const double r = static_cast<double>(j) * g;
      if (!(r < bound)) break;
      cur.advance_to(w.groups_below(r));
      const double m = cur.mean();
      for (std::size_t k = 0; k < tabs.size(); ++k) out[k] = std::max(out[k], std::pow(r, tabs[k].alpha) * m);
    }
  }
  return G;
}

struct SupRequest {
  std::vector<double> alphas;
  RadiusGrid radii;
  const CellSet* only = nullptr;
  bool zero_extend = false;
};

/// Shared driver for the local, restricted and global ball operators.
template <class BoundFn>
std::vector<ScalarField> ball_sup_field(const ScalarField& u, const SupRequest& req, double max_bound, BoundFn&& bound_of) {
  const GridDomain& d = *u.domain;
  for (double a : req.alphas)
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alpha must be a finite number >= 0");
  const auto a = dense_abs(u);
  auto st = ball_stencil_for_radius(d.dim, d.nx, max_bound, d.h);
  BallWalker w(d, st, a.data(), req.zero_extend);
  std::vector<PowTable> tabs;
  for (double al : req.alphas) tabs.push_back(pow_table(al, w.radii()));
  RadiusGrid rg = req.radii;
  if (rg.policy == RadiusPolicy::uniform) rg.granularity = rg.step(d.h);
  std::vector<ScalarField> out(req.alphas.size(), ScalarField(u.domain));
  if (req.only) {
    for (auto& f : out)
      for (auto c : d.cells) f.flags[c] |= kInvalid;
  }
  for_cells(d, req.only, [&](std::size_t c) {
    std::vector<double> vals(req.alphas.size());
    const double bound = bound_of(c);
    std::size_t G = ball_sup(w, tabs, rg, c, bound, a[c], vals.data());
    for (std::size_t k = 0; k < vals.size(); ++k) {
      out[k][c] = vals[k];
      out[k].flags[c] &= static_cast<std::uint8_t>(~kInvalid);
      if (G <= 1) out[k].flags[c] |= kRadiusStarved;
    }
  });
  return out;
}

inline double max_delta_over(const GridDomain& d, const CellSet* only) {
  double m = 0.0;
  if (only) {
    for (auto c : *only) m = std::max(m, d.delta.at(c));
  } else {
    m = d.max_delta();
  }
  return m;
}

}  // namespace detail

/// M_{alpha,Omega}u for several alphas, sharing one walk per cell.
inline std::vector<ScalarField> local_fractional_maximal(const ScalarField& u, const std::vector<double>& alphas,
                                                         const RadiusGrid& rg = {}, const CellSet* only = nullptr) {
  const GridDomain& d = *u.domain;
  detail::SupRequest req{alphas, rg, only, false};
  return detail::ball_sup_field(u, req, detail::max_delta_over(d, only), [&](std::size_t c) { return d.delta[c]; });
}

/// M_{alpha,Omega}u(x) = sup over 0 < r < delta(x) of r^alpha times the mean of |u| over B(x, r).
inline ScalarField local_fractional_maximal(const ScalarField& u, double alpha, const RadiusGrid& rg = {},
                                            const CellSet* only = nullptr) {
  return std::move(local_fractional_maximal(u, std::vector<double>{alpha}, rg, only).front());
}

/// Radius restricted to beta r < delta(x).
inline std::vector<ScalarField> restricted_maximal(const ScalarField& u, const std::vector<double>& alphas, double beta,
                                                   const RadiusGrid& rg = {}, const CellSet* only = nullptr) {
  if (!(beta >= 1.0)) throw ConfigError("beta must be >= 1");
  const GridDomain& d = *u.domain;
  detail::SupRequest req{alphas, rg, only, false};
  return detail::ball_sup_field(u, req, detail::max_delta_over(d, only) / beta,
                                [&](std::size_t c) { return d.delta[c] / beta; });
}

inline ScalarField restricted_maximal(const ScalarField& u, double alpha, double beta, const RadiusGrid& rg = {},
                                      const CellSet* only = nullptr) {
  return std::move(restricted_maximal(u, std::vector<double>{alpha}, beta, rg, only).front());
}

/// Global operator of u extended by zero, radii 0 < r <= r_cap. The cap is
/// checked against the tail bound r_cap^(alpha - n) ||u||_1 / omega_n, which
/// dominates every r > r_cap term.
inline std::vector<ScalarField> global_fractional_maximal(const ScalarField& u, const std::vector<double>& alphas,
                                                          double r_cap, const RadiusGrid& rg = {},
                                                          const CellSet* only = nullptr, bool check_tail = true) {
  const GridDomain& d = *u.domain;
  if (!(r_cap > 0.0)) throw ConfigError("R_cap must be positive");
  for (double a : alphas)
    if (!(a < d.dim)) throw ConfigError("global operator needs alpha < n");
  detail::SupRequest req{alphas, rg, only, true};
  // r = r_cap itself is admissible here; nudging the bound keeps it in the walk
  const double bound = std::nextafter(r_cap, INFINITY);
  auto out = detail::ball_sup_field(u, req, bound, [&](std::size_t) { return bound; });
  if (check_tail) {
    const double l1 = lp_norm(u, 1.0);
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      const double tail = std::pow(r_cap, alphas[k] - d.dim) * l1 / unit_ball_volume(d.dim);
      out[k].for_each_valid([&](std::size_t c) {
        if (tail > out[k][c]) throw OperatorError("R_cap too small");
      });
    }
  }
  return out;
}

inline ScalarField global_fractional_maximal(const ScalarField& u, double alpha, double r_cap, const RadiusGrid& rg = {},
                                             const CellSet* only = nullptr, bool check_tail = true) {
  return std::move(global_fractional_maximal(u, std::vector<double>{alpha}, r_cap, rg, only, check_tail).front());
}

/// Mean of u over the cells whose centres lie in B(x, r).
inline double ball_average(const ScalarField& u, const Point& x, double r) {
  const GridDomain& d = *u.domain;
  if (!(r > 0.0)) throw ConfigError("ball radius must be positive");
  const int reach = static_cast<int>(std::ceil(r / d.h)) + 1;
  const double fx = (x[0] - d.origin[0]) / d.h - 0.5;
  const double fy = d.dim == 2 ? (x[1] - d.origin[1]) / d.h - 0.5 : 0.0;
  const int ci = static_cast<int>(std::round(fx)), cj = static_cast<int>(std::round(fy));
  double sum = 0.0;
  std::size_t n = 0;
  for (int j = (d.dim == 2 ? cj - reach : 0); j <= (d.dim == 2 ? cj + reach : 0); ++j)
    for (int i = ci - reach; i <= ci + reach; ++i) {
      Point p{d.origin[0] + (i + 0.5) * d.h, d.dim == 2 ? d.origin[1] + (j + 0.5) * d.h : 0.0};
      if (!(dist(p, x, d.dim) < r)) continue;
      if (!d.in_grid(i, j) || !u.valid(d.index(i, j))) throw OperatorError("ball leaves the domain");
      sum += u[d.index(i, j)];
      ++n;
    }
  if (n == 0) throw OperatorError("ball under-resolved");
  return sum / static_cast<double>(n);
}

/// Uniform-weight mean of the interpolated field over the sphere of radius r.
inline double sphere_average(const ScalarField& u, const Point& x, double r) {
  const GridDomain& d = *u.domain;
  if (!(r > 0.0)) throw ConfigError("sphere radius must be positive");
  if (d.dim == 1) return 0.5 * (interpolate(u, {x[0] - r, 0.0}) + interpolate(u, {x[0] + r, 0.0}));
  const auto& rule = circle_rule(circle_samples(r, d.h));
  double s = 0.0;
  for (int k = 0; k < rule.m; ++k) s += interpolate(u, {x[0] + r * rule.cos_t[k], x[1] + r * rule.sin_t[k]});
  return s / rule.m;
}

namespace detail {

/// Sphere means of a dense array by multilinear interpolation. Returns the
/// mean of a and of a * nu (the outward normal).
struct SphereMeans {
  double mean = 0.0;
  Point normal_mean{0.0, 0.0};
};

inline SphereMeans sphere_means(const GridDomain& d, const double* a, const std::vector<std::uint8_t>& ok, const Point& x,
                                double r, bool want_normal) {
  auto lerp1 = [&](double px) {
    const double fx = (px - d.origin[0]) / d.h - 0.5;
    const int i0 = static_cast<int>(std::floor(fx));
    const double wx = fx - i0;
    if (!d.in_grid(i0, 0) || !d.in_grid(i0 + 1, 0) || !ok[i0] || !ok[i0 + 1])
      throw FieldError("interpolation outside domain");
    return (1.0 - wx) * a[i0] + wx * a[i0 + 1];
  };
  SphereMeans out;
  if (d.dim == 1) {
    double lo = lerp1(x[0] - r), hi = lerp1(x[0] + r);
    out.mean = 0.5 * (lo + hi);
    out.normal_mean[0] = 0.5 * (hi - lo);
    return out;
  }
  const auto& rule = circle_rule(circle_samples(r, d.h));
  double s = 0.0, sx = 0.0, sy = 0.0;
  for (int k = 0; k < rule.m; ++k) {
    const double px = x[0] + r * rule.cos_t[k], py = x[1] + r * rule.sin_t[k];
    const double fx = (px - d.origin[0]) / d.h - 0.5, fy = (py - d.origin[1]) / d.h - 0.5;
    const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
    if (!d.in_grid(i0, j0) || !d.in_grid(i0 + 1, j0 + 1)) throw FieldError("interpolation outside domain");
    const double wx = fx - i0, wy = fy - j0;
    const std::size_t c00 = d.index(i0, j0), c10 = c00 + 1, c01 = c00 + d.nx, c11 = c01 + 1;
    if (!ok[c00] || !ok[c10] || !ok[c01] || !ok[c11]) throw FieldError("interpolation outside domain");
    const double v = (1.0 - wy) * ((1.0 - wx) * a[c00] + wx * a[c10]) + wy * ((1.0 - wx) * a[c01] + wx * a[c11]);
    s += v;
    if (want_normal) {
      sx += v * rule.cos_t[k];
      sy += v * rule.sin_t[k];
    }
  }
  out.mean = s / rule.m;
  out.normal_mean = {sx / rule.m, sy / rule.m};
  return out;
}

inline std::vector<std::uint8_t> valid_mask(const ScalarField& u) {
  std::vector<std::uint8_t> ok(u.domain->size(), 0);
  for (auto c : u.domain->cells) ok[c] = u.valid(c) ? 1 : 0;
  return ok;
}

/// Largest sphere radius whose interpolation stencil stays inside B(x, delta).
inline double sphere_cap(const GridDomain& d, double delta) { return delta - std::sqrt(static_cast<double>(d.dim)) * d.h; }

}  // namespace detail

/// S_{alpha,Omega}u: supremum of r^alpha times sphere means of |u| over
/// r = j g below the interpolation cap delta - sqrt(n) h, and the cap itself.
inline std::vector<ScalarField> local_spherical_maximal(const ScalarField& u, const std::vector<double>& alphas,
                                                        const RadiusGrid& rg = {}, const CellSet* only = nullptr) {
  const GridDomain& d = *u.domain;
  const auto a = detail::dense_abs(u);
  const auto ok = detail::valid_mask(u);
  const double g = rg.step(d.h);
  std::vector<ScalarField> out(alphas.size(), ScalarField(u.domain));
  if (only)
    for (auto& f : out)
      for (auto c : d.cells) f.flags[c] |= kInvalid;
  detail::for_cells(d, only, [&](std::size_t c) {
    const Point x = d.center(c);
    const double cap = std::min(detail::sphere_cap(d, d.delta[c]), std::nextafter(d.delta[c], 0.0));
    std::vector<double> best(alphas.size());
    for (std::size_t k = 0; k < alphas.size(); ++k) best[k] = alphas[k] == 0.0 ? a[c] : 0.0;
    bool any = false;
    auto visit = [&](double r) {
      const double m = detail::sphere_means(d, a.data(), ok, x, r, false).mean;
      for (std::size_t k = 0; k < alphas.size(); ++k) best[k] = std::max(best[k], std::pow(r, alphas[k]) * m);
      any = true;
    };
    for (std::size_t j = 1;; ++j) {
      const double r = static_cast<double>(j) * g;
      if (!(r < cap)) break;
      visit(r);
    }
    if (cap > 0.0) visit(cap);
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      out[k][c] = best[k];
      out[k].flags[c] &= static_cast<std::uint8_t>(~kInvalid);
      if (!any) out[k].flags[c] |= kRadiusStarved;
    }
  });
  return out;
}

inline ScalarField local_spherical_maximal(const ScalarField& u, double alpha, const RadiusGrid& rg = {},
                                           const CellSet* only = nullptr) {
  return std::move(local_spherical_maximal(u, std::vector<double>{alpha}, rg, only).front());
}

/// Cube variant: open axis-aligned cubes Q(x, r) of half-side r inside the
/// domain, through a summed-area table. For r in ((k-1)h, kh] the cube holds
/// the cells at Chebyshev offset <= k - 1.
inline ScalarField cube_maximal(const ScalarField& u, double alpha, const CellSet* only = nullptr) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  const GridDomain& d = *u.domain;
  const auto a = detail::dense_abs(u);
  const int W = d.nx + 1, H = d.ny + 1;
  std::vector<double> sat(static_cast<std::size_t>(W) * H, 0.0);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      sat[(j + 1) * W + i + 1] = a[d.index(i, j)] + sat[j * W + i + 1] + sat[(j + 1) * W + i] - sat[j * W + i];
  auto box_sum = [&](int i0, int j0, int i1, int j1) {  // inclusive cell ranges
    return sat[(j1 + 1) * W + i1 + 1] - sat[j0 * W + i1 + 1] - sat[(j1 + 1) * W + i0] + sat[j0 * W + i0];
  };
  ScalarField out(u.domain);
  if (only)
    for (auto c : d.cells) out.flags[c] |= kInvalid;
  detail::for_cells(d, only, [&](std::size_t c) {
    const int i = d.col(c), j = d.row(c);
    const double bound = d.geometry->linf_inner(d.center(c));
    double best = alpha == 0.0 ? a[c] : 0.0;
    auto mean_at = [&](int k) {  // Chebyshev offsets <= k
      const int jl = d.dim == 2 ? j - k : 0, jh = d.dim == 2 ? j + k : 0;
      if (i - k < 0 || i + k >= d.nx || jl < 0 || jh >= d.ny) throw OperatorError("cube leaves the grid window");
      double cells = d.dim == 2 ? (2.0 * k + 1) * (2.0 * k + 1) : 2.0 * k + 1;
      return box_sum(i - k, jl, i + k, jh) / cells;
    };
    int kk = 1;
    for (; kk * d.h <= bound; ++kk) best = std::max(best, std::pow(kk * d.h, alpha) * mean_at(kk - 1));
    if (bound > 0.0) {
      int kmax = static_cast<int>(std::ceil(bound / d.h)) - 1;
      best = std::max(best, std::pow(bound, alpha) * mean_at(std::max(0, kmax)));
    }
    out[c] = best;
    out.flags[c] &= static_cast<std::uint8_t>(~kInvalid);
    if (bound <= d.h) out.flags[c] |= kRadiusStarved;
  });
  return out;
}

/// How a ball of radius R around a cell centre weights the grid cells.
/// cell_center: cells whose centres lie at distance < R, weight 1.
/// coverage: every cell weighted by the exact area (length for n = 1) of its
/// square inside the disc, i.e. the exact ball mean of the piecewise-constant
/// extension of u. This mean varies smoothly with x and R, which is what
/// finite differences of u_t^alpha need.
enum class BallRule { cell_center, coverage };

namespace detail {

/// Area of the disc |p| < R intersected with [a, b] x [c, d].
inline double disk_rect_area(double R, double a, double b, double c, double d) {
  a = std::max(a, -R);
  b = std::min(b, R);
  if (!(b > a) || !(d > c)) return 0.0;
  auto s = [R](double x) { return std::sqrt(std::max(0.0, R * R - x * x)); };
  auto G = [&](double x) {
    x = std::clamp(x, -R, R);
    return 0.5 * (x * s(x) + R * R * std::asin(x / R));
  };
  double bp[6];
  int nb = 0;
  bp[nb++] = a;
  for (double y : {c, d}) {
    if (!(std::abs(y) < R)) continue;
    const double x = std::sqrt(R * R - y * y);
    if (x > a && x < b) bp[nb++] = x;
    if (-x > a && -x < b) bp[nb++] = -x;
  }
  bp[nb++] = b;
  std::sort(bp, bp + nb);
  double area = 0.0;
  for (int k = 0; k + 1 < nb; ++k) {
    const double lo = bp[k], hi = bp[k + 1];
    if (!(hi > lo)) continue;
    const double sm = s(0.5 * (lo + hi));
    const bool top_flat = d < sm, bottom_flat = c > -sm;
    if ((top_flat ? d : sm) <= (bottom_flat ? c : -sm)) continue;
    area += top_flat ? d * (hi - lo) : G(hi) - G(lo);
    area -= bottom_flat ? c * (hi - lo) : -(G(hi) - G(lo));
  }
  return area;
}

/// Visits every cell overlapping the open ball B(center of cell, R) with its
/// overlap measure. Returns false if an overlapping cell is outside the domain.
template <class Fn>
bool coverage_ball(const GridDomain& d, std::size_t cell, double R, Fn&& fn) {
  const int i = d.col(cell), j = d.row(cell);
  const int reach = static_cast<int>(std::ceil(R / d.h + 0.5));
  const double h = d.h;
  for (int b = (d.dim == 2 ? -reach : 0); b <= (d.dim == 2 ? reach : 0); ++b)
    for (int a = -reach; a <= reach; ++a) {
      double w;
      if (d.dim == 1) {
        w = std::max(0.0, std::min(R, (a + 0.5) * h) - std::max(-R, (a - 0.5) * h));
      } else {
        // cells entirely inside or outside skip the area formula
        const double ax = std::abs(a) * h, by = std::abs(b) * h;
        const double far = std::hypot(ax + 0.5 * h, by + 0.5 * h);
        const double near = std::hypot(std::max(0.0, ax - 0.5 * h), std::max(0.0, by - 0.5 * h));
        if (near >= R) continue;
        w = far <= R ? h * h : disk_rect_area(R, (a - 0.5) * h, (a + 0.5) * h, (b - 0.5) * h, (b + 0.5) * h);
      }
      if (!(w > 0.0)) continue;
      if (!d.in_grid(i + a, j + b) || !d.masked(d.index(i + a, j + b))) return false;
      fn(d.index(i + a, j + b), w, a, b);
    }
  return true;
}

}  // namespace detail

/// u_t^alpha(x) = (t delta(x))^alpha times the ball mean of u at radius t delta(x).
inline ScalarField fractional_average(const ScalarField& u, double alpha, double t, const CellSet* only = nullptr,
                                      BallRule rule = BallRule::cell_center) {
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("t must lie in (0, 1)");
  const GridDomain& d = *u.domain;
  const auto a = detail::dense_signed(u);
  auto st = ball_stencil_for_radius(d.dim, d.nx, t * detail::max_delta_over(d, only), d.h);
  detail::BallWalker w(d, st, a.data(), false);
  ScalarField out(u.domain);
  if (only)
    for (auto c : d.cells) out.flags[c] |= kInvalid;
  detail::for_cells(d, only, [&](std::size_t c) {
    const double r = t * d.delta[c];
    double mean;
    if (rule == BallRule::coverage) {
      double sw = 0.0, su = 0.0;
      if (!detail::coverage_ball(d, c, r, [&](std::size_t q, double wq, int, int) {
            sw += wq;
            su += wq * a[q];
          }))
        return;
      mean = su / sw;
    } else {
      const std::size_t G = w.groups_below(r);
      auto cur = w.cursor(c, G);
      cur.advance_to(G);
      mean = cur.mean();
    }
    out[c] = std::pow(r, alpha) * mean;
    out.flags[c] &= static_cast<std::uint8_t>(~kInvalid);
    if (r < d.h) out.flags[c] |= kUnderResolved;
  });
  return out;
}

/// Three-term gradient of u_t^alpha from ball and sphere means:
///   (alpha - n) R^alpha (Ddelta / delta) mean_B u + n R^(alpha-1) mean_dB u nu
///     + n R^alpha (Ddelta / delta) mean_dB u,   R = t delta(x).
inline VectorField analytic_gradient_uta_Lp_form(const ScalarField& u, double alpha, double t,
                                                 const CellSet* only = nullptr) {
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("t must lie in (0, 1)");
  const GridDomain& d = *u.domain;
  const auto a = detail::dense_signed(u);
  const auto ok = detail::valid_mask(u);
  auto st = ball_stencil_for_radius(d.dim, d.nx, t * detail::max_delta_over(d, only), d.h);
  detail::BallWalker w(d, st, a.data(), false);
  VectorField out(u.domain);
  const double n = d.dim;
  detail::for_cells(d, only, [&](std::size_t c) {
    if (d.ridge[c]) return;
    const double delta = d.delta[c];
    const double R = t * delta;
    if (R < d.h || R > detail::sphere_cap(d, delta)) return;
    const std::size_t G = w.groups_below(R);
    auto cur = w.cursor(c, G);
    cur.advance_to(G);
    const double ball = cur.mean();
    auto sph = detail::sphere_means(d, a.data(), ok, d.center(c), R, true);
    const Point dd = d.ddelta[c];
    const double Ra = std::pow(R, alpha);
    Point g{0.0, 0.0};
    for (int k = 0; k < d.dim; ++k)
      g[k] = (alpha - n) * Ra * dd[k] / delta * ball + n * std::pow(R, alpha - 1.0) * sph.normal_mean[k] +
             n * Ra * dd[k] / delta * sph.mean;
    out.values[c] = g;
    out.valid[c] = 1;
  });
  return out;
}

/// Gradient of u_t^alpha from ball means only (Green's first identity):
///   alpha R^alpha (Ddelta / delta) mean_B u + R^alpha (Ddelta / delta) mean_B Du.(y - x)
///     + R^alpha mean_B Du.
inline VectorField analytic_gradient_uta_Sobolev_form(const ScalarField& u, const VectorField& Du, double alpha,
                                                      double t, const CellSet* only = nullptr) {
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("t must lie in (0, 1)");
  const GridDomain& d = *u.domain;
  if (Du.domain.get() != u.domain.get()) throw FieldError("gradient field lives on a different domain");
  for (auto c : d.cells)
    if (!Du.valid[c]) throw OperatorError("gradient field has invalid cells inside the domain");
  const auto a = detail::dense_signed(u);
  auto st = ball_stencil_for_radius(d.dim, d.nx, t * detail::max_delta_over(d, only), d.h);
  detail::BallWalker w(d, st, a.data(), false);
  VectorField out(u.domain);
  detail::for_cells(d, only, [&](std::size_t c) {
    if (d.ridge[c]) return;
    const double delta = d.delta[c];
    const double R = t * delta;
    if (R < d.h) return;
    const std::size_t G = w.groups_below(R);
    auto cur = w.cursor(c, G);
    cur.advance_to(G);
    const double ball = cur.mean();
    const std::size_t N = cur.count();
    const auto& s = w.stencil();
    double radial = 0.0;
    Point mean_grad{0.0, 0.0};
    for (std::size_t k = 0; k < N; ++k) {
      const std::size_t q = static_cast<std::size_t>(static_cast<std::int64_t>(c) + s.lin[k]);
      const Point& gq = Du.values[q];
      radial += gq[0] * s.di[k] * d.h + (d.dim == 2 ? gq[1] * s.dj[k] * d.h : 0.0);
      mean_grad = add(mean_grad, gq);
    }
    radial /= static_cast<double>(N);
    mean_grad = scale(mean_grad, 1.0 / static_cast<double>(N));
    const Point dd = d.ddelta[c];
    const double Ra = std::pow(R, alpha);
    Point g{0.0, 0.0};
    for (int k = 0; k < d.dim; ++k)
      g[k] = alpha * Ra * dd[k] / delta * ball + Ra * dd[k] / delta * radial + Ra * mean_grad[k];
    out.values[c] = g;
    out.valid[c] = 1;
  });
  return out;
}

/// Pointwise max over t in t_set of the fractional average of |u|.
inline ScalarField maximal_over_scales(const ScalarField& u, double alpha, std::vector<double> t_set,
                                       const CellSet* only = nullptr) {
  if (t_set.empty()) throw ConfigError("scale set is empty");
  for (double t : t_set)
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("scales must lie in (0, 1)");
  std::sort(t_set.begin(), t_set.end());
  const GridDomain& d = *u.domain;
  const auto a = detail::dense_abs(u);
  auto st = ball_stencil_for_radius(d.dim, d.nx, t_set.back() * detail::max_delta_over(d, only), d.h);
  detail::BallWalker w(d, st, a.data(), false);
  ScalarField out(u.domain);
  if (only)
    for (auto c : d.cells) out.flags[c] |= kInvalid;
  detail::for_cells(d, only, [&](std::size_t c) {
    const std::size_t Gmax = w.groups_below(t_set.back() * d.delta[c]);
    auto cur = w.cursor(c, Gmax);
    double best = 0.0;
    for (double t : t_set) {
      const double r = t * d.delta[c];
      cur.advance_to(w.groups_below(r));
      best = std::max(best, std::pow(r, alpha) * cur.mean());
    }
    out[c] = best;
    out.flags[c] &= static_cast<std::uint8_t>(~kInvalid);
  });
  return out;
}

}  // namespace fracmax
