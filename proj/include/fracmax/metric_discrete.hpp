#pragma once

// Discrete fractional maximal function on finite metric measure spaces:
// Whitney balls B_i = B(x_i, r_i) with r_i = t delta(x_i) / 18, a tent
// partition of unity subordinate to the 6B_i, and the convolution
// u_t(x) = sum_i phi_i(x) r_i^alpha |u|_{3B_i}.

#include <json.hpp>

#include <istream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fracmax/core.hpp"
#include "fracmax/domain_grid.hpp"
#include "fracmax/fields.hpp"
#include "fracmax/maximal_ops.hpp"

namespace fracmax {

/// Finite metric measure space. Only points of Omega carry data; the grid
/// backend represents R^n \ Omega implicitly through the analytic delta.
class MetricMeasureSpace {
 public:
  double Q = 2.0;
  double c_l = 0.0;  // fitted: min mu(B(x, r)) / r^Q over sampled pairs
  double c_d = 0.0;  // fitted: max mu(B(x, 2r)) / mu(B(x, r)) over sampled pairs

  static MetricMeasureSpace from_grid(DomainPtr dom) {
    MetricMeasureSpace s;
    s.grid_ = dom;
    s.Q = dom->dim;
    s.cell_to_point_.assign(dom->size(), -1);
    for (std::size_t k = 0; k < dom->cells.size(); ++k) {
      s.cell_to_point_[dom->cells[k]] = static_cast<std::int64_t>(k);
      s.delta_.push_back(dom->delta[dom->cells[k]]);
      s.weight_.push_back(dom->cell_volume());
    }
    s.omega_.assign(dom->cells.size(), 1);
    s.fit_constants();
    return s;
  }

  /// Explicit backend: symmetric distance matrix (row-major, N x N), point
  /// weights and membership in Omega. delta is the distance to the nearest
  /// point outside Omega.
  static MetricMeasureSpace from_matrix(std::vector<double> dist, std::vector<double> weights,
                                        std::vector<std::uint8_t> omega, double Q) {
    const std::size_t N = weights.size();
    if (dist.size() != N * N) throw ConfigError("distance matrix must be N x N");
    if (omega.size() != N) throw ConfigError("omega mask size mismatch");
    if (!(Q > 0.0)) throw ConfigError("Q must be positive");
    for (double w : weights)
      if (!(w > 0.0)) throw ConfigError("weights must be positive");
    for (std::size_t i = 0; i < N; ++i) {
      if (dist[i * N + i] != 0.0) throw ConfigError("distance matrix must vanish on the diagonal");
      for (std::size_t j = 0; j < N; ++j)
        if (!(dist[i * N + j] >= 0.0) || dist[i * N + j] != dist[j * N + i])
          throw ConfigError("distance matrix must be symmetric and non-negative");
    }
    MetricMeasureSpace s;
    s.Q = Q;
    s.matrix_ = std::move(dist);
    s.all_weight_ = std::move(weights);
    s.all_omega_ = std::move(omega);
    bool has_complement = false;
    for (std::size_t i = 0; i < N; ++i) {
      if (s.all_omega_[i]) s.points_.push_back(i);
      else has_complement = true;
    }
    if (!has_complement) throw DomainError("the complement of Omega must be nonempty");
    if (s.points_.empty()) throw DomainError("degenerate domain");
    for (auto i : s.points_) {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < N; ++j)
        if (!s.all_omega_[j]) d = std::min(d, s.matrix_[i * N + j]);
      s.delta_.push_back(d);
      s.weight_.push_back(s.all_weight_[i]);
    }
    s.omega_.assign(s.points_.size(), 1);
    s.fit_constants();
    return s;
  }

  /// Distance CSV (N rows of N values) and weights CSV with header
  /// "weight,omega" (omega is 0 or 1).
  static MetricMeasureSpace from_csv(std::istream& dist_csv, std::istream& weights_csv, double Q) {
    auto split = [](const std::string& line) {
      std::vector<std::string> out;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) out.push_back(cell);
      return out;
    };
    std::vector<double> dist;
    std::string line;
    std::size_t rows = 0;
    while (std::getline(dist_csv, line)) {
      if (line.empty()) continue;
      for (auto& c : split(line)) dist.push_back(parse_number(c));
      ++rows;
    }
    std::vector<double> w;
    std::vector<std::uint8_t> om;
    bool header = true;
    while (std::getline(weights_csv, line)) {
      if (line.empty()) continue;
      auto cells = split(line);
      if (header) {
        header = false;
        if (cells.size() < 2 || cells[0] != "weight" || cells[1] != "omega")
          throw ConfigError("weights CSV needs the header weight,omega");
        continue;
      }
      if (cells.size() < 2) throw ConfigError("weights CSV rows need weight,omega");
      w.push_back(parse_number(cells[0]));
      om.push_back(parse_number(cells[1]) != 0.0 ? 1 : 0);
    }
    if (rows != w.size()) throw ConfigError("distance matrix and weights disagree on the point count");
    return from_matrix(std::move(dist), std::move(w), std::move(om), Q);
  }

  /// Number of Omega points; data vectors are indexed by these.
  std::size_t size() const { return delta_.size(); }
  double delta(std::size_t i) const { return delta_[i]; }
  double weight(std::size_t i) const { return weight_[i]; }
  bool is_grid() const { return static_cast<bool>(grid_); }
  const DomainPtr& grid() const { return grid_; }

  double distance(std::size_t i, std::size_t j) const {
    if (grid_) return dist(grid_->center(grid_->cells[i]), grid_->center(grid_->cells[j]), grid_->dim);
    const std::size_t N = all_weight_.size();
    return matrix_[points_[i] * N + points_[j]];
  }

  /// Calls fn(j, d(i, j)) for every Omega point j with d(i, j) < r, in index order.
  template <class Fn>
  void for_each_in_ball(std::size_t i, double r, Fn&& fn) const {
    if (grid_) {
      const auto& d = *grid_;
      const std::size_t c = d.cells[i];
      const int ci = d.col(c), cj = d.row(c);
      const int reach = static_cast<int>(std::ceil(r / d.h));
      for (int b = (d.dim == 2 ? -reach : 0); b <= (d.dim == 2 ? reach : 0); ++b)
        for (int a = -reach; a <= reach; ++a) {
          if (!d.in_grid(ci + a, cj + b)) continue;
          const double dd = d.h * std::sqrt(static_cast<double>(a) * a + static_cast<double>(b) * b);
          if (!(dd < r)) continue;
          const std::int64_t q = cell_to_point_[d.index(ci + a, cj + b)];
          if (q >= 0) fn(static_cast<std::size_t>(q), dd);
        }
      return;
    }
    const std::size_t N = all_weight_.size();
    for (std::size_t j = 0; j < points_.size(); ++j) {
      const double dd = matrix_[points_[i] * N + points_[j]];
      if (dd < r) fn(j, dd);
    }
  }

  /// mu(B(x_i, r)) counting every point of X.
  double measure_ball(std::size_t i, double r) const {
    if (grid_) {
      double m = 0.0;
      for_each_in_ball(i, r, [&](std::size_t j, double) { m += weight_[j]; });
      return m;
    }
    const std::size_t N = all_weight_.size();
    double m = 0.0;
    for (std::size_t j = 0; j < N; ++j)
      if (matrix_[points_[i] * N + j] < r) m += all_weight_[j];
    return m;
  }

  /// Values of a grid field at the Omega points.
  std::vector<double> values_of(const ScalarField& f) const {
    if (!grid_ || f.domain.get() != grid_.get()) throw FieldError("field does not live on this space's grid");
    std::vector<double> v(size());
    for (std::size_t k = 0; k < size(); ++k) {
      if (!f.valid(grid_->cells[k])) throw FieldError("field has invalid cells inside the domain");
      v[k] = f[grid_->cells[k]];
    }
    return v;
  }

  ScalarField to_field(const std::vector<double>& v) const {
    if (!grid_) throw FieldError("explicit spaces have no grid field");
    ScalarField f(grid_);
    for (std::size_t k = 0; k < size(); ++k) f[grid_->cells[k]] = v[k];
    return f;
  }

  /// Local fractional maximal function with radius bound delta / beta. The
  /// grid backend delegates to the lattice operator; the explicit backend
  /// walks the sorted distances of each point the same way.
  std::vector<double> local_maximal(const std::vector<double>& u, double alpha, double beta = 1.0) const {
    if (grid_) {
      auto f = to_field(u);
      auto m = beta == 1.0 ? local_fractional_maximal(f, alpha) : restricted_maximal(f, alpha, beta);
      return values_of(m);
    }
    std::vector<double> out(size(), 0.0);
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < size(); ++i) {
      order.clear();
      for (std::size_t j = 0; j < size(); ++j) order.push_back({distance(i, j), j});
      std::sort(order.begin(), order.end());
      const double bound = delta_[i] / beta;
      double best = alpha == 0.0 ? std::abs(u[i]) : 0.0, sw = 0.0, su = 0.0;
      std::size_t k = 0;
      while (k < order.size() && order[k].first < bound) {
        const double d = order[k].first;
        if (d > 0.0) best = std::max(best, std::pow(d, alpha) * su / sw);
        for (; k < order.size() && order[k].first == d; ++k) {
          sw += weight_[order[k].second];
          su += weight_[order[k].second] * std::abs(u[order[k].second]);
        }
      }
      if (sw > 0.0) best = std::max(best, std::pow(bound, alpha) * su / sw);
      out[i] = best;
    }
    return out;
  }

  double l1_norm(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += weight_[i] * std::abs(u[i]);
    return s;
  }

  double lp_norm(const std::vector<double>& u, double p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += weight_[i] * std::pow(std::abs(u[i]), p);
    return std::pow(s, 1.0 / p);
  }

  double measure_above(const std::vector<double>& f, double lambda) const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      if (f[i] > lambda) m += weight_[i];
    return m;
  }

  double total_measure() const { return std::accumulate(weight_.begin(), weight_.end(), 0.0); }

 private:
  void fit_constants() {
    c_l = std::numeric_limits<double>::infinity();
    c_d = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, size() / 256);
    const double floor_r = grid_ ? 2.0 * grid_->h : 0.0;
    for (std::size_t i = 0; i < size(); i += stride) {
      double r = 0.5 * delta_[i];
      for (int k = 0; k < 6 && r > floor_r; ++k, r *= 0.5) {
        const double m = measure_ball(i, r);
        if (m > 0.0) c_l = std::min(c_l, m / std::pow(r, Q));
        if (2.0 * r < delta_[i] && m > 0.0) c_d = std::max(c_d, measure_ball(i, 2.0 * r) / m);
      }
    }
    if (!std::isfinite(c_l)) c_l = 0.0;
  }

  DomainPtr grid_;
  std::vector<std::int64_t> cell_to_point_;
  std::vector<double> matrix_;
  std::vector<double> all_weight_;
  std::vector<std::uint8_t> all_omega_;
  std::vector<std::size_t> points_;
  std::vector<double> delta_;
  std::vector<double> weight_;
  std::vector<std::uint8_t> omega_;
};

struct WhitneyCover {
  double t = 0.5;
  std::vector<std::size_t> center;
  std::vector<double> radius;
  /// Points of 6B_i with their distance to x_i, in point order.
  std::vector<std::vector<std::pair<std::size_t, double>>> members6;
  /// Balls whose 6B_j contains the point, in ball order.
  std::vector<std::vector<std::uint32_t>> balls6_of_point;
  std::size_t overlap = 0;  // N_emp
  double coverage = 0.0;    // fraction of Omega points lying in some B_i
  std::size_t sandwich_violations = 0;
  std::size_t neighbor_violations = 0;      // r_i <= (3/2) r_j
  std::size_t neighbor_violations_up = 0;   // r_j <= (5/3) r_i
  std::size_t pairs_checked = 0;

  std::size_t size() const { return center.size(); }

  nlohmann::json to_json() const {
    nlohmann::json balls = nlohmann::json::array();
    for (std::size_t i = 0; i < size(); ++i) balls.push_back({{"center", center[i]}, {"radius", radius[i]}});
    return {{"t", t},
            {"balls", balls},
            {"overlap", overlap},
            {"coverage", coverage},
            {"sandwich_violations", sandwich_violations},
            {"neighbor_violations", neighbor_violations},
            {"neighbor_violations_up", neighbor_violations_up}};
  }
};

/// Greedy cover: visit Omega points by decreasing delta and open a ball at
/// every point not yet inside an earlier ball. Every point is then covered.
inline WhitneyCover build_whitney(const MetricMeasureSpace& space, double t) {
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("t must lie in (0, 1)");
  const std::size_t N = space.size();
  if (N == 0) throw DomainError("Omega is empty");
  WhitneyCover cov;
  cov.t = t;
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return space.delta(a) > space.delta(b); });
  std::vector<std::uint8_t> covered(N, 0);
  for (auto i : order) {
    if (covered[i]) continue;
    const double r = t * space.delta(i) / 18.0;
    cov.center.push_back(i);
    cov.radius.push_back(r);
    space.for_each_in_ball(i, r, [&](std::size_t j, double) { covered[j] = 1; });
  }
  std::size_t n_cov = 0;
  for (auto c : covered) n_cov += c;
  cov.coverage = static_cast<double>(n_cov) / static_cast<double>(N);

  const std::size_t B = cov.size();
  cov.members6.resize(B);
  parallel_for(B, [&](std::size_t b) {
    space.for_each_in_ball(cov.center[b], 6.0 * cov.radius[b],
                           [&](std::size_t j, double d) { cov.members6[b].push_back({j, d}); });
  });
  cov.balls6_of_point.assign(N, {});
  std::vector<std::vector<std::uint32_t>> balls1_of_point(N);
  for (std::size_t b = 0; b < B; ++b)
    for (auto [j, d] : cov.members6[b]) {
      cov.balls6_of_point[j].push_back(static_cast<std::uint32_t>(b));
      if (d < cov.radius[b]) balls1_of_point[j].push_back(static_cast<std::uint32_t>(b));
      const double td = t * space.delta(j);
      if (td < 12.0 * cov.radius[b] || td > 24.0 * cov.radius[b]) ++cov.sandwich_violations;
    }
  for (std::size_t j = 0; j < N; ++j) {
    cov.overlap = std::max(cov.overlap, cov.balls6_of_point[j].size());
    // j lies in B_i and in 6B_k, so B_i meets 6B_k
    for (auto i : balls1_of_point[j])
      for (auto k : cov.balls6_of_point[j]) {
        ++cov.pairs_checked;
        if (cov.radius[i] > 1.5 * cov.radius[k]) ++cov.neighbor_violations;
        if (3.0 * cov.radius[k] > 5.0 * cov.radius[i]) ++cov.neighbor_violations_up;
      }
  }
  return cov;
}

struct PartitionOfUnity {
  /// phi_i at the points of 6B_i, aligned with WhitneyCover::members6.
  std::vector<std::vector<double>> phi;
  double nu = 0.0;           // 1 / N_emp
  double L_bound = 0.0;      // (1 + 2 N_emp) / 3
  double L_emp = 0.0;        // certified: largest |phi_i(x) - phi_i(y)| r_i / d(x, y) seen
  double sum_error = 0.0;    // max |sum_i phi_i - 1|
  std::size_t lower_violations = 0;  // phi_i < nu somewhere on 3B_i
  std::size_t range_violations = 0;  // phi_i outside [0, 1]
  std::size_t lipschitz_pairs = 0;
  bool certified = false;
};

/// psi_i = clamp(2 - d(x, x_i) / (3 r_i), 0, 1): one on 3B_i, zero off 6B_i,
/// slope 1/(3 r_i); phi_i = psi_i / sum_j psi_j. With certify set, pairs
/// inside each 6B_i (all of them, or a 128-point strided subset) give L_emp.
inline PartitionOfUnity build_partition(const MetricMeasureSpace& space, const WhitneyCover& cov, bool certify = true) {
  const std::size_t N = space.size(), B = cov.size();
  PartitionOfUnity pou;
  auto psi = [&](std::size_t b, double d) { return std::clamp(2.0 - d / (3.0 * cov.radius[b]), 0.0, 1.0); };
  std::vector<double> total(N, 0.0);
  for (std::size_t b = 0; b < B; ++b)
    for (auto [j, d] : cov.members6[b]) total[j] += psi(b, d);
  for (std::size_t j = 0; j < N; ++j)
    if (!(total[j] > 0.0)) throw OperatorError("partition of unity: point with no positive tent");
  pou.phi.resize(B);
  std::vector<double> sum(N, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    pou.phi[b].reserve(cov.members6[b].size());
    for (auto [j, d] : cov.members6[b]) {
      const double v = psi(b, d) / total[j];
      pou.phi[b].push_back(v);
      sum[j] += v;
    }
  }
  for (std::size_t j = 0; j < N; ++j) pou.sum_error = std::max(pou.sum_error, std::abs(sum[j] - 1.0));
  pou.nu = 1.0 / static_cast<double>(cov.overlap);
  pou.L_bound = (1.0 + 2.0 * static_cast<double>(cov.overlap)) / 3.0;
  pou.certified = certify;
  std::vector<double> lemp(B, 0.0);
  std::vector<std::size_t> pairs(B, 0), lower(B, 0), range(B, 0);
  parallel_for(B, [&](std::size_t b) {
    const auto& mem = cov.members6[b];
    const auto& ph = pou.phi[b];
    for (std::size_t k = 0; k < mem.size(); ++k) {
      if (ph[k] < 0.0 || ph[k] > 1.0) ++range[b];
      if (mem[k].second <= 3.0 * cov.radius[b] && ph[k] < pou.nu) ++lower[b];
    }
    if (!certify) return;
    auto slope = [&](std::size_t a, std::size_t c) {
      const double d = space.distance(mem[a].first, mem[c].first);
      if (!(d > 0.0)) return;
      lemp[b] = std::max(lemp[b], std::abs(ph[a] - ph[c]) * cov.radius[b] / d);
      ++pairs[b];
    };
    // consecutive members are lattice neighbours on the grid backend
    for (std::size_t a = 0; a + 1 < mem.size(); ++a) slope(a, a + 1);
    const std::size_t step = (mem.size() + 127) / 128;
    for (std::size_t a = 0; a < mem.size(); a += step)
      for (std::size_t c = a + step; c < mem.size(); c += step) slope(a, c);
  });
  for (std::size_t b = 0; b < B; ++b) {
    pou.L_emp = std::max(pou.L_emp, lemp[b]);
    pou.lipschitz_pairs += pairs[b];
    pou.lower_violations += lower[b];
    pou.range_violations += range[b];
  }
  return pou;
}

namespace detail {

/// mu-weighted mean of |u| over 3B_i for every ball.
inline std::vector<double> means3(const MetricMeasureSpace& space, const WhitneyCover& cov, const std::vector<double>& u) {
  std::vector<double> m(cov.size());
  for (std::size_t b = 0; b < cov.size(); ++b) {
    double sw = 0.0, su = 0.0;
    for (auto [j, d] : cov.members6[b])
      if (d < 3.0 * cov.radius[b]) {
        sw += space.weight(j);
        su += space.weight(j) * std::abs(u[j]);
      }
    if (!(sw > 0.0)) throw OperatorError("3B_i contains no points");
    m[b] = su / sw;
  }
  return m;
}

}  // namespace detail

/// u_t^alpha(x) = sum_i phi_i(x) r_i^alpha |u|_{3B_i}.
inline std::vector<double> discrete_convolution(const std::vector<double>& u, const MetricMeasureSpace& space,
                                                const WhitneyCover& cov, const PartitionOfUnity& pou, double alpha) {
  if (u.size() != space.size()) throw FieldError("field size does not match the space");
  const auto m = detail::means3(space, cov, u);
  std::vector<double> out(space.size(), 0.0);
  for (std::size_t b = 0; b < cov.size(); ++b) {
    const double coef = std::pow(cov.radius[b], alpha) * m[b];
    const auto& mem = cov.members6[b];
    for (std::size_t k = 0; k < mem.size(); ++k) out[mem[k].first] += pou.phi[b][k] * coef;
  }
  return out;
}

/// The dyadic scale set {j / 2^m : j = 1 .. 2^m - 1}.
inline std::vector<double> dyadic_scales(int count) {
  if (count < 2) throw ConfigError("scale count must be at least 2");
  std::vector<double> t;
  for (int j = 1; j < count; ++j) t.push_back(static_cast<double>(j) / count);
  return t;
}

/// M*_{alpha,Omega}u = max over t in t_set of the discrete convolution, with a
/// fresh cover and partition per scale.
inline std::vector<double> discrete_maximal(const std::vector<double>& u, const MetricMeasureSpace& space,
                                            const std::vector<double>& t_set, double alpha) {
  if (t_set.empty()) throw ConfigError("scale set is empty");
  std::vector<double> out(space.size(), 0.0);
  for (double t : t_set) {
    auto cov = build_whitney(space, t);
    auto pou = build_partition(space, cov, false);
    auto v = discrete_convolution(u, space, cov, pou, alpha);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], v[i]);
  }
  return out;
}

/// g_t(x) = L sum_j r_j^(alpha-1) |u|_{3B_j} chi_{6B_j}(x) with the certified L.
inline std::vector<double> upper_gradient_gt(const std::vector<double>& u, const MetricMeasureSpace& space,
                                             const WhitneyCover& cov, const PartitionOfUnity& pou, double alpha) {
  if (!(alpha >= 1.0)) throw ConfigError("upper gradient needs alpha >= 1");
  if (!pou.certified) throw ConfigError("partition was built without a Lipschitz certificate");
  const auto m = detail::means3(space, cov, u);
  std::vector<double> out(space.size(), 0.0);
  for (std::size_t b = 0; b < cov.size(); ++b) {
    const double coef = pou.L_emp * std::pow(cov.radius[b], alpha - 1.0) * m[b];
    for (auto [j, d] : cov.members6[b]) out[j] += coef;
  }
  return out;
}

struct DistanceWeightedReport {
  double constant = 0.0;         // max M* / (delta M_{alpha-1})
  double hardy = 0.0;            // sum (M* / delta)^q mu
  double hardy_ratio = 0.0;      // hardy / ||u||_p^q
  double q = 0.0;
};

inline DistanceWeightedReport distance_weighted_bound_check(const std::vector<double>& u,
                                                            const MetricMeasureSpace& space,
                                                            const std::vector<double>& t_set, double alpha, double p) {
  if (!(alpha >= 1.0)) throw ConfigError("distance-weighted bound needs alpha >= 1");
  DistanceWeightedReport rep;
  const double n = space.Q;
  if (!((alpha - 1.0) * p < n)) throw ConfigError("exponent q undefined for these alpha, p");
  rep.q = n * p / (n - (alpha - 1.0) * p);
  const auto ms = discrete_maximal(u, space, t_set, alpha);
  const auto m1 = space.local_maximal(u, alpha - 1.0);
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (m1[i] > 0.0) rep.constant = std::max(rep.constant, ms[i] / (space.delta(i) * m1[i]));
    rep.hardy += space.weight(i) * std::pow(ms[i] / space.delta(i), rep.q);
  }
  const double up = std::pow(space.lp_norm(u, p), rep.q);
  rep.hardy_ratio = up > 0.0 ? rep.hardy / up : 0.0;
  return rep;
}

struct WeakTypeReport {
  double c_wt = 0.0;
  double exponent = 0.0;  // Q / (Q - alpha)
  double l1 = 0.0;
  /// Layer-cake bound ||M* u||_s^s <= ||u||_1^s (mu(Omega) + C_wt s / (gamma - s)) at a = ||u||_1.
  struct Split {
    double s, lhs, bound;
  };
  std::vector<Split> splits;
};

inline WeakTypeReport weak_type_check(const std::vector<double>& u, const MetricMeasureSpace& space, double alpha,
                                      std::vector<double> lambda_grid, const std::vector<double>& t_set) {
  if (!(alpha > 0.0 && alpha < space.Q)) throw ConfigError("weak type needs 0 < alpha < Q");
  WeakTypeReport rep;
  rep.exponent = space.Q / (space.Q - alpha);
  rep.l1 = space.l1_norm(u);
  if (rep.l1 == 0.0) return rep;
  const auto ms = discrete_maximal(u, space, t_set, alpha);
  if (lambda_grid.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : ms)
      if (v > 0.0) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    for (int k = 0; k < 200 && hi > 0.0; ++k) lambda_grid.push_back(lo * std::pow(hi / lo, k / 199.0) * (1.0 - 1e-12));
  }
  for (double lam : lambda_grid) {
    if (!(lam > 0.0)) throw ConfigError("lambda must be positive");
    rep.c_wt = std::max(rep.c_wt, space.measure_above(ms, lam) * std::pow(lam / rep.l1, rep.exponent));
  }
  for (double frac : {0.0, 0.5}) {
    const double s = 1.0 + frac * (rep.exponent - 1.0);
    double lhs = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) lhs += space.weight(i) * std::pow(ms[i], s);
    const double bound = std::pow(rep.l1, s) * (space.total_measure() + rep.c_wt * s / (rep.exponent - s));
    rep.splits.push_back({s, lhs, bound});
  }
  return rep;
}

}  // namespace fracmax
