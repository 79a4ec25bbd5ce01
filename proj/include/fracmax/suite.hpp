#pragma once

// The fourteen acceptance criteria with their pinned parameters and limits.

#include <json.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fracmax/verification.hpp"

namespace fracmax {

struct CriterionResult {
  int number = 0;
  std::string title;
  ExperimentReport report;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0: none

  bool within_time() const { return time_limit <= 0.0 || seconds <= time_limit; }
  bool passed() const { return report.verdict() == Verdict::pass && within_time(); }

  /// Deterministic part only; timings stay out of the JSON.
  nlohmann::json to_json() const {
    auto j = report.to_json();
    j["criterion"] = number;
    j["title"] = title;
    if (time_limit > 0.0) j["time_limit_seconds"] = time_limit;
    return j;
  }

  std::string summary_line() const {
    std::string line = std::string(passed() ? "PASS" : "FAIL") + " criterion " + std::to_string(number) + " " + report.id;
    if (time_limit > 0.0) line += " [" + num(std::round(seconds * 10.0) / 10.0) + " s, limit " + num(time_limit) + " s]";
    std::string failing;
    for (const auto& c : report.conditions)
      if (c.binding && !c.holds()) {
        if (!failing.empty()) failing += "; ";
        failing += c.name + " = " + num(c.value) + " (needs " + c.relation + " " + num(c.limit) + ")";
      }
    if (!within_time()) failing += std::string(failing.empty() ? "" : "; ") + "runtime over limit";
    if (!failing.empty()) line += ": " + failing;
    return line;
  }
};

inline const std::vector<std::pair<int, std::string>>& criterion_titles() {
  static const std::vector<std::pair<int, std::string>> t{
      {1, "exact identity for constants"},
      {2, "gradient identities of the fractional average"},
      {3, "pointwise gradient bound by M and S"},
      {4, "pointwise gradient bound by M|Du|"},
      {5, "exact inequalities"},
      {6, "singular radial field sharpness"},
      {7, "rooms and corridors sharpness"},
      {8, "cube maximal closed form"},
      {9, "punctured interval divergence rate"},
      {10, "Whitney cover and partition invariants"},
      {11, "comparability of M* and M"},
      {12, "upper gradient domination"},
      {13, "weak type and layer cake"},
      {14, "Hardy quotients"},
  };
  return t;
}

struct SuiteOptions {
  std::set<int> only;  // empty: all
};

/// Runs the selected criteria in order; on_done fires after each one.
inline std::vector<CriterionResult> run_suite(const SuiteOptions& opt = {},
                                              const std::function<void(const CriterionResult&)>& on_done = {}) {
  auto wanted = [&](int k) { return opt.only.empty() || opt.only.count(k) > 0; };
  for (int k : opt.only)
    if (k < 1 || k > 14) throw ConfigError("criteria are numbered 1 to 14");
  std::vector<CriterionResult> out;
  using clock = std::chrono::steady_clock;
  auto finish = [&](int number, ExperimentReport rep, clock::time_point t0, double limit) {
    CriterionResult r;
    r.number = number;
    r.title = criterion_titles()[number - 1].second;
    r.report = std::move(rep);
    r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    r.time_limit = limit;
    out.push_back(r);
    if (on_done) on_done(out.back());
  };

  if (wanted(1)) {
    auto t0 = clock::now();
    finish(1, check_exact_identity(0x1p-8, {0.5, 1.0, 1.5}, 0.1), t0, 60.0);
  }
  if (wanted(2)) {
    auto t0 = clock::now();
    finish(2, check_gradient_identities(bump_a(), 1.0, 0.5, {0x1p-8, 0x1p-9}), t0, 90.0);
  }
  if (wanted(3) || wanted(4)) {
    auto t0 = clock::now();
    auto pr = check_pointwise_bounds(band_limited_battery(), 1.0, {0x1p-7, 0x1p-8});
    if (wanted(3)) finish(3, pr.first, t0, 0.0);
    if (wanted(4)) finish(4, pr.second, t0, 0.0);
  }
  if (wanted(5)) {
    auto t0 = clock::now();
    finish(5, check_exact_inequalities(full_battery(), 0x1p-6), t0, 0.0);
  }
  if (wanted(6)) {
    auto t0 = clock::now();
    finish(6, check_ball_singular(2.0, 0.5, 0x1p-9), t0, 0.0);
  }
  if (wanted(7)) {
    auto t0 = clock::now();
    finish(7, check_rooms_corridors(2.5, 1.25, 1.5, 3, 0x1p-11), t0, 0.0);
  }
  if (wanted(8)) {
    auto t0 = clock::now();
    finish(8, check_cube_aniso({"const:1", "affine:1,1"}, 1.5, 0x1p-7), t0, 0.0);
  }
  if (wanted(9)) {
    auto t0 = clock::now();
    finish(9, check_punctured(0.5, 1.0, 6, 0x1p-22, 3), t0, 120.0);
  }
  if (wanted(10) || wanted(11) || wanted(12) || wanted(13) || wanted(14)) {
    MetricStudyOptions mo;
    auto t0 = clock::now();
    auto levels = run_metric_study(full_battery(), mo);
    if (wanted(10)) finish(10, check_whitney_invariants(levels), t0, 0.0);
    if (wanted(11)) finish(11, check_comparability(levels, mo), t0, 0.0);
    if (wanted(12)) finish(12, check_upper_gradient(levels, mo), t0, 0.0);
    if (wanted(13)) finish(13, check_weak_type(levels, mo), t0, 0.0);
    if (wanted(14)) finish(14, check_hardy(levels, 2.0, mo), t0, 0.0);
  }
  return out;
}

inline nlohmann::json suite_to_json(const std::vector<CriterionResult>& results) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results) j.push_back(r.to_json());
  return {{"criteria", j}};
}

}  // namespace fracmax
