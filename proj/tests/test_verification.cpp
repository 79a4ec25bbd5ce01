#include <gtest/gtest.h>

#include <sstream>

#include "fracmax/suite.hpp"

using namespace fracmax;

TEST(Report, VerdictRules) {
  ExperimentReport r;
  EXPECT_EQ(r.verdict(), Verdict::informative);
  r.inform("spread", 5.0, "<=", 1.0);
  EXPECT_EQ(r.verdict(), Verdict::informative);
  r.require("violations", 0.0, "==", 0.0);
  EXPECT_EQ(r.verdict(), Verdict::pass);
  r.require("error", 0.2, "<=", 0.1);
  EXPECT_EQ(r.verdict(), Verdict::fail);
  r.under_resolved = true;
  EXPECT_EQ(r.verdict(), Verdict::informative);
}

TEST(Report, ConditionRelations) {
  EXPECT_TRUE((Condition{"a", 1.0, "<=", 1.0, true}.holds()));
  EXPECT_FALSE((Condition{"a", 1.0, "<", 1.0, true}.holds()));
  EXPECT_TRUE((Condition{"a", 2.0, ">=", 2.0, true}.holds()));
  EXPECT_TRUE((Condition{"a", 3.0, ">", 2.0, true}.holds()));
  EXPECT_TRUE((Condition{"a", 0.0, "==", 0.0, true}.holds()));
  EXPECT_FALSE((Condition{"a", NAN, "<=", 1.0, true}.holds()));
}

TEST(Report, CsvLayoutIsStable) {
  ExperimentReport r;
  r.id = "demo";
  r.row("const_1", 0x1p-6, "C_emp", 1.5);
  r.require("x", 0.0, "==", 0.0);
  std::ostringstream a, b;
  write_reports_csv(a, {r});
  write_reports_csv(b, {r});
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), "check,member,h,constant,value,verdict\ndemo,const_1,0.015625,C_emp,1.5,pass\n");
  EXPECT_EQ(h_key(0x1p-6), "2^-6");
}

TEST(Helpers, RelativeErrorAndSafeRatio) {
  auto d = unit_disc(0x1p-4);
  VectorField a(d), b(d);
  CellSet cells;
  for (auto c : d->cells) {
    a.values[c] = {1.1, 0.0};
    b.values[c] = {1.0, 0.0};
    a.valid[c] = b.valid[c] = 1;
    cells.push_back(c);
  }
  std::size_t used = 0;
  EXPECT_NEAR(relative_error(a, b, cells, &used), 0.1, 1e-12);
  EXPECT_EQ(used, cells.size());
  EXPECT_EQ(safe_ratio(0.0, 0.0), 0.0);
  EXPECT_TRUE(std::isinf(safe_ratio(1.0, 0.0)));
}

TEST(Helpers, LatticeProbesAvoidRidgeAndBoundary) {
  auto d = unit_disc(0x1p-6);
  auto ps = lattice_probes(*d, 1.0 / 16.0, 0.1);
  ASSERT_FALSE(ps.probes.empty());
  for (auto c : ps.probes) {
    EXPECT_FALSE(d->ridge[c]);
    EXPECT_GE(d->delta[c], 0.1);
  }
  EXPECT_GE(ps.stencil.size(), ps.probes.size());
}

TEST(Checks, ExactIdentityAtCoarseResolution) {
  auto r = check_exact_identity(0x1p-6, {0.5, 1.0, 1.5}, 0.1);
  EXPECT_EQ(r.verdict(), Verdict::pass);
}

TEST(Checks, BoundaryDecayHasNoViolations) {
  auto r = check_boundary_decay(full_battery(), 1.0, 0x1p-5);
  EXPECT_EQ(r.verdict(), Verdict::pass);
}

TEST(Checks, ExactInequalitiesHaveNoViolations) {
  auto r = check_exact_inequalities(full_battery(), 0x1p-5);
  EXPECT_EQ(r.verdict(), Verdict::pass);
}

TEST(Checks, CubeClosedForm) {
  auto r = check_cube_aniso({"const:1", "affine:1,1"}, 1.5, 0x1p-6);
  EXPECT_EQ(r.verdict(), Verdict::pass);
}

TEST(Checks, NormBoundsAreInformative) {
  auto r = check_norm_bounds({constant_member(1.0), bump_a()}, OperatorParams(1.0, 1.5, 2), {0x1p-5, 0x1p-6});
  EXPECT_EQ(r.verdict(), Verdict::informative);
  EXPECT_THROW(check_norm_bounds({bump_a()}, OperatorParams(1.0, 2.0, 2), {0x1p-5}), ConfigError);
}

TEST(Checks, RefinementNeedsTwoResolutions) {
  EXPECT_THROW(refinement_study("exact_identity", {0x1p-6}), ConfigError);
  EXPECT_THROW(refinement_study("nope", {0x1p-5, 0x1p-6}), ConfigError);
  auto r = refinement_study("exact_identity", {0x1p-5, 0x1p-6});
  EXPECT_EQ(r.verdict(), Verdict::pass);
}

TEST(Suite, RejectsUnknownCriteria) {
  SuiteOptions o;
  o.only = {15};
  EXPECT_THROW(run_suite(o), ConfigError);
}

TEST(Suite, SelectedCriteriaReportInOrder) {
  SuiteOptions o;
  o.only = {8, 9};
  std::vector<int> seen;
  auto res = run_suite(o, [&](const CriterionResult& r) { seen.push_back(r.number); });
  EXPECT_EQ(seen, (std::vector<int>{8, 9}));
  for (const auto& r : res) {
    EXPECT_TRUE(r.passed()) << r.summary_line();
    EXPECT_EQ(r.summary_line().rfind("PASS criterion", 0), 0u);
    EXPECT_FALSE(r.to_json().contains("seconds"));
  }
}
