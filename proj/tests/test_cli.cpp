#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fracmax/domain_grid.hpp"
#include "fracmax/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("fracmax_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string(FRACMAX_CLI) + " " + args + " --out " + dir.string() + " > " +
                          (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, MaximalOfOneIsDelta) {
  auto dir = scratch("maximal");
  ASSERT_EQ(run("maximal --domain ball --alpha 1 --h 1/64 --u const:1", dir), 0);
  auto dom = fracmax::build_domain(fracmax::domain_descriptor("ball"), 1.0 / 64.0);
  std::ifstream in(dir / "maximal.csv");
  std::string line;
  const double g = 0.5 / 64.0;
  for (int j = 0; std::getline(in, line); ++j) {
    std::stringstream ss(line);
    std::string cell;
    for (int i = 0; std::getline(ss, cell, ','); ++i) {
      const std::size_t c = dom->index(i, j);
      if (!dom->masked(c)) {
        EXPECT_EQ(cell, "nan");
        continue;
      }
      const double v = std::stod(cell);
      EXPECT_LE(v, dom->delta[c] + 1e-12);
      EXPECT_GE(v, dom->delta[c] - g - 1e-12);
    }
  }
  auto meta = json::parse(slurp(dir / "maximal.json"));
  EXPECT_EQ(meta["parameters"]["h"], "1/64");
}

TEST(Cli, OutputsAreByteIdentical) {
  auto a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(run("maximal --h 1/32 --u band:4 --alpha 1/2", a), 0);
  ASSERT_EQ(run("maximal --h 1/32 --u band:4 --alpha 1/2", b), 0);
  EXPECT_EQ(slurp(a / "maximal.csv"), slurp(b / "maximal.csv"));
  EXPECT_EQ(slurp(a / "maximal.json").size() > 0, true);
  ASSERT_EQ(run("--threads 2 maximal --h 1/32 --u band:4 --alpha 1/2", b), 0);
  EXPECT_EQ(slurp(a / "maximal.csv"), slurp(b / "maximal.csv"));
}

TEST(Cli, VerifyBoundaryDecayPasses) {
  auto dir = scratch("verify");
  ASSERT_EQ(run("verify --check boundary_decay --battery all --h 1/32", dir), 0);
  auto rep = json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(rep["reports"][0]["verdict"], "pass");
  EXPECT_EQ(slurp(dir / "report.csv").rfind("check,member,h,constant,value,verdict\n", 0), 0u);
}

TEST(Cli, DryRunComputesNothing) {
  auto dir = scratch("dry");
  ASSERT_EQ(run("--dry-run maximal --alpha 3/2 --h 1/1024", dir), 0);
  EXPECT_FALSE(fs::exists(dir / "maximal.csv"));
  auto resolved = json::parse(slurp(dir / "stdout.txt"));
  EXPECT_EQ(resolved["parameters"]["alpha"], "3/2");
}

TEST(Cli, ConfigFileWithFlagPrecedence) {
  auto dir = scratch("config");
  std::ofstream(dir / "c.json") << R"({"subcommand": "cube", "alpha": "3/2", "h": "1/16", "domain": "square"})";
  ASSERT_EQ(run("--config " + (dir / "c.json").string() + " --dry-run", dir), 0);
  EXPECT_EQ(json::parse(slurp(dir / "stdout.txt"))["parameters"]["alpha"], "3/2");
  ASSERT_EQ(run("--config " + (dir / "c.json").string() + " --dry-run cube --alpha 1", dir), 0);
  EXPECT_EQ(json::parse(slurp(dir / "stdout.txt"))["parameters"]["alpha"], "1");
}

TEST(Cli, InvalidConfigurationsExitTwo) {
  auto dir = scratch("bad");
  EXPECT_EQ(run("maximal --alpha -1", dir), 2);
  EXPECT_EQ(run("average --t 1", dir), 2);
  EXPECT_EQ(run("verify --check nope", dir), 2);
  EXPECT_EQ(run("maximal --domain missing.json", dir), 2);
  EXPECT_EQ(run("maximal --u csv:missing.csv", dir), 2);
  EXPECT_EQ(run("--bogus", dir), 2);
  EXPECT_EQ(run("example --name punctured --K 3 --h 1/256", dir), 2);
  EXPECT_FALSE(fs::exists(dir / "maximal.csv"));
}

TEST(Cli, FieldFileRoundTrip) {
  auto dir = scratch("csv");
  ASSERT_EQ(run("example --name cube_aniso --profile affine:1,1 --h 1/16", dir), 0);
  ASSERT_TRUE(fs::exists(dir / "example_u.csv"));
  auto meta = json::parse(slurp(dir / "example.json"));
  const std::string domain = meta["grid"]["geometry"].dump();
  std::ofstream(dir / "dom.json") << domain;
  ASSERT_EQ(run("cube --domain " + (dir / "dom.json").string() + " --h 1/16 --alpha 3/2 --u csv:" +
                    (dir / "example_u.csv").string(),
                dir),
            0);
  EXPECT_TRUE(fs::exists(dir / "cube.csv"));
}

TEST(Cli, WhitneyExplicitBackend) {
  auto dir = scratch("whitney");
  std::ofstream(dir / "d.csv") << "0,1,2,3\n1,0,1,2\n2,1,0,1\n3,2,1,0\n";
  std::ofstream(dir / "w.csv") << "weight,omega\n1,0\n1,1\n1,1\n1,0\n";
  ASSERT_EQ(run("whitney --t 1/2 --distances " + (dir / "d.csv").string() + " --weights " + (dir / "w.csv").string() +
                    " --Q 1",
                dir),
            0);
  auto j = json::parse(slurp(dir / "whitney.json"));
  EXPECT_EQ(j["space"]["points"], 2);
  EXPECT_EQ(j["cover"]["coverage"], 1.0);
}

TEST(Cli, SuiteSubsetWritesReports) {
  auto dir = scratch("suite");
  ASSERT_EQ(run("suite --only 8", dir), 0);
  EXPECT_NE(slurp(dir / "stdout.txt").find("PASS criterion 8"), std::string::npos);
  auto j = json::parse(slurp(dir / "suite.json"));
  EXPECT_EQ(j["criteria"].size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "suite.csv"));
}
