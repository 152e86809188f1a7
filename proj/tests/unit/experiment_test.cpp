#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rvrw/experiment.hpp"

using namespace rvrw;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("rvrw_exp_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentSpec spec(const fs::path& out) {
  ExperimentSpec s;
  s.config = json::parse(R"({"preset":{"family":"complete","kappa":3,"epsilon":0,"eta":1.5,"alpha":2}})");
  s.n_steps = 2000;
  s.runs = ExperimentSpec::replicas(7, 2);
  s.out = out;
  return s;
}

}  // namespace

TEST(Experiment, WritesTrajectoriesAndManifest) {
  auto out = scratch("basic");
  auto man = run_experiment(spec(out));
  ASSERT_EQ(man.runs.size(), 2u);
  for (const auto& r : man.runs) {
    EXPECT_TRUE(fs::exists(out / r.csv));
    auto side = json::parse(slurp(out / r.sidecar));
    EXPECT_EQ(side["seed"], 7);
    EXPECT_EQ(side["params_hash"], man.config_hash);
    EXPECT_EQ(side["n_steps"], 2000);
  }
  EXPECT_NE(slurp(out / man.runs[0].csv), slurp(out / man.runs[1].csv));
  auto manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["config_hash"], sha256_hex(slurp(out / "config.json")));
  EXPECT_EQ(manifest["runs"].size(), 2u);
  fs::remove_all(out);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
  auto a = scratch("det_a"), b = scratch("det_b");
  auto s = spec(a);
  s.runs = ExperimentSpec::seed_range(1, 4);
  ::setenv("RVRW_THREADS", "1", 1);
  run_experiment(s);
  ::setenv("RVRW_THREADS", "3", 1);
  s.out = b;
  run_experiment(s);
  ::unsetenv("RVRW_THREADS");
  for (int seed = 1; seed <= 4; ++seed) {
    auto name = trajectory_basename({std::uint64_t(seed), 0}) + ".csv";
    EXPECT_EQ(slurp(a / name), slurp(b / name));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, ToggledReports) {
  auto out = scratch("toggles");
  auto s = spec(out);
  s.fixed_points = s.stability = s.lyapunov = s.match = true;
  auto man = run_experiment(s);
  for (const char* f : {"fixed_points.json", "stability.json", "match.csv"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_TRUE(fs::exists(out / ("lyapunov_" + trajectory_basename({7, 1}) + ".csv")));
  EXPECT_EQ(man.reports.size(), 5u);
  std::istringstream match(slurp(out / "match.csv"));
  std::string line;
  std::getline(match, line);
  EXPECT_EQ(line, "seed,replica,matched,distance,nearest,overlap,detail");
  int rows = 0;
  while (std::getline(match, line)) ++rows;
  EXPECT_EQ(rows, 2);
  fs::remove_all(out);
}

TEST(Experiment, RejectsEmptyRunList) {
  auto s = spec(scratch("empty"));
  s.runs.clear();
  EXPECT_THROW(run_experiment(s), InvalidParameter);
  EXPECT_THROW(ExperimentSpec::replicas(1, 0), InvalidParameter);
}
