#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "rvrw/io.hpp"

using namespace rvrw;

TEST(Config, PresetForm) {
  auto c = load_config(json::parse(R"({"preset":{"family":"star","m":3,"epsilon":0.2,"eta":2.5,"alpha":2}})"));
  ASSERT_TRUE(c.preset);
  EXPECT_EQ(c.preset->family, Family::star);
  EXPECT_EQ(c.model.graph.num_walks(), 3);
  EXPECT_EQ(c.model.params.alpha, 2.0);
  auto pref = load_config(json::parse(R"({"preset":{"family":"star_pref","eta":0.5,"eta_tilde":1}})"));
  EXPECT_DOUBLE_EQ(pref.model.params.eta_at(pref.model.graph, 0, 1), 1.5);
}

TEST(Config, OverridesDropThePrediction) {
  auto c = load_config(json::parse(
      R"({"preset":{"family":"complete","kappa":3,"eta":2,"eta_overrides":[{"walk":2,"vertex":3,"value":2.5}]}})"));
  EXPECT_FALSE(c.preset);
  EXPECT_EQ(c.model.params.eta_at(c.model.graph, 1, 3), 2.5);
}

TEST(Config, RawForm) {
  auto c = load_config(json::parse(R"({
    "walks": [{"vertices": [1, 2, 3]}, {"vertices": [2, 3, 4]}],
    "alpha": 1.5,
    "eta": {"default": 2, "overrides": [{"walk": 1, "vertex": 1, "value": 2.5}]},
    "rho": {"pairwise": -1, "self": -0.1, "overrides": [{"vertex": 3, "walk_i": 1, "walk_j": 2, "value": -0.5}]}})"));
  const auto& m = c.model;
  EXPECT_FALSE(c.preset);
  EXPECT_EQ(m.dimension(), 6u);
  EXPECT_EQ(m.params.eta_at(m.graph, 0, 1), 2.5);
  EXPECT_EQ(m.params.rho_at(m.graph, 3, 0, 1), -0.5);
  EXPECT_EQ(m.params.rho_at(m.graph, 3, 1, 0), -0.5);  // symmetric by default
  EXPECT_EQ(m.params.rho_at(m.graph, 2, 0, 1), -1.0);
  EXPECT_EQ(m.params.rho_at(m.graph, 2, 1, 1), -0.1);
}

TEST(Config, Errors) {
  EXPECT_THROW(load_config(json::parse(R"({"alpha": 1})")), ConfigError);
  EXPECT_THROW(load_config(json::parse(R"({"preset":{"family":"wheel","m":3,"eta":2}})")), ConfigError);
  EXPECT_THROW(load_config(json::parse(R"({"preset":{"family":"complete","kappa":3,"eta":1}})")), DominanceViolation);
  EXPECT_THROW(load_config(json::parse(R"({"walks":[{"vertices":[1,2]}],"rho":{"overrides":[
      {"vertex":1,"walk_i":1,"walk_j":1,"value":"x"}]}})")),
               ConfigError);
  EXPECT_THROW(read_json_file("/nonexistent/config.json"), IoError);
  auto bad = std::filesystem::temp_directory_path() / "rvrw_io_bad.json";
  std::ofstream(bad) << "{not json";
  EXPECT_THROW(read_json_file(bad.string()), ConfigError);
  std::filesystem::remove(bad);
}

TEST(Hash, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(TrajectoryCsv, RoundTripsFifteenDigits) {
  auto m = preset_cycle(5, 0.1, 2.0, 1.0);
  auto t = simulate(m, 3000, 8, Schedule::geometric(1.7, 3000));
  std::stringstream ss;
  write_trajectory_csv(ss, m.graph, t);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "n,walk,vertex,occupation,overlap");
  ss.seekg(0);
  auto back = read_trajectory_csv(ss, m.graph);
  ASSERT_EQ(back.size(), t.records.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(back[k].n, t.records[k].n);
    // 15 significant digits: half a unit in the last place is a relative 5e-15
    EXPECT_NEAR(back[k].overlap, t.records[k].overlap, 5e-15 * t.records[k].overlap);
    for (std::size_t c = 0; c < back[k].x.size(); ++c)
      EXPECT_NEAR(back[k].x[c], t.records[k].x[c], 5e-15 * t.records[k].x[c]);
  }
}

TEST(TrajectoryCsv, RejectsForeignRows) {
  auto m = preset_complete(2, 0.0, 2.0, 1.0);
  std::stringstream ss("n,walk,vertex,occupation,overlap\n0,3,1,0.5,0.5\n");
  EXPECT_THROW(read_trajectory_csv(ss, m.graph), IoError);
  std::stringstream nohead("0,1,1,0.5,0.5\n");
  EXPECT_THROW(read_trajectory_csv(nohead, m.graph), IoError);
}

TEST(Reports, Json) {
  auto m = preset_complete(2, 0.0, 2.0, 1.0);
  auto comps = fixed_point_set(m);
  auto j = to_json(comps.back());
  EXPECT_EQ(j["kind"], "isolated");
  EXPECT_EQ(j["point"].size(), 4u);
  auto r = to_json(classify(m, comps).back());
  EXPECT_EQ(r["classification"], "excluded_interior");
  auto p = to_json(predict(PresetInfo{Family::star, 3, 0.75, 5.0, 1.0, 0.0}));
  EXPECT_EQ(p["points"].size(), 1u);
  EXPECT_EQ(p["family"], "star");
}
