#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rvrw/case_studies.hpp"
#include "rvrw/stability.hpp"
#include "rvrw/testing/oracles.hpp"

using namespace rvrw;
namespace ot = rvrw::testing;

namespace {

double nearest(const std::vector<FixedPointComponent>& comps, const StatePoint& x) {
  double d = INFINITY;
  for (const auto& c : comps) d = std::min(d, distance_to_component(c, x));
  return d;
}

}  // namespace

TEST(Complete, OverlapShapeHandValues) {
  auto s = overlap_shape(1, 1, 1, 0.1);
  ASSERT_TRUE(s);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(s->delta[i], 1.0 / 12.0, 1e-15);
    EXPECT_NEAR(s->delta_bar[i], 11.0 / 12.0, 1e-15);
  }
  EXPECT_FALSE(overlap_shape(1, 1, 1, 0.6));
}

TEST(Complete, K9SharedVertexMass) {
  auto s = overlap_shape(1, 4, 4, 0.2);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->delta[0], 1.0 / 25.0, 1e-15);
  EXPECT_NEAR(s->delta_bar[0], 6.0 / 25.0, 1e-15);
  auto m = preset_complete(9, 0.2, 2.0, 1.0);
  auto c = solve_support(m, SupportProfile{{{1, 2, 3, 4, 5}, {1, 6, 7, 8, 9}}});
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->point[0], 1.0 / 25.0, 1e-14);
  EXPECT_NEAR(c->point[1], 6.0 / 25.0, 1e-14);
  EXPECT_NEAR(c->point[9], 1.0 / 25.0, 1e-14);
  auto pred = complete_limits(9, 0.2, 2.0, 1.0);
  double d = INFINITY;
  for (const auto& p : pred.points) d = std::min(d, distance_inf(p.point, c->point));
  EXPECT_LT(d, 1e-14);
}

TEST(Complete, ZeroEpsilonHasZeroOverlap) {
  for (int k : {2, 3, 6}) {
    auto p = complete_limits(k, 0.0, 1.5, 1.0);
    ASSERT_TRUE(p.overlap_limit);
    EXPECT_EQ(*p.overlap_limit, 0.0);
    EXPECT_TRUE(p.points.empty());
  }
}

TEST(Complete, PredictionAgreesWithFixedPointSet) {
  for (auto [k, eps] : {std::pair{3, 0.05}, std::pair{4, 0.02}}) {
    auto m = preset_complete(k, eps, 1.0 + eps + 0.1, 1.0);
    auto pred = complete_limits(k, eps, 1.0 + eps + 0.1, 1.0);
    auto comps = fixed_point_set(m);
    auto reps = classify(m, comps);
    for (const auto& p : pred.points) {
      EXPECT_TRUE(verify_fixed_point(m, p.point, 1e-10));
      EXPECT_LT(nearest(comps, p.point), 1e-9);
    }
    for (const auto& r : reps) {
      if (is_excluded(r.classification)) continue;
      double d = INFINITY;
      for (const auto& p : pred.points) d = std::min(d, distance_inf(p.point, r.point));
      EXPECT_LT(d, 1e-9) << "unpredicted candidate";
    }
  }
}

TEST(Star, SharedCentrePoints) {
  auto p = star_limits(3, 0.25, 5.0, 1.0);
  EXPECT_EQ(p.points.size(), 6u);
  auto it = std::find_if(p.points.begin(), p.points.end(), [](const auto& q) { return q.label == "S2 K={1,2}"; });
  ASSERT_NE(it, p.points.end());
  EXPECT_NEAR(it->point[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(it->point[2], 1.0 / 6.0, 1e-15);
  EXPECT_EQ(it->point[4], 0.0);
  for (const auto& q : p.points) {
    double centre = q.point[0] + q.point[2] + q.point[4];
    EXPECT_LT(centre, 1.0);
  }
}

TEST(Star, FullCentreAndBoundaries) {
  auto p = star_limits(3, 0.75, 5.0, 1.0);
  ASSERT_EQ(p.points.size(), 1u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p.points[0].point[2 * i], 3.0 / 14.0, 1e-15);
  EXPECT_THROW(star_limits(3, 0.5, 5.0, 1.0), RegimeBoundary);
  auto s1 = star_limits(2, 0.0, 2.0, 1.0);
  EXPECT_TRUE(s1.points.empty());
  EXPECT_EQ(*s1.overlap_limit, 0.0);
}

TEST(StarPreferences, Regimes) {
  auto lo = star_pref_limits(0.5, 1.0);
  ASSERT_EQ(lo.points.size(), 2u);
  EXPECT_EQ(lo.points[0].point, (StatePoint{1, 0, 0, 1}));
  EXPECT_EQ(lo.points[1].point, (StatePoint{0, 1, 1, 0}));
  auto hi = star_pref_limits(1.5, 1.0);
  ASSERT_EQ(hi.points.size(), 1u);
  EXPECT_EQ(hi.points[0].point, (StatePoint{1, 0, 1, 0}));
  EXPECT_THROW(star_pref_limits(1.0, 1.0), RegimeBoundary);
}

TEST(Predictions, EveryListedPointIsFixed) {
  std::vector<std::pair<Model, PredictedLimitSet>> cases;
  cases.emplace_back(preset_complete(4, 0.05, 1.2, 1.0), complete_limits(4, 0.05, 1.2, 1.0));
  cases.emplace_back(preset_star(3, 0.25, 5.0, 1.0), star_limits(3, 0.25, 5.0, 1.0));
  cases.emplace_back(preset_star(4, 0.75, 5.0, 2.0), star_limits(4, 0.75, 5.0, 2.0));
  cases.emplace_back(preset_star_preferences(0.5, 1.0), star_pref_limits(0.5, 1.0));
  cases.emplace_back(preset_star_preferences(1.5, 1.0), star_pref_limits(1.5, 1.0));
  for (const auto& [m, pred] : cases) {
    EXPECT_FALSE(pred.points.empty());
    for (const auto& p : pred.points) EXPECT_TRUE(verify_fixed_point(m, p.point, 1e-10)) << p.label;
  }
}

TEST(Cycle, WordClassification) {
  EXPECT_EQ(classify_cycle_point(EdgeWord{{0.5, 0.5, 0.5, 0.5}}).cls, CycleClass::C1);
  EXPECT_EQ(classify_cycle_point(EdgeWord{{0.5, 0.5, 0.5, 0.5}}).admissibility, Admissibility::tilde_admissible);
  EXPECT_EQ(classify_cycle_point(EdgeWord{{0.5, 0.5, 0.5}}).admissibility, Admissibility::excluded_pattern);
  auto c3 = classify_cycle_point(EdgeWord{{1, 0, 1}});
  EXPECT_EQ(c3.cls, CycleClass::C3);
  EXPECT_EQ(c3.admissibility, Admissibility::excluded_pattern);
  EXPECT_EQ(classify_cycle_point(EdgeWord{{0.3, 0.6, 0.7, 0.4}}).cls, CycleClass::C2);

  auto m = preset_cycle(5, 0.0, 3.0, 1.0);
  EdgeWord w{{1, 1, 0, 0, 0.3}};
  auto c4 = classify_cycle_point(w);
  EXPECT_EQ(c4.cls, CycleClass::C4);
  EXPECT_EQ(c4.admissibility, Admissibility::tilde_admissible);
  auto p = cycle_point(m.graph, w);
  EXPECT_TRUE(verify_fixed_point(m, p, 1e-12));
  EXPECT_EQ(edge_word(m.graph, p).a, w.a);
}

TEST(Cycle, ClassificationIsRotationInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, 3);
  const double vals[] = {0.0, 1.0, 0.5, 0.3};
  for (int t = 0; t < 500; ++t) {
    EdgeWord w;
    int m = 3 + t % 6;
    for (int k = 0; k < m; ++k) w.a.push_back(vals[pick(rng)]);
    auto ref = classify_cycle_point(w);
    for (int r = 1; r < m; ++r) {
      auto c = classify_cycle_point(w.rotated(r));
      EXPECT_EQ(c.cls, ref.cls);
      EXPECT_EQ(c.admissibility, ref.admissibility);
    }
  }
}

TEST(Cycle, DegeneracyRoots) {
  EXPECT_EQ(cycle_epsilon_degeneracy(4, {2, 2, 2, 2}), (std::vector<double>{1.0}));
  auto r2 = cycle_epsilon_degeneracy(4, {1, 2, 2, 1});  // one run of two
  ASSERT_EQ(r2.size(), 1u);
  EXPECT_NEAR(r2[0], 0.5, 1e-15);
  auto r16 = cycle_epsilon_degeneracy(16, std::vector<int>(16, 2));
  std::vector<double> want{std::cos(3 * std::numbers::pi / 8), 1 / std::sqrt(2.0), std::cos(std::numbers::pi / 8), 1.0};
  ASSERT_EQ(r16.size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_NEAR(r16[k], want[k], 1e-14);
}

TEST(Cycle, DegeneracyMatchesGenericityCheck) {
  auto full_degenerate = [](int m, double eps) {
    auto r = genericity_check(preset_cycle(m, eps, 3.0, 1.0));
    return std::any_of(r.degenerate.begin(), r.degenerate.end(), [](const DegenerateSupport& d) {
      return std::all_of(d.support.sets.begin(), d.support.sets.end(), [](const auto& s) { return s.size() == 2; });
    });
  };
  EXPECT_TRUE(full_degenerate(4, 1.0));
  EXPECT_FALSE(full_degenerate(4, 0.7));
  EXPECT_TRUE(full_degenerate(6, 0.5));
  EXPECT_FALSE(full_degenerate(6, 0.45));
}

TEST(Matching, EmpiricalLimitAndPredictions) {
  auto m = preset_star(2, 0.0, 2.0, 1.0);
  auto comps = fixed_point_set(m);
  auto e = empirical_limit(m.graph, {0.3, 0.7, 0.0, 1.0}, comps);
  EXPECT_LT(e.distance, 1e-12);  // on an S1 segment
  EXPECT_EQ(comps[e.component].kind, ComponentKind::continuum);

  auto pred = star_limits(2, 0.0, 2.0, 1.0);
  EXPECT_TRUE(match_prediction(pred, m.graph, {0.3, 0.7, 0.01, 0.99}, 0.05).matched);
  EXPECT_FALSE(match_prediction(pred, m.graph, {0.3, 0.7, 0.3, 0.7}, 0.05).matched);

  auto sp = star_pref_limits(0.5, 1.0);
  auto r = match_prediction(sp, m.graph, {0.98, 0.02, 0.01, 0.99}, 0.05);
  EXPECT_TRUE(r.matched);
  EXPECT_EQ(r.nearest, "walk 1 centre");

  auto k = complete_limits(3, 0.0, 1.5, 1.0);
  auto g3 = preset_complete(3, 0.0, 1.5, 1.0).graph;
  EXPECT_TRUE(match_prediction(k, g3, {0.6, 0.4, 0.0, 0.0, 0.01, 0.99}, 0.05).matched);
  EXPECT_FALSE(match_prediction(k, g3, {0.6, 0.4, 0.0, 0.2, 0.0, 0.8}, 0.05).matched);
}

TEST(Matching, NearestPointOnContinuum) {
  auto m = preset_star(2, 0.0, 2.0, 1.0);
  for (const auto& c : fixed_point_set(m)) {
    if (c.kind != ComponentKind::continuum) continue;
    auto q = nearest_point(c, {0.4, 0.6, 0.4, 0.6});
    EXPECT_TRUE(verify_fixed_point(m, q, 1e-12));
  }
}
