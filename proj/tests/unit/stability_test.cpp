#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <random>

#include "rvrw/case_studies.hpp"
#include "rvrw/stability.hpp"
#include "rvrw/testing/oracles.hpp"

using namespace rvrw;
namespace ot = rvrw::testing;

namespace {

using Spectrum = std::vector<std::complex<double>>;

Spectrum eigen_oracle(const Matrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> es(e, false);
  Spectrum out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

// Greedy multiset match; returns the largest distance between paired eigenvalues.
double spectrum_distance(Spectrum a, Spectrum b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (auto x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](auto p, auto q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

bool contains(const Spectrum& s, double v, double tol) {
  return std::any_of(s.begin(), s.end(), [&](auto l) { return std::abs(l - std::complex<double>(v, 0.0)) < tol; });
}

std::vector<Model> families() {
  return {preset_complete(2, 0.0, 2.0, 1.0), preset_complete(3, 0.1, 1.5, 2.0), preset_complete(5, 0.0, 1.2, 1.0),
          preset_star(3, 0.2, 2.5, 1.0),     preset_star(6, 0.0, 5.5, 0.5),    preset_cycle(4, 0.0, 1.5, 3.0),
          preset_cycle(6, 0.3, 2.0, 1.0)};
}

}  // namespace

TEST(Jacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (const auto& m : families()) {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      auto x = ot::random_interior(m.graph, rng, 0.01);
      worst = std::max(worst, (jacobian(m, x) - jacobian_fd(m, x)).norm_inf());
    }
    EXPECT_LE(worst, 1e-6);
  }
}

TEST(Jacobian, DecoupledActsAsIdentityOnTangentSpace) {
  SystemSpec s;
  s.walks = {{1, 2, 3}, {2, 3}};
  s.eta_default = 2.0;
  auto m = build_system(s);
  StatePoint x{0.2, 0.3, 0.5, 0.6, 0.4};
  auto j = jacobian(m, x);
  std::vector<double> v{0.1, -0.4, 0.3, 0.25, -0.25};
  auto jv = j * v;
  for (std::size_t c = 0; c < v.size(); ++c) EXPECT_NEAR(jv[c], v[c], 1e-14);
  auto ev = spectrum(j);
  int ones = 0, zeros = 0;
  for (auto l : ev) ones += std::abs(l - 1.0) < 1e-12, zeros += std::abs(l) < 1e-12;
  EXPECT_EQ(ones, 3);
  EXPECT_EQ(zeros, 2);
}

TEST(Spectrum, AgreesWithEigenOnRandomMatrices) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 200; ++t) {
    std::size_t n = 1 + t % 24;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = n01(rng);
    double scale = std::max(1.0, a.norm_inf());
    EXPECT_LE(spectrum_distance(spectrum(a), eigen_oracle(a)), 1e-8 * scale) << "n=" << n;
  }
}

TEST(Spectrum, AgreesWithEigenOnJacobians) {
  std::mt19937_64 rng(21);
  for (const auto& m : families())
    for (int t = 0; t < 20; ++t) {
      auto j = jacobian(m, ot::random_interior(m.graph, rng, 0.01));
      auto ours = spectrum(j);
      EXPECT_LE(spectrum_distance(ours, eigen_oracle(j)), 1e-8 * std::max(1.0, j.norm_inf()));
      for (auto l : ours) EXPECT_LE(eigen_residual(j, l), 1e-8);
    }
}

TEST(Spectrum, Identity) {
  for (auto l : spectrum(Matrix::identity(7))) EXPECT_EQ(l, std::complex<double>(1.0, 0.0));
}

TEST(Spectrum, CompleteGraphUniformPoint) {
  auto m = preset_complete(3, 0.0, 2.0, 1.0);
  EXPECT_TRUE(contains(spectrum(jacobian(m, StatePoint(6, 1.0 / 3.0))), 1.2, 1e-12));
  auto k2 = preset_complete(2, 0.0, 2.0, 1.0);
  auto v = interior_instability_test(k2, {0.5, 0.5, 0.5, 0.5});
  EXPECT_EQ(v.verdict, Verdict::excluded);
  EXPECT_NEAR(v.max_real, 4.0 / 3.0, 1e-12);
}

TEST(Spectrum, CompleteGraphUniformPointGeneralEta) {
  for (int k : {2, 3, 5})
    for (double eta : {1.5, 2.0, 3.7})
      for (double alpha : {0.5, 1.0, 2.0}) {
        auto m = preset_complete(k, 0.0, eta, alpha);
        EXPECT_TRUE(contains(spectrum(jacobian(m, StatePoint(2 * k, 1.0 / k))), alpha / (k * eta - 1) + 1, 1e-12))
            << "kappa=" << k << " eta=" << eta << " alpha=" << alpha;
      }
}

TEST(Spectrum, StarFullCentreEigenvalue) {
  const int m_ = 3;
  for (double eps : {0.2, 0.4, 0.75}) {
    auto m = preset_star(m_, eps, m_, 1.0);
    double c = eps / (m_ + 2 * eps - 1);
    StatePoint p;
    for (int i = 0; i < m_; ++i) p.push_back(c), p.push_back(1 - c);
    ASSERT_TRUE(verify_fixed_point(m, p, 1e-12));
    double lam = eps * (m_ - 1 + eps) * (2 * eps - 1) / ((m_ - 1 + 2 * eps) * (-m_ * (m_ - 1) - (m_ + 1) * eps + eps * eps)) + 1;
    EXPECT_TRUE(contains(spectrum(jacobian(m, p)), lam, 1e-12)) << "eps=" << eps;
    if (eps < 0.5) {
      EXPECT_EQ(classify_point(m, p).classification, Classification::excluded_interior);
    }
  }
}

TEST(Spectrum, StarPreferencesInteriorPoint) {
  const double eta = 0.5, eta_tilde = 1.0;
  auto m = preset_star_preferences(eta, eta_tilde);
  StatePoint p{eta, 1 - eta, eta, 1 - eta};
  ASSERT_TRUE(verify_fixed_point(m, p, 1e-12));
  EXPECT_TRUE(contains(spectrum(jacobian(m, p)), (eta - eta * eta) / eta_tilde + 1, 1e-12));
  EXPECT_EQ(classify_point(m, p).classification, Classification::excluded_interior);
}

TEST(Interior, RejectsBoundaryPoints) {
  auto m = preset_complete(2, 0.0, 2.0, 1.0);
  EXPECT_THROW(interior_instability_test(m, {1, 0, 0, 1}), NotInterior);
}

TEST(Boundary, K2Ratios) {
  auto m = preset_complete(2, 0.0, 2.0, 1.0);
  auto shared = boundary_ratio_test(m, {1, 0, 1, 0});
  ASSERT_EQ(shared.size(), 2u);
  for (const auto& b : shared) {
    EXPECT_DOUBLE_EQ(b.ratio, 2.0);
    EXPECT_EQ(b.verdict, Verdict::excluded);
  }
  auto apart = boundary_ratio_test(m, {1, 0, 0, 1});
  ASSERT_EQ(apart.size(), 2u);
  for (const auto& b : apart) {
    EXPECT_DOUBLE_EQ(b.ratio, 0.5);
    EXPECT_EQ(b.verdict, Verdict::candidate);
  }
}

TEST(Boundary, StarEmptyCentre) {
  for (double alpha : {1.0, 2.5}) {
    const double eps = 0.2, eta = 2.5;
    auto m = preset_star(3, eps, eta, alpha);
    auto rs = boundary_ratio_test(m, {0, 1, 0, 1, 0, 1});
    ASSERT_EQ(rs.size(), 3u);
    for (const auto& b : rs) {
      EXPECT_EQ(b.vertex, 1);
      EXPECT_NEAR(b.ratio, std::pow(eta / (eta - eps), alpha), 1e-14);
      EXPECT_EQ(b.verdict, Verdict::excluded);
    }
  }
}

// Richardson-extrapolated pi_k(x)/x_k along a ray into the interior.
TEST(Boundary, RatioIsTheNumericalLimit) {
  for (const auto& m : {preset_complete(3, 0.1, 1.5, 2.0), preset_star(3, 0.2, 2.5, 1.0), preset_cycle(5, 0.0, 1.5, 1.0)}) {
    auto target = uniform_state(m.graph);
    for (const auto& comp : fixed_point_set(m)) {
      if (comp.kind != ComponentKind::isolated) continue;
      for (const auto& b : boundary_ratio_test(m, comp.point)) {
        std::size_t c = m.graph.coord(b.walk, b.vertex);
        auto at = [&](double t) {
          StatePoint x(comp.point.size());
          for (std::size_t k = 0; k < x.size(); ++k) x[k] = (1 - t) * comp.point[k] + t * target[k];
          return transition_kernel(m, x)[c] / x[c];
        };
        double r4 = at(1e-4), r5 = at(1e-5);
        EXPECT_NEAR((10 * r5 - r4) / 9, b.ratio, 1e-4);
      }
    }
  }
}

TEST(Classify, K2Candidates) {
  auto m = preset_complete(2, 0.0, 2.0, 1.0);
  auto comps = fixed_point_set(m);
  auto reps = classify(m, comps);
  std::vector<StatePoint> cands;
  for (const auto& r : reps)
    if (!is_excluded(r.classification)) cands.push_back(r.point);
  std::sort(cands.begin(), cands.end());
  EXPECT_EQ(cands, (std::vector<StatePoint>{{0, 1, 1, 0}, {1, 0, 0, 1}}));
}

TEST(Classify, StarCandidatesAreTheSharedCentrePoints) {
  auto m = preset_star(3, 0.2, 2.5, 1.0);
  auto comps = fixed_point_set(m);
  auto reps = classify(m, comps);
  auto pred = star_limits(3, 0.2, 2.5, 1.0);
  std::size_t cands = 0;
  for (const auto& r : reps) {
    if (is_excluded(r.classification)) continue;
    ++cands;
    double d = INFINITY;
    for (const auto& p : pred.points) d = std::min(d, distance_inf(p.point, r.point));
    EXPECT_LT(d, 1e-12);
  }
  EXPECT_EQ(cands, pred.points.size());
}

TEST(Classify, CycleStabilityMatchesForbiddenPatterns) {
  for (int m_ : {3, 4, 5, 6}) {
    auto m = preset_cycle(m_, 0.0, 3.0, 1.0);
    auto comps = fixed_point_set(m);
    auto reps = classify(m, comps);
    for (std::size_t k = 0; k < comps.size(); ++k) {
      auto c = classify_cycle_point(m.graph, comps[k].point);
      EXPECT_NE(c.cls, CycleClass::none);
      EXPECT_EQ(c.admissibility == Admissibility::tilde_admissible, !is_excluded(reps[k].classification))
          << "m=" << m_ << " " << comps[k].support.to_string();
    }
    if (m_ == 3) {
      auto it = std::find_if(comps.begin(), comps.end(), [](const auto& c) {
        return std::all_of(c.point.begin(), c.point.end(), [](double v) { return std::abs(v - 0.5) < 1e-12; });
      });
      ASSERT_NE(it, comps.end());
      EXPECT_EQ(reps[it - comps.begin()].classification, Classification::excluded_interior);
    }
  }
}
