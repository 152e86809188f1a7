#pragma once

#include <cmath>
#include <vector>

#include "dynamics.hpp"
#include "linalg.hpp"

namespace rvrw {

inline double lyapunov_value(const Model& m, const StatePoint& x) {
  double l = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    l -= m.params.eta[c] * x[c];
    for (const auto& cp : m.couplings[c]) l -= 0.5 * cp.rho * x[c] * x[cp.coord];
  }
  return l;
}

/// dL/dx_v^i = -(eta_v^i + sum_j rho_v^{ij} x_v^j).
inline std::vector<double> lyapunov_gradient(const Model& m, const StatePoint& x) {
  std::vector<double> g(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) g[c] = -m.base(x.data(), c);
  return g;
}

struct LyapunovEvaluation {
  double value = 0.0;
  std::vector<double> gradient;
  double inner_product = 0.0;  // <grad L, F>
  double entropy_form = 0.0;   // sum_i g^i <phi(x~/pi~), x~ Gamma~>
  std::vector<double> normalizers;
  std::vector<double> weights;  // g^i = (N^i)^{1/alpha}
};

/// Both sides of the descent identity, the right side assembled from the reduced rate
/// matrices Gamma~ = -I + Pi~ over each walk's support.
inline LyapunovEvaluation descent_value(const Model& m, const StatePoint& x) {
  const auto& g = m.graph;
  const double alpha = m.params.alpha;
  LyapunovEvaluation e;
  e.value = lyapunov_value(m, x);
  e.gradient = lyapunov_gradient(m, x);
  auto f = vector_field(m, x);
  for (std::size_t c = 0; c < x.size(); ++c) e.inner_product += e.gradient[c] * f[c];

  auto p = transition_kernel(m, x);
  e.normalizers = normalizers(m, x);
  for (int i = 0; i < g.num_walks(); ++i) {
    double gi = std::pow(e.normalizers[i], 1.0 / alpha);
    e.weights.push_back(gi);
    std::vector<std::size_t> sup;
    for (int k = 0; k < g.degree(i); ++k)
      if (x[g.offset(i) + k] > 0.0) sup.push_back(g.offset(i) + k);
    const std::size_t s = sup.size();
    Matrix gamma(s, s);
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = 0; b < s; ++b) gamma(a, b) = (a == b ? -1.0 : 0.0) + p[sup[b]];
    double inner = 0.0;
    for (std::size_t b = 0; b < s; ++b) {
      double xg = 0.0;
      for (std::size_t a = 0; a < s; ++a) xg += x[sup[a]] * gamma(a, b);
      double phi = -std::pow(x[sup[b]] / p[sup[b]], -1.0 / alpha);
      inner += phi * xg;
    }
    e.entropy_form += gi * inner;
  }
  return e;
}

struct MonotonicityReport {
  std::vector<double> values;
  std::size_t violations = 0;         // increases above the tolerance
  double max_increase = 0.0;
  std::size_t strict_failures = 0;    // no decrease although ||F||_inf > 1e-6
  bool monotone() const { return violations == 0; }
};

inline MonotonicityReport monotonicity_monitor(const Model& m, const std::vector<FlowSample>& path,
                                               double tol = 1e-9) {
  MonotonicityReport r;
  for (const auto& s : path) r.values.push_back(lyapunov_value(m, s.x));
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    double inc = r.values[k + 1] - r.values[k];
    r.max_increase = std::max(r.max_increase, inc);
    if (inc > tol) ++r.violations;
    if (inc >= 0.0 && norm_inf(vector_field(m, path[k].x)) > 1e-6) ++r.strict_failures;
  }
  return r;
}

}  // namespace rvrw
