#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "fixed_points.hpp"
#include "linalg.hpp"

namespace rvrw {

/// Analytic D pi(x) in ambient coordinates (quotient rule on x_v H_v / N).
inline Matrix jacobian(const Model& m, const StatePoint& x) {
  const auto& g = m.graph;
  const std::size_t d = g.dimension();
  const double alpha = m.params.alpha;
  // G(r, c) = d(x_r H_r) / dx_c
  Matrix G(d, d);
  std::vector<double> gr(d);
  for (std::size_t r = 0; r < d; ++r) {
    double b = m.base(x.data(), r);
    double h = weight_from_base(b, alpha);
    gr[r] = x[r] * h;
    G(r, r) += h;
    double dh = alpha == 1.0 ? 1.0 : alpha * std::pow(b, alpha - 1.0);
    for (const auto& cp : m.couplings[r]) G(r, cp.coord) += x[r] * cp.rho * dh;
  }
  Matrix J(d, d);
  for (int i = 0; i < g.num_walks(); ++i) {
    std::size_t o = g.offset(i), n_i = g.degree(i);
    double N = 0.0;
    for (std::size_t r = o; r < o + n_i; ++r) N += gr[r];
    if (!(N > 0.0)) throw DomainError("kernel normalizer is not positive");
    for (std::size_t c = 0; c < d; ++c) {
      double sc = 0.0;
      for (std::size_t r = o; r < o + n_i; ++r) sc += G(r, c);
      for (std::size_t r = o; r < o + n_i; ++r) J(r, c) = (G(r, c) - gr[r] / N * sc) / N;
    }
  }
  return J;
}

/// Central differences of the kernel, coordinate by coordinate.
inline Matrix jacobian_fd(const Model& m, const StatePoint& x, double h = 1e-5) {
  const std::size_t d = x.size();
  Matrix J(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    StatePoint xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    auto pp = transition_kernel(m, xp);
    auto pm = transition_kernel(m, xm);
    for (std::size_t r = 0; r < d; ++r) J(r, c) = (pp[r] - pm[r]) / (2.0 * h);
  }
  return J;
}

inline std::vector<std::complex<double>> spectrum(const Matrix& a) { return eigenvalues(a); }

enum class Verdict { excluded, candidate, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::excluded: return "excluded";
    case Verdict::candidate: return "candidate";
    default: return "inconclusive";
  }
}

constexpr double kInteriorMargin = 1e-7;
constexpr double kBoundaryMargin = 1e-9;

struct InteriorVerdict {
  Verdict verdict;
  std::vector<std::complex<double>> eigenvalues;
  double max_real;
};

inline Verdict eigen_verdict(const std::vector<std::complex<double>>& ev) {
  bool near_one = false, above = false;
  for (auto l : ev) {
    if (std::abs(l.real() - 1.0) <= kInteriorMargin) near_one = true;
    else if (l.real() > 1.0 + kInteriorMargin) above = true;
  }
  if (near_one) return Verdict::inconclusive;
  return above ? Verdict::excluded : Verdict::candidate;
}

/// Linear instability test for a fixed point with every coordinate positive.
inline InteriorVerdict interior_instability_test(const Model& m, const StatePoint& p, double tol_pos = 1e-9) {
  for (double v : p)
    if (!(v > tol_pos)) throw NotInterior("point has a coordinate on the boundary");
  if (!verify_fixed_point(m, p, 1e-10)) throw DomainError("point is not a fixed point of the kernel");
  InteriorVerdict r;
  r.eigenvalues = spectrum(jacobian(m, p));
  r.max_real = r.eigenvalues.empty() ? 0.0 : r.eigenvalues.front().real();
  r.verdict = eigen_verdict(r.eigenvalues);
  return r;
}

struct BoundaryRatio {
  int walk;  // 0-based
  VertexId vertex;
  double ratio;
  Verdict verdict;
};

/// For each empty coordinate, the limit of pi_k^i(x) / x_k^i as x approaches p.
inline std::vector<BoundaryRatio> boundary_ratio_test(const Model& m, const StatePoint& p, double tol_pos = 1e-9) {
  const auto& g = m.graph;
  auto N = normalizers(m, p);
  std::vector<BoundaryRatio> out;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p[c] > tol_pos) continue;
    int i = g.walk_of(c);
    double h = weight_from_base(m.base(p.data(), c), m.params.alpha);
    double ratio = h / N[i];
    Verdict v = ratio > 1.0 + kBoundaryMargin            ? Verdict::excluded
                : std::abs(ratio - 1.0) <= kBoundaryMargin ? Verdict::inconclusive
                                                           : Verdict::candidate;
    out.push_back({i, g.vertex_of(c), ratio, v});
  }
  return out;
}

enum class Classification { excluded_boundary, excluded_interior, candidate, inconclusive };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::excluded_boundary: return "excluded_boundary";
    case Classification::excluded_interior: return "excluded_interior";
    case Classification::candidate: return "candidate";
    default: return "inconclusive";
  }
}

inline bool is_excluded(Classification c) {
  return c == Classification::excluded_boundary || c == Classification::excluded_interior;
}

struct StabilityReport {
  std::size_t component = 0;
  StatePoint point;
  bool continuum = false;  // verdict is informational only
  std::vector<std::complex<double>> eigenvalues;
  std::size_t neutral_eigenvalues = 0;  // |Re(lambda) - 1| within the interior margin
  std::optional<InteriorVerdict> interior;
  std::vector<BoundaryRatio> boundary;
  Classification classification = Classification::candidate;
};

inline StabilityReport classify_point(const Model& m, const StatePoint& p, double tol_pos = 1e-9) {
  StabilityReport r;
  r.point = p;
  r.eigenvalues = spectrum(jacobian(m, p));
  for (auto l : r.eigenvalues)
    if (std::abs(l.real() - 1.0) <= kInteriorMargin) ++r.neutral_eigenvalues;
  bool interior = true;
  for (double v : p)
    if (!(v > tol_pos)) interior = false;
  if (interior) {
    InteriorVerdict iv{eigen_verdict(r.eigenvalues), r.eigenvalues, r.eigenvalues.front().real()};
    r.interior = iv;
    r.classification = iv.verdict == Verdict::excluded       ? Classification::excluded_interior
                       : iv.verdict == Verdict::inconclusive ? Classification::inconclusive
                                                             : Classification::candidate;
    return r;
  }
  r.boundary = boundary_ratio_test(m, p, tol_pos);
  bool excl = false, unsure = false;
  for (const auto& b : r.boundary) {
    if (b.verdict == Verdict::excluded) excl = true;
    if (b.verdict == Verdict::inconclusive) unsure = true;
  }
  r.classification = excl     ? Classification::excluded_boundary
                     : unsure ? Classification::inconclusive
                              : Classification::candidate;
  return r;
}

/// One report per component, in component order. Continua are tested at their base point.
inline std::vector<StabilityReport> classify(const Model& m, const std::vector<FixedPointComponent>& comps) {
  std::vector<StabilityReport> out;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    auto r = classify_point(m, comps[k].point);
    r.component = k;
    r.continuum = comps[k].kind == ComponentKind::continuum;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rvrw
