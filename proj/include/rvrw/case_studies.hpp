#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "fixed_points.hpp"
#include "graph_model.hpp"

namespace rvrw {

enum class Family { complete, star, star_pref, cycle };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::complete: return "complete";
    case Family::star: return "star";
    case Family::star_pref: return "star_pref";
    default: return "cycle";
  }
}

struct PredictedPoint {
  StatePoint point;
  std::string label;
};

struct PredictedLimitSet {
  Family family = Family::complete;
  int size = 0;  // kappa for complete graphs, m otherwise
  double epsilon = 0.0;
  double eta = 0.0;
  double alpha = 1.0;
  double eta_tilde = 0.0;  // star with preferences only
  std::vector<PredictedPoint> points;
  std::vector<std::string> descriptions;
  std::vector<std::string> warnings;
  std::optional<double> overlap_limit;  // exact limit of the overlap
  std::optional<double> overlap_bound;  // strict upper bound on the limit
};

// ---------------------------------------------------------------- complete graphs

/// delta^i and delta-bar^i of the one-overlap shape (s^i, u, u^i), j = 3 - i.
struct OverlapShape {
  double delta[2];
  double delta_bar[2];
};

inline std::optional<OverlapShape> overlap_shape(int u, int u1, int u2, double eps) {
  const double uu[2] = {static_cast<double>(u1), static_cast<double>(u2)};
  const double s[2] = {static_cast<double>(u + u1), static_cast<double>(u + u2)};
  OverlapShape r{};
  for (int i = 0; i < 2; ++i) {
    int j = 1 - i;
    if (!(uu[i] - eps * s[j] > 0.0) || !(uu[i] * uu[j] - eps * eps * s[i] * s[j] > 0.0)) return std::nullopt;
    r.delta[i] = eps * (eps * s[j] - uu[i]) / (eps * eps * s[i] * s[j] - uu[i] * uu[j]);
    r.delta_bar[i] = 1.0 / uu[i] - static_cast<double>(u) / uu[i] * r.delta[i];
  }
  return r;
}

/// Two walks on K_kappa with competitive parameters. For epsilon > 0 every concrete vertex
/// assignment is listed: disjoint uniform supports and the one-overlap points.
inline PredictedLimitSet complete_limits(int kappa, double eps, double eta, double alpha) {
  preset_complete(kappa, eps, eta, alpha);
  PredictedLimitSet out;
  out.family = Family::complete;
  out.size = kappa;
  out.epsilon = eps;
  out.eta = eta;
  out.alpha = alpha;
  if (eps == 0.0) {
    out.descriptions.push_back("K: the two walks have disjoint supports (any occupation on each)");
    out.overlap_limit = 0.0;
    return out;
  }
  out.descriptions.push_back("K~: disjoint supports, uniform on each");
  out.descriptions.push_back("K~1c: one shared block U with mass delta^i, private blocks with mass delta-bar^i");
  out.overlap_bound = static_cast<double>(kappa) * kappa * kappa * eps * eps;

  // each vertex is: 0 unused, 1 walk 1 only, 2 walk 2 only, 3 shared
  std::vector<int> cat(kappa, 0);
  std::vector<std::string> skipped;
  long total = 1;
  for (int k = 0; k < kappa; ++k) total *= 4;
  for (long code = 0; code < total; ++code) {
    long c = code;
    int n[4] = {0, 0, 0, 0};
    for (int k = 0; k < kappa; ++k) {
      cat[k] = static_cast<int>(c % 4);
      c /= 4;
      ++n[cat[k]];
    }
    StatePoint p(2 * static_cast<std::size_t>(kappa), 0.0);
    if (n[3] == 0) {
      if (n[1] == 0 || n[2] == 0) continue;
      for (int k = 0; k < kappa; ++k) {
        if (cat[k] == 1) p[k] = 1.0 / n[1];
        if (cat[k] == 2) p[kappa + k] = 1.0 / n[2];
      }
      out.points.push_back({std::move(p), "K~"});
      continue;
    }
    if (n[1] == 0 || n[2] == 0) continue;  // equal or nested supports
    auto shape = overlap_shape(n[3], n[1], n[2], eps);
    if (!shape) {
      std::ostringstream os;
      os << "epsilon too large for shape u=" << n[3] << " u1=" << n[1] << " u2=" << n[2] << "; skipped";
      if (std::find(skipped.begin(), skipped.end(), os.str()) == skipped.end()) skipped.push_back(os.str());
      continue;
    }
    for (int k = 0; k < kappa; ++k) {
      if (cat[k] == 3) {
        p[k] = shape->delta[0];
        p[kappa + k] = shape->delta[1];
      } else if (cat[k] == 1) {
        p[k] = shape->delta_bar[0];
      } else if (cat[k] == 2) {
        p[kappa + k] = shape->delta_bar[1];
      }
    }
    out.points.push_back({std::move(p), "K~1c"});
  }
  out.warnings = std::move(skipped);
  return out;
}

// ---------------------------------------------------------------- stars

inline PredictedLimitSet star_limits(int m, double eps, double eta, double alpha) {
  preset_star(m, eps, eta, alpha);
  PredictedLimitSet out;
  out.family = Family::star;
  out.size = m;
  out.epsilon = eps;
  out.eta = eta;
  out.alpha = alpha;
  auto point = [&](const std::vector<double>& centre) {
    StatePoint p(2 * static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      p[2 * i] = centre[i];
      p[2 * i + 1] = 1.0 - centre[i];
    }
    return p;
  };
  if (eps == 0.0) {
    out.descriptions.push_back("S1: at most one walk occupies the centre, at any level in [0,1]");
    out.overlap_limit = 0.0;
    return out;
  }
  if (eps == 0.5) throw RegimeBoundary("epsilon = 1/2 separates the two star regimes");
  if (eps >= 1.0) throw RegimeBoundary("star predictions cover epsilon < 1 only");
  if (eps < 0.5) {
    out.descriptions.push_back("S2: walks in K share the centre at eps/(|K|+2eps-1), the rest sit on their leaf");
    for (unsigned long mask = 1; mask + 1 < (1UL << m); ++mask) {
      int k = __builtin_popcountl(mask);
      double c = eps / (k + 2.0 * eps - 1.0);
      std::vector<double> centre(m, 0.0);
      std::string label = "S2 K={";
      bool first = true;
      for (int i = 0; i < m; ++i)
        if (mask >> i & 1UL) {
          centre[i] = c;
          label += (first ? "" : ",") + std::to_string(i + 1);
          first = false;
        }
      out.points.push_back({point(centre), label + "}"});
    }
    return out;
  }
  double c = eps / (m + 2.0 * eps - 1.0);
  out.descriptions.push_back("all walks share the centre at eps/(m+2eps-1)");
  out.points.push_back({point(std::vector<double>(m, c)), "full centre"});
  return out;
}

inline PredictedLimitSet star_pref_limits(double eta, double eta_tilde, double alpha = 1.0) {
  if (eta == 1.0) throw RegimeBoundary("extra centre importance 1 is the phase boundary");
  preset_star_preferences(eta, eta_tilde, alpha);
  PredictedLimitSet out;
  out.family = Family::star_pref;
  out.size = 2;
  out.eta = eta;
  out.eta_tilde = eta_tilde;
  out.alpha = alpha;
  if (eta < 1.0) {
    out.descriptions.push_back("segregated: one walk on the centre, the other on its leaf");
    out.points.push_back({{1, 0, 0, 1}, "walk 1 centre"});
    out.points.push_back({{0, 1, 1, 0}, "walk 2 centre"});
    out.overlap_limit = 0.0;
  } else {
    out.descriptions.push_back("both walks on the centre");
    out.points.push_back({{1, 0, 1, 0}, "shared centre"});
    out.overlap_limit = 1.0;
  }
  return out;
}

// ---------------------------------------------------------------- cycles

/// Edge k carries [[a, 1-a]] with a = occupation of vertex k+1 by walk k (0-based k).
struct EdgeWord {
  std::vector<double> a;

  std::size_t size() const { return a.size(); }
  bool one(std::size_t k, double tol) const { return a[k] >= 1.0 - tol; }
  bool zero(std::size_t k, double tol) const { return a[k] <= tol; }
  bool mixed(std::size_t k, double tol) const { return !one(k, tol) && !zero(k, tol); }

  EdgeWord rotated(std::size_t r) const {
    EdgeWord w;
    for (std::size_t k = 0; k < a.size(); ++k) w.a.push_back(a[(k + r) % a.size()]);
    return w;
  }
  /// The same configuration read around the cycle in the other direction.
  EdgeWord reversed() const {
    EdgeWord w;
    for (std::size_t k = a.size(); k-- > 0;) w.a.push_back(1.0 - a[k]);
    return w;
  }
};

inline EdgeWord edge_word(const GraphSystem& g, const StatePoint& p) {
  EdgeWord w;
  for (int i = 0; i < g.num_walks(); ++i) w.a.push_back(p[g.coord(i, i + 1)]);
  return w;
}

inline StatePoint cycle_point(const GraphSystem& g, const EdgeWord& w) {
  StatePoint p(g.dimension());
  for (int i = 0; i < g.num_walks(); ++i) {
    VertexId next = i + 2 > g.num_walks() ? 1 : i + 2;
    p[g.coord(i, i + 1)] = w.a[i];
    p[g.coord(i, next)] = 1.0 - w.a[i];
  }
  return p;
}

enum class CycleClass { C1, C2, C3, C4, none };
enum class Admissibility { tilde_admissible, excluded_pattern, not_applicable };

inline const char* to_string(CycleClass c) {
  switch (c) {
    case CycleClass::C1: return "C1";
    case CycleClass::C2: return "C2";
    case CycleClass::C3: return "C3";
    case CycleClass::C4: return "C4";
    default: return "none";
  }
}
inline const char* to_string(Admissibility a) {
  switch (a) {
    case Admissibility::tilde_admissible: return "tilde-admissible";
    case Admissibility::excluded_pattern: return "excluded-pattern";
    default: return "n/a";
  }
}

struct CycleClassification {
  CycleClass cls = CycleClass::none;
  Admissibility admissibility = Admissibility::not_applicable;
};

namespace detail {

// ..., [[1-a,a]] (a in [0,1)), [[0,1]], [[1,0]], ...  or  ..., [[1,0]], [[0,1]], [[b,1-b]] (b in (0,1]), ...
inline bool has_forbidden_triple(const EdgeWord& w, double tol) {
  const std::size_t m = w.size();
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t k1 = (k + 1) % m, k2 = (k + 2) % m;
    if (!w.zero(k1, tol)) continue;
    if (!w.zero(k, tol) && w.one(k2, tol)) return true;
    if (w.one(k, tol) && !w.zero(k2, tol)) return true;
  }
  return false;
}

}  // namespace detail

inline CycleClassification classify_cycle_point(const EdgeWord& w, double tol = 1e-6) {
  const std::size_t m = w.size();
  CycleClassification r;
  bool all_half = true, all_mixed = true, any_mixed = false;
  for (std::size_t k = 0; k < m; ++k) {
    if (std::abs(w.a[k] - 0.5) > tol) all_half = false;
    if (w.mixed(k, tol)) any_mixed = true;
    else all_mixed = false;
  }
  if (all_half) {
    r.cls = CycleClass::C1;
    r.admissibility = m % 4 == 0 ? Admissibility::tilde_admissible : Admissibility::excluded_pattern;
    return r;
  }
  if (all_mixed) {
    bool c2 = m % 4 == 0;
    for (std::size_t k = 0; c2 && k < m; ++k)
      if (std::abs(w.a[(k + 2) % m] - (1.0 - w.a[k])) > tol) c2 = false;
    if (c2) {
      r.cls = CycleClass::C2;
      r.admissibility = Admissibility::excluded_pattern;
    }
    return r;
  }
  if (!any_mixed) {
    r.cls = CycleClass::C3;
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      if (!w.mixed(k, tol)) continue;
      std::size_t prev = (k + m - 1) % m, next = (k + 1) % m;
      if (w.mixed(prev, tol) || w.mixed(next, tol) || w.one(prev, tol) == w.one(next, tol)) return r;
    }
    r.cls = CycleClass::C4;
  }
  bool bad = detail::has_forbidden_triple(w, tol) || detail::has_forbidden_triple(w.reversed(), tol);
  r.admissibility = bad ? Admissibility::excluded_pattern : Admissibility::tilde_admissible;
  return r;
}

inline CycleClassification classify_cycle_point(const GraphSystem& g, const StatePoint& p, double tol = 1e-6) {
  return classify_cycle_point(edge_word(g, p), tol);
}

inline std::vector<double> dedupe_sorted(std::vector<double> v, double tol = 1e-12) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

/// epsilon in (0,1] where the coefficient matrix of a cycle support is singular. Walks with
/// two support vertices form cyclic runs; a full cycle gives a circulant factor, each run of
/// length r a tridiagonal Toeplitz factor.
inline std::vector<double> cycle_epsilon_degeneracy(int m, const std::vector<int>& support_sizes) {
  if (static_cast<int>(support_sizes.size()) != m) throw DomainError("one support size per walk");
  const double pi = std::numbers::pi;
  std::vector<double> roots;
  auto keep = [&](double c) {
    if (c > 1e-12 && c <= 1.0 + 1e-12) roots.push_back(std::min(c, 1.0));
  };
  if (std::all_of(support_sizes.begin(), support_sizes.end(), [](int s) { return s == 2; })) {
    for (int k = 0; k < m; ++k) keep(std::cos(2.0 * pi * k / m));
    return dedupe_sorted(roots);
  }
  int start = 0;
  while (support_sizes[start] == 2) ++start;  // a walk with one support vertex
  int run = 0;
  for (int t = 1; t <= m; ++t) {
    int i = (start + t) % m;
    if (support_sizes[i] == 2 && t < m) {
      ++run;
      continue;
    }
    for (int k = 1; k <= run; ++k) keep(std::cos(pi * k / (run + 1)));
    run = 0;
  }
  return dedupe_sorted(roots);
}

inline std::vector<double> cycle_epsilon_degeneracy(const GraphSystem& g, const SupportProfile& s) {
  std::vector<int> sizes;
  for (const auto& si : s.sets) sizes.push_back(static_cast<int>(si.size()));
  return cycle_epsilon_degeneracy(g.num_walks(), sizes);
}

inline PredictedLimitSet cycle_limits(int m, double eps, double eta, double alpha) {
  preset_cycle(m, eps, eta, alpha);
  PredictedLimitSet out;
  out.family = Family::cycle;
  out.size = m;
  out.epsilon = eps;
  out.eta = eta;
  out.alpha = alpha;
  if (eps == 0.0) {
    if (m % 4 == 0) out.descriptions.push_back("C1~: all edges [[1/2,1/2]]");
    out.descriptions.push_back("C3~: all edges unmixed, no [[1,0]][[0,1]][[1,0]] in either orientation");
    out.descriptions.push_back(
        "C4~: mixed edges flanked by opposite unmixed edges, no [[1-a,a]][[0,1]][[1,0]] or "
        "[[1,0]][[0,1]][[b,1-b]] in either orientation");
  } else {
    auto r = cycle_epsilon_degeneracy(m, std::vector<int>(m, 2));
    std::ostringstream os;
    os << "single point of Fix(pi) for small epsilon; full-support degeneracy at";
    for (double x : r) os << ' ' << x;
    out.descriptions.push_back(os.str());
    if (!r.empty() && eps >= r.front())
      out.warnings.push_back("epsilon is not below the smallest full-support degeneracy root");
  }
  return out;
}

// ---------------------------------------------------------------- matching

inline double distance_inf(const StatePoint& a, const StatePoint& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

/// Isolated: the point itself. Continuum: orthogonal projection onto the affine hull, pulled
/// back toward the base point until it is nonnegative.
inline StatePoint nearest_point(const FixedPointComponent& c, const StatePoint& x) {
  if (c.kind == ComponentKind::isolated) return c.point;
  StatePoint proj = c.point;
  std::vector<double> step(x.size(), 0.0);
  for (const auto& v : c.directions) {
    double dot = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dot += (x[k] - c.point[k]) * v[k];
    for (std::size_t k = 0; k < x.size(); ++k) step[k] += dot * v[k];
  }
  double s = 1.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (c.point[k] + step[k] < 0.0 && step[k] < 0.0) s = std::min(s, -c.point[k] / step[k]);
  for (std::size_t k = 0; k < x.size(); ++k) proj[k] = std::max(0.0, c.point[k] + s * step[k]);
  return proj;
}

inline double distance_to_component(const FixedPointComponent& c, const StatePoint& x) {
  return distance_inf(nearest_point(c, x), x);
}

struct EmpiricalLimit {
  std::size_t component = 0;
  double distance = std::numeric_limits<double>::infinity();
  double overlap = 0.0;
};

inline EmpiricalLimit empirical_limit(const GraphSystem& g, const StatePoint& final_state,
                                      const std::vector<FixedPointComponent>& comps) {
  EmpiricalLimit e;
  e.overlap = overlap(g, final_state);
  for (std::size_t k = 0; k < comps.size(); ++k) {
    double d = distance_to_component(comps[k], final_state);
    if (d < e.distance) {
      e.distance = d;
      e.component = k;
    }
  }
  return e;
}

struct MatchResult {
  bool matched = false;
  double distance = std::numeric_limits<double>::infinity();  // to the nearest listed point
  std::string nearest;
  std::string detail;
};

/// Compares a final state with a prediction: listed points by distance, description-only
/// sets by membership at the given tolerance.
inline MatchResult match_prediction(const PredictedLimitSet& pred, const GraphSystem& g, const StatePoint& x,
                                    double tol) {
  MatchResult r;
  for (const auto& p : pred.points) {
    double d = distance_inf(p.point, x);
    if (d < r.distance) {
      r.distance = d;
      r.nearest = p.label;
    }
  }
  if (!pred.points.empty()) {
    r.matched = r.distance <= tol;
    r.detail = "nearest " + r.nearest;
    return r;
  }
  switch (pred.family) {
    case Family::complete: {
      r.matched = true;
      for (int v = 0; v < pred.size; ++v)
        if (std::min(x[v], x[pred.size + v]) > tol) r.matched = false;
      r.detail = "disjoint supports at tolerance";
      break;
    }
    case Family::star: {
      int at_centre = 0;
      for (int i = 0; i < pred.size; ++i)
        if (x[2 * i] > tol) ++at_centre;
      r.matched = at_centre <= 1;
      r.detail = std::to_string(at_centre) + " walk(s) on the centre";
      break;
    }
    case Family::cycle: {
      if (pred.epsilon != 0.0) {
        r.detail = "no closed-form limit for epsilon > 0";
        break;
      }
      auto c = classify_cycle_point(g, x, tol);
      r.matched = (c.cls == CycleClass::C3 || c.cls == CycleClass::C4 ||
                   (c.cls == CycleClass::C1 && pred.size % 4 == 0)) &&
                  c.admissibility == Admissibility::tilde_admissible;
      r.detail = std::string(to_string(c.cls)) + " " + to_string(c.admissibility);
      break;
    }
    default:
      break;
  }
  return r;
}

}  // namespace rvrw
