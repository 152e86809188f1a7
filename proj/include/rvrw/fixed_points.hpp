#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "graph_model.hpp"
#include "linalg.hpp"

namespace rvrw {

/// One nonempty vertex subset per walk.
struct SupportProfile {
  std::vector<std::vector<VertexId>> sets;

  bool contains(int walk, VertexId v) const {
    return std::binary_search(sets[walk].begin(), sets[walk].end(), v);
  }
  bool operator==(const SupportProfile& o) const { return sets == o.sets; }
  bool operator<(const SupportProfile& o) const { return sets < o.sets; }

  std::string to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < sets.size(); ++i) {
      os << (i ? ",{" : "{");
      for (std::size_t k = 0; k < sets[i].size(); ++k) os << (k ? "," : "") << sets[i][k];
      os << '}';
    }
    os << ']';
    return os.str();
  }
};

/// Support of a state: coordinates above tol.
inline SupportProfile support_of(const GraphSystem& g, const StatePoint& x, double tol = 1e-9) {
  SupportProfile s;
  s.sets.resize(g.num_walks());
  for (std::size_t c = 0; c < x.size(); ++c)
    if (x[c] > tol) s.sets[g.walk_of(c)].push_back(g.vertex_of(c));
  return s;
}

constexpr std::size_t kDefaultSupportCap = 24;

/// Calls fn for every profile with nonempty components. Walk 1 varies slowest; within a
/// walk, subsets are ordered by their bitmask over the sorted vertex list.
inline void for_each_support(const GraphSystem& g, const std::function<void(const SupportProfile&)>& fn,
                             std::size_t cap = kDefaultSupportCap) {
  if (g.dimension() > cap)
    throw SizeGuard("support enumeration needs " + std::to_string(g.dimension()) +
                    " bits, cap is " + std::to_string(cap));
  const int m = g.num_walks();
  std::vector<unsigned long> mask(m, 1);
  SupportProfile s;
  s.sets.resize(m);
  auto fill = [&](int i) {
    s.sets[i].clear();
    for (int k = 0; k < g.degree(i); ++k)
      if (mask[i] >> k & 1UL) s.sets[i].push_back(g.vertices(i)[k]);
  };
  for (int i = 0; i < m; ++i) fill(i);
  while (true) {
    fn(s);
    int i = m - 1;
    while (i >= 0) {
      if (mask[i] + 1 < (1UL << g.degree(i))) {
        ++mask[i];
        fill(i);
        break;
      }
      mask[i] = 1;
      fill(i);
      --i;
    }
    if (i < 0) return;
  }
}

inline std::vector<SupportProfile> enumerate_supports(const GraphSystem& g,
                                                      std::size_t cap = kDefaultSupportCap) {
  std::vector<SupportProfile> out;
  for_each_support(g, [&](const SupportProfile& s) { out.push_back(s); }, cap);
  return out;
}

struct LinearSystem {
  Matrix coefficients;  // columns are flat coordinates
  std::vector<double> rhs;
};

/// Balance rows between consecutive support vertices, one normalization row per walk and
/// x_u^i = 0 for vertices off the support.
inline LinearSystem build_linear_system(const Model& m, const SupportProfile& s) {
  const auto& g = m.graph;
  const std::size_t d = g.dimension();
  LinearSystem ls{Matrix(d, d), std::vector<double>(d, 0.0)};
  std::size_t row = 0;
  auto add_base = [&](std::size_t r, std::size_t c, double sign) {
    for (const auto& cp : m.couplings[c]) ls.coefficients(r, cp.coord) += sign * cp.rho;
    ls.rhs[r] -= sign * m.params.eta[c];
  };
  for (int i = 0; i < g.num_walks(); ++i) {
    const auto& si = s.sets[i];
    if (si.empty()) throw DomainError("support profile has an empty component");
    for (std::size_t k = 0; k + 1 < si.size(); ++k) {
      add_base(row, g.coord(i, si[k]), 1.0);
      add_base(row, g.coord(i, si[k + 1]), -1.0);
      ++row;
    }
    for (VertexId v : si) ls.coefficients(row, g.coord(i, v)) = 1.0;
    ls.rhs[row++] = 1.0;
    for (VertexId v : g.vertices(i))
      if (!s.contains(i, v)) ls.coefficients(row++, g.coord(i, v)) = 1.0;
  }
  return ls;
}

enum class ComponentKind { isolated, continuum };

struct FixedPointComponent {
  SupportProfile support;
  ComponentKind kind = ComponentKind::isolated;
  StatePoint point;                             // the point, or the continuum base point
  std::vector<std::vector<double>> directions;  // orthonormal null directions (continuum)
  double determinant = 0.0;
  double residual = 0.0;  // ||pi(x) - x||_inf at point; NaN when the kernel is undefined
  double condition = 0.0;
  bool ill_conditioned = false;
  bool unclassified = false;  // nullity above the exact feasibility search
};

struct SolveOptions {
  double tol_pos = 1e-9;
  double ill_conditioned = 1e12;
  std::size_t max_exact_nullity = 4;
  std::size_t support_cap = kDefaultSupportCap;
};

inline double fixed_point_residual(const Model& m, const StatePoint& x) {
  try {
    auto p = transition_kernel(m, x);
    double r = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) r = std::max(r, std::abs(p[c] - x[c]));
    return r;
  } catch (const DomainError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

inline bool verify_fixed_point(const Model& m, const StatePoint& x, double tol = 1e-10) {
  double r = fixed_point_residual(m, x);
  return r <= tol;
}

namespace detail {

inline void orthonormalize(std::vector<std::vector<double>>& basis) {
  std::vector<std::vector<double>> out;
  for (auto v : basis) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : out) {
        double dot = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) dot += v[k] * q[k];
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= dot * q[k];
      }
    double n = 0.0;
    for (double e : v) n += e * e;
    n = std::sqrt(n);
    if (n < 1e-12) continue;
    for (double& e : v) e /= n;
    out.push_back(std::move(v));
  }
  basis = std::move(out);
}

/// max t subject to x0 + N y >= t on the listed coordinates, by enumerating the vertices of
/// the (k+1)-dimensional feasible polyhedron.
inline std::optional<std::pair<double, std::vector<double>>> maximin(
    const std::vector<double>& x0, const std::vector<std::vector<double>>& basis,
    const std::vector<std::size_t>& coords) {
  const std::size_t k = basis.size(), n = coords.size(), q = k + 1;
  if (n < q) return std::nullopt;
  double best_t = -std::numeric_limits<double>::infinity();
  std::vector<double> best_y;
  std::vector<std::size_t> pick(q);
  for (std::size_t a = 0; a < q; ++a) pick[a] = a;
  while (true) {
    Matrix a(q, q);
    std::vector<double> b(q);
    for (std::size_t r = 0; r < q; ++r) {
      std::size_t c = coords[pick[r]];
      for (std::size_t j = 0; j < k; ++j) a(r, j) = basis[j][c];
      a(r, k) = -1.0;
      b[r] = -x0[c];
    }
    auto e = eliminate(a, b, 1e-12);
    if (e.rank == q) {
      const auto& sol = e.particular;
      double t = sol[k];
      bool ok = t > best_t;
      for (std::size_t r = 0; ok && r < n; ++r) {
        std::size_t c = coords[r];
        double v = x0[c];
        for (std::size_t j = 0; j < k; ++j) v += sol[j] * basis[j][c];
        if (v < t - 1e-12) ok = false;
      }
      if (ok) {
        best_t = t;
        best_y.assign(sol.begin(), sol.begin() + static_cast<long>(k));
      }
    }
    std::size_t i = q;
    while (i > 0 && pick[i - 1] == n - q + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < q; ++j) pick[j] = pick[j - 1] + 1;
  }
  if (best_y.empty() && k > 0) return std::nullopt;
  return std::make_pair(best_t, best_y);
}

}  // namespace detail

/// Solves the linear system of one support and keeps the solution only when it is strictly
/// positive exactly on that support.
inline std::optional<FixedPointComponent> solve_support(const Model& m, const SupportProfile& s,
                                                        const SolveOptions& opt = {}) {
  const auto& g = m.graph;
  auto ls = build_linear_system(m, s);
  FixedPointComponent comp;
  comp.support = s;
  comp.determinant = determinant(ls.coefficients);
  auto e = eliminate(ls.coefficients, ls.rhs);
  if (!e.consistent) return std::nullopt;

  std::vector<std::size_t> on;
  for (std::size_t c = 0; c < g.dimension(); ++c)
    if (s.contains(g.walk_of(c), g.vertex_of(c))) on.push_back(c);
  auto clean = [&](StatePoint x) {
    for (std::size_t c = 0; c < x.size(); ++c)
      if (!s.contains(g.walk_of(c), g.vertex_of(c))) x[c] = 0.0;
    return x;
  };

  if (e.rank == g.dimension()) {
    auto x = clean(e.particular);
    for (std::size_t c : on)
      if (!(x[c] > opt.tol_pos)) return std::nullopt;
    comp.kind = ComponentKind::isolated;
    comp.point = std::move(x);
    comp.condition = condition_estimate(ls.coefficients);
  } else {
    auto basis = e.null_basis;
    detail::orthonormalize(basis);
    for (auto& v : basis)
      for (std::size_t c = 0; c < v.size(); ++c)
        if (!s.contains(g.walk_of(c), g.vertex_of(c))) v[c] = 0.0;
    StatePoint x0 = clean(e.particular);
    StatePoint base;
    if (basis.size() <= opt.max_exact_nullity) {
      auto best = detail::maximin(x0, basis, on);
      if (!best || !(best->first > opt.tol_pos)) return std::nullopt;
      base = x0;
      for (std::size_t j = 0; j < basis.size(); ++j)
        for (std::size_t c = 0; c < base.size(); ++c) base[c] += best->second[j] * basis[j][c];
    } else {
      // projection of the uniform point on the support; positive means a witness was found
      StatePoint u(g.dimension(), 0.0);
      for (std::size_t c : on) u[c] = 1.0 / static_cast<double>(s.sets[g.walk_of(c)].size());
      base = x0;
      for (const auto& v : basis) {
        double dot = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c) dot += (u[c] - x0[c]) * v[c];
        for (std::size_t c = 0; c < u.size(); ++c) base[c] += dot * v[c];
      }
      for (std::size_t c : on)
        if (!(base[c] > opt.tol_pos)) return std::nullopt;
      comp.unclassified = true;
    }
    comp.kind = ComponentKind::continuum;
    comp.point = clean(base);
    comp.directions = std::move(basis);
    comp.condition = std::numeric_limits<double>::infinity();
  }
  comp.ill_conditioned = comp.condition > opt.ill_conditioned && comp.kind == ComponentKind::isolated;
  comp.residual = fixed_point_residual(m, comp.point);
  return comp;
}

/// Union over all supports, in enumeration order, with duplicate points removed.
inline std::vector<FixedPointComponent> fixed_point_set(const Model& m, const SolveOptions& opt = {}) {
  std::vector<FixedPointComponent> out;
  for_each_support(
      m.graph,
      [&](const SupportProfile& s) {
        auto c = solve_support(m, s, opt);
        if (!c) return;
        if (c->kind == ComponentKind::isolated) {
          for (const auto& o : out)
            if (o.kind == ComponentKind::isolated) {
              double dist = 0.0;
              for (std::size_t k = 0; k < o.point.size(); ++k)
                dist = std::max(dist, std::abs(o.point[k] - c->point[k]));
              if (dist <= 1e-9) return;
            }
        }
        out.push_back(std::move(*c));
      },
      opt.support_cap);
  return out;
}

struct DegenerateSupport {
  SupportProfile support;
  double determinant;
  double scale;
};

struct GenericityReport {
  std::vector<DegenerateSupport> degenerate;
  std::size_t supports_checked = 0;
  bool generic() const { return degenerate.empty(); }
};

/// Supports whose coefficient matrix is singular: |det| < 1e-10 times the Hadamard bound.
inline GenericityReport genericity_check(const Model& m, double rel = 1e-10,
                                         std::size_t cap = kDefaultSupportCap) {
  GenericityReport r;
  for_each_support(
      m.graph,
      [&](const SupportProfile& s) {
        auto ls = build_linear_system(m, s);
        double det = determinant(ls.coefficients);
        double scale = hadamard_scale(ls.coefficients);
        ++r.supports_checked;
        if (std::abs(det) < rel * scale) r.degenerate.push_back({s, det, scale});
      },
      cap);
  return r;
}

struct ClosedFormWalk {
  bool unconstrained = false;      // rho_v^{ii} = 0 on the whole support
  std::vector<double> values;      // over the support in ascending vertex order
};

struct ClosedForm {
  std::vector<ClosedFormWalk> walks;

  bool unconstrained() const {
    return std::any_of(walks.begin(), walks.end(), [](const auto& w) { return w.unconstrained; });
  }
  StatePoint to_point(const GraphSystem& g, const SupportProfile& s) const {
    if (unconstrained()) throw DomainError("closed form leaves some walk unconstrained");
    StatePoint x(g.dimension(), 0.0);
    for (int i = 0; i < g.num_walks(); ++i)
      for (std::size_t k = 0; k < s.sets[i].size(); ++k) x[g.coord(i, s.sets[i][k])] = walks[i].values[k];
    return x;
  }
};

/// Explicit solution for pairwise disjoint supports with eta constant on each support:
/// x_v^i proportional to 1 / rho_v^{ii}.
inline std::optional<ClosedForm> disjoint_support_closed_form(const Model& m, const SupportProfile& s) {
  const auto& g = m.graph;
  std::vector<int> owner(g.num_vertices() + 1, -1);
  for (int i = 0; i < g.num_walks(); ++i)
    for (VertexId v : s.sets[i]) {
      if (owner[v] >= 0) throw DomainError("supports are not pairwise disjoint");
      owner[v] = i;
    }
  ClosedForm out;
  for (int i = 0; i < g.num_walks(); ++i) {
    const auto& si = s.sets[i];
    double eta0 = m.params.eta_at(g, i, si.front());
    std::vector<double> r;
    for (VertexId v : si) {
      if (m.params.eta_at(g, i, v) != eta0) throw NotApplicable("eta is not constant on the support");
      r.push_back(m.params.rho_at(g, v, i, i));
    }
    bool all_zero = std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; });
    bool all_neg = std::all_of(r.begin(), r.end(), [](double x) { return x < 0.0; });
    bool all_pos = std::all_of(r.begin(), r.end(), [](double x) { return x > 0.0; });
    ClosedFormWalk w;
    if (all_zero) {
      w.unconstrained = true;
    } else if (all_neg || all_pos) {
      double inv_sum = 0.0;
      for (double x : r) inv_sum += 1.0 / x;
      for (double x : r) w.values.push_back(1.0 / x / inv_sum);
    } else if (std::any_of(r.begin(), r.end(), [](double x) { return x < 0.0; }) &&
               std::any_of(r.begin(), r.end(), [](double x) { return x > 0.0; })) {
      throw MixedSigns("self-interaction changes sign on the support of walk " + std::to_string(i + 1));
    } else {
      return std::nullopt;
    }
    out.walks.push_back(std::move(w));
  }
  return out;
}

struct AccumulationWitness {
  SupportProfile support;
  std::vector<int> J, Ja, Jb;  // 1-based walk indices
};

struct AccumulationReport {
  bool certified = true;
  std::vector<AccumulationWitness> witnesses;
  std::vector<SupportProfile> failures;
};

/// Walks whose block moves along the continuum.
inline std::vector<int> varying_walks(const GraphSystem& g, const FixedPointComponent& c) {
  std::vector<int> J;
  for (int i = 0; i < g.num_walks(); ++i) {
    bool moves = false;
    for (const auto& v : c.directions)
      for (int k = 0; k < g.degree(i); ++k)
        if (std::abs(v[g.offset(i) + k]) > 1e-12) moves = true;
    if (moves) J.push_back(i);
  }
  return J;
}

/// Searches, for every continuum support, for two families of pairwise disjoint supports
/// covering J(S) whose disjoint unions coincide.
inline AccumulationReport accumulation_condition_check(const Model& m,
                                                       const std::vector<FixedPointComponent>& comps) {
  const auto& g = m.graph;
  double eta0 = m.params.eta.front();
  for (double e : m.params.eta)
    if (e != eta0) throw NotApplicable("eta differs between vertices");
  for (VertexId v = 1; v <= g.num_vertices(); ++v)
    for (int i : g.walks_at(v))
      if (m.params.rho_at(g, v, i, i) != 0.0) throw NotApplicable("self-interaction is not zero");

  AccumulationReport rep;
  for (const auto& c : comps) {
    if (c.kind != ComponentKind::continuum) continue;
    auto J = varying_walks(g, c);
    if (J.empty()) continue;
    // every pairwise-disjoint subfamily of J, keyed by its union
    std::map<std::vector<VertexId>, std::vector<unsigned long>> by_union;
    std::function<void(std::size_t, unsigned long, std::vector<VertexId>)> grow =
        [&](std::size_t from, unsigned long fam, std::vector<VertexId> uni) {
          if (fam) by_union[uni].push_back(fam);
          for (std::size_t a = from; a < J.size(); ++a) {
            const auto& sa = c.support.sets[J[a]];
            bool clash = std::any_of(sa.begin(), sa.end(), [&](VertexId v) {
              return std::binary_search(uni.begin(), uni.end(), v);
            });
            if (clash) continue;
            auto u2 = uni;
            u2.insert(u2.end(), sa.begin(), sa.end());
            std::sort(u2.begin(), u2.end());
            grow(a + 1, fam | (1UL << a), std::move(u2));
          }
        };
    grow(0, 0, {});
    const unsigned long full = (1UL << J.size()) - 1;
    std::optional<std::pair<unsigned long, unsigned long>> found;
    for (const auto& [uni, fams] : by_union) {
      for (std::size_t a = 0; a < fams.size() && !found; ++a)
        for (std::size_t b = a; b < fams.size() && !found; ++b)
          if ((fams[a] | fams[b]) == full) found = {{fams[a], fams[b]}};
      if (found) break;
    }
    if (!found) {
      rep.certified = false;
      rep.failures.push_back(c.support);
      continue;
    }
    AccumulationWitness w;
    w.support = c.support;
    for (std::size_t a = 0; a < J.size(); ++a) {
      w.J.push_back(J[a] + 1);
      if (found->first >> a & 1UL) w.Ja.push_back(J[a] + 1);
      if (found->second >> a & 1UL) w.Jb.push_back(J[a] + 1);
    }
    rep.witnesses.push_back(std::move(w));
  }
  return rep;
}

}  // namespace rvrw
