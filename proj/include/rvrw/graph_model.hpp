#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace rvrw {

using VertexId = int;

/// Raw description of a system before validation. Walk indices are 0-based.
struct SystemSpec {
  struct EtaOverride {
    int walk;
    VertexId vertex;
    double value;
  };
  /// Sets rho_v^{ij} only; the (j,i) entry is left alone so asymmetric input is detectable.
  struct RhoOverride {
    VertexId vertex;
    int walk_i;
    int walk_j;
    double value;
  };

  std::vector<std::vector<VertexId>> walks;
  double alpha = 1.0;
  double eta_default = 1.0;
  std::vector<EtaOverride> eta_overrides;
  double rho_pairwise = 0.0;
  double rho_self = 0.0;
  std::vector<RhoOverride> rho_overrides;
};

enum class Validation { strict, relaxed };

/// Walks, their sorted vertex sets and the shared-vertex index sets I_v.
/// Flat coordinates run walk by walk, vertices ascending within a walk.
class GraphSystem {
 public:
  GraphSystem() = default;

  explicit GraphSystem(std::vector<std::vector<VertexId>> vertex_sets)
      : sets_(std::move(vertex_sets)) {
    if (sets_.empty()) throw InvalidSize("a system needs at least one walk");
    std::set<VertexId> all;
    for (std::size_t i = 0; i < sets_.size(); ++i) {
      auto& s = sets_[i];
      if (s.empty())
        throw EmptyVertexSet("walk " + std::to_string(i + 1) + " has an empty vertex set");
      std::sort(s.begin(), s.end());
      if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw DuplicateVertexInSet("walk " + std::to_string(i + 1) + " lists a vertex twice");
      all.insert(s.begin(), s.end());
    }
    nv_ = static_cast<int>(all.size());
    if (*all.begin() != 1 || *all.rbegin() != nv_)
      throw ConfigError("vertex ids must be the dense range 1..|V|");

    offsets_.assign(sets_.size() + 1, 0);
    for (std::size_t i = 0; i < sets_.size(); ++i) offsets_[i + 1] = offsets_[i] + sets_[i].size();
    coord_.assign(sets_.size(), std::vector<int>(nv_, -1));
    shared_.assign(nv_, {});
    for (std::size_t i = 0; i < sets_.size(); ++i) {
      for (std::size_t k = 0; k < sets_[i].size(); ++k) {
        VertexId v = sets_[i][k];
        coord_[i][v - 1] = static_cast<int>(offsets_[i] + k);
        shared_[v - 1].push_back(static_cast<int>(i));
        walk_of_.push_back(static_cast<int>(i));
        vertex_of_.push_back(v);
      }
    }
  }

  int num_walks() const { return static_cast<int>(sets_.size()); }
  int num_vertices() const { return nv_; }
  std::size_t dimension() const { return offsets_.back(); }
  int degree(int walk) const { return static_cast<int>(sets_[walk].size()); }
  const std::vector<VertexId>& vertices(int walk) const { return sets_[walk]; }
  const std::vector<std::vector<VertexId>>& vertex_sets() const { return sets_; }
  std::size_t offset(int walk) const { return offsets_[walk]; }

  /// I_v as ascending 0-based walk indices.
  const std::vector<int>& walks_at(VertexId v) const { return shared_[v - 1]; }

  bool contains(int walk, VertexId v) const {
    return v >= 1 && v <= nv_ && coord_[walk][v - 1] >= 0;
  }
  /// Flat coordinate of x_v^i; v must belong to V^i.
  std::size_t coord(int walk, VertexId v) const {
    if (!contains(walk, v))
      throw DomainError("vertex " + std::to_string(v) + " is not in walk " +
                        std::to_string(walk + 1));
    return static_cast<std::size_t>(coord_[walk][v - 1]);
  }
  int walk_of(std::size_t c) const { return walk_of_[c]; }
  VertexId vertex_of(std::size_t c) const { return vertex_of_[c]; }

  bool operator==(const GraphSystem& o) const { return sets_ == o.sets_; }

 private:
  std::vector<std::vector<VertexId>> sets_;
  int nv_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<int>> coord_;
  std::vector<std::vector<int>> shared_;
  std::vector<int> walk_of_;
  std::vector<VertexId> vertex_of_;
};

/// alpha, eta per flat coordinate and the per-vertex |I_v| x |I_v| rho matrices.
struct ParameterSet {
  double alpha = 1.0;
  std::vector<double> eta;
  std::vector<std::vector<double>> rho;  // rho[v-1], row-major over positions in I_v

  double eta_at(const GraphSystem& g, int walk, VertexId v) const { return eta[g.coord(walk, v)]; }

  double rho_at(const GraphSystem& g, VertexId v, int wi, int wj) const {
    const auto& I = g.walks_at(v);
    auto pi = std::find(I.begin(), I.end(), wi);
    auto pj = std::find(I.begin(), I.end(), wj);
    if (pi == I.end() || pj == I.end())
      throw DomainError("rho requested for a walk that does not contain the vertex");
    return rho[v - 1][(pi - I.begin()) * I.size() + (pj - I.begin())];
  }
};

struct Coupling {
  std::size_t coord;  // flat coordinate of x_v^j
  double rho;         // rho_v^{ij}
};

/// Validated system + parameters, with the coupling lists used by every hot loop.
struct Model {
  GraphSystem graph;
  ParameterSet params;
  std::vector<std::vector<Coupling>> couplings;  // per flat coordinate (i,v)

  std::size_t dimension() const { return graph.dimension(); }

  /// eta_v^i + sum_j rho_v^{ij} x_v^j for the flat coordinate c.
  double base(const double* x, std::size_t c) const {
    double b = params.eta[c];
    for (const auto& cp : couplings[c]) b += cp.rho * x[cp.coord];
    return b;
  }
};

namespace detail {

inline void finish_couplings(Model& m) {
  const auto& g = m.graph;
  m.couplings.assign(g.dimension(), {});
  for (std::size_t c = 0; c < g.dimension(); ++c) {
    int i = g.walk_of(c);
    VertexId v = g.vertex_of(c);
    for (int j : g.walks_at(v)) {
      double r = m.params.rho_at(g, v, i, j);
      if (r != 0.0) m.couplings[c].push_back({g.coord(j, v), r});
    }
  }
}

}  // namespace detail

/// Validates a raw description. Relaxed validation skips the positivity and
/// dominance checks on eta (used only for degenerate illustration systems).
inline Model build_system(const SystemSpec& spec, Validation mode = Validation::strict) {
  Model m;
  m.graph = GraphSystem(spec.walks);
  const auto& g = m.graph;
  if (!(spec.alpha > 0.0)) throw InvalidParameter("alpha must be positive");
  m.params.alpha = spec.alpha;

  m.params.eta.assign(g.dimension(), spec.eta_default);
  for (const auto& o : spec.eta_overrides) {
    if (o.walk < 0 || o.walk >= g.num_walks() || !g.contains(o.walk, o.vertex))
      throw ConfigError("eta override refers to a vertex outside its walk");
    m.params.eta[g.coord(o.walk, o.vertex)] = o.value;
  }

  m.params.rho.assign(g.num_vertices(), {});
  for (VertexId v = 1; v <= g.num_vertices(); ++v) {
    std::size_t k = g.walks_at(v).size();
    auto& r = m.params.rho[v - 1];
    r.assign(k * k, spec.rho_pairwise);
    for (std::size_t a = 0; a < k; ++a) r[a * k + a] = spec.rho_self;
  }
  for (const auto& o : spec.rho_overrides) {
    if (o.vertex < 1 || o.vertex > g.num_vertices()) throw ConfigError("rho override vertex out of range");
    const auto& I = g.walks_at(o.vertex);
    auto pi = std::find(I.begin(), I.end(), o.walk_i);
    auto pj = std::find(I.begin(), I.end(), o.walk_j);
    if (pi == I.end() || pj == I.end())
      throw ConfigError("rho override refers to a walk that does not contain the vertex");
    m.params.rho[o.vertex - 1][(pi - I.begin()) * I.size() + (pj - I.begin())] = o.value;
  }

  for (VertexId v = 1; v <= g.num_vertices(); ++v) {
    const auto& I = g.walks_at(v);
    const auto& r = m.params.rho[v - 1];
    std::size_t k = I.size();
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        if (r[a * k + b] != r[b * k + a]) {
          std::ostringstream os;
          os << "rho at vertex " << v << " differs between walks " << I[a] + 1 << " and " << I[b] + 1;
          throw SymmetryViolation(os.str());
        }
  }

  if (mode == Validation::strict) {
    for (std::size_t c = 0; c < g.dimension(); ++c) {
      int i = g.walk_of(c);
      VertexId v = g.vertex_of(c);
      long double neg = 0.0L;
      for (int j : g.walks_at(v)) {
        double r = m.params.rho_at(g, v, i, j);
        if (r < 0.0) neg += -static_cast<long double>(r);
      }
      long double eta = m.params.eta[c];
      if (!(eta > neg) || !(eta > 0.0L)) {
        std::ostringstream os;
        os << "eta at walk " << i + 1 << ", vertex " << v << " is " << m.params.eta[c]
           << " but must exceed " << static_cast<double>(neg);
        throw DominanceViolation(os.str(), i + 1, v);
      }
    }
  }
  detail::finish_couplings(m);
  return m;
}

/// Competitive parameters: rho^{ij} = -1 across walks, rho^{ii} = -epsilon.
inline SystemSpec competitive_spec(std::vector<std::vector<VertexId>> walks, double epsilon,
                                   double eta, double alpha) {
  if (!(epsilon >= 0.0)) throw InvalidParameter("epsilon must be non-negative");
  SystemSpec s;
  s.walks = std::move(walks);
  s.alpha = alpha;
  s.eta_default = eta;
  s.rho_pairwise = -1.0;
  s.rho_self = -epsilon;
  return s;
}

inline SystemSpec complete_spec(int kappa, double epsilon, double eta, double alpha) {
  if (kappa < 2) throw InvalidSize("complete graph needs kappa >= 2");
  std::vector<VertexId> vs(kappa);
  for (int v = 0; v < kappa; ++v) vs[v] = v + 1;
  return competitive_spec({vs, vs}, epsilon, eta, alpha);
}

/// Centre is vertex 1; walk i (0-based) uses {1, i+2}.
inline SystemSpec star_spec(int m, double epsilon, double eta, double alpha) {
  if (m < 2) throw InvalidSize("star needs m >= 2");
  std::vector<std::vector<VertexId>> w;
  for (int i = 0; i < m; ++i) w.push_back({1, i + 2});
  return competitive_spec(std::move(w), epsilon, eta, alpha);
}

/// Walk i (0-based) uses {i+1, i+2}, the last one wraps to {m, 1}.
inline SystemSpec cycle_spec(int m, double epsilon, double eta, double alpha) {
  if (m < 3) throw InvalidSize("cycle needs m >= 3");
  std::vector<std::vector<VertexId>> w;
  for (int i = 0; i < m; ++i) w.push_back({i + 1, i + 2 > m ? 1 : i + 2});
  return competitive_spec(std::move(w), epsilon, eta, alpha);
}

inline Model preset_complete(int kappa, double epsilon, double eta, double alpha,
                             std::vector<SystemSpec::EtaOverride> overrides = {}) {
  auto s = complete_spec(kappa, epsilon, eta, alpha);
  s.eta_overrides = std::move(overrides);
  return build_system(s);
}

inline Model preset_star(int m, double epsilon, double eta, double alpha,
                         std::vector<SystemSpec::EtaOverride> overrides = {}) {
  auto s = star_spec(m, epsilon, eta, alpha);
  s.eta_overrides = std::move(overrides);
  return build_system(s);
}

inline Model preset_cycle(int m, double epsilon, double eta, double alpha,
                          std::vector<SystemSpec::EtaOverride> overrides = {}) {
  auto s = cycle_spec(m, epsilon, eta, alpha);
  s.eta_overrides = std::move(overrides);
  return build_system(s);
}

/// Two walks on the 3-vertex star, epsilon = 0, centre importance eta_tilde + eta,
/// leaves eta_tilde.
inline Model preset_star_preferences(double eta, double eta_tilde, double alpha = 1.0) {
  if (!(eta > 0.0)) throw InvalidParameter("extra centre importance must be positive");
  return preset_star(2, 0.0, eta_tilde, alpha, {{0, 1, eta_tilde + eta}, {1, 1, eta_tilde + eta}});
}

}  // namespace rvrw
