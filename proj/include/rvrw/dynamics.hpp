#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "graph_model.hpp"

namespace rvrw {

/// A point of the product of simplices, one block per walk in flat-coordinate order.
using StatePoint = std::vector<double>;

inline StatePoint uniform_state(const GraphSystem& g) {
  StatePoint x(g.dimension());
  for (std::size_t c = 0; c < x.size(); ++c) x[c] = 1.0 / g.degree(g.walk_of(c));
  return x;
}

/// Throws DomainError unless every entry is >= 0 and every walk block sums to 1.
inline void validate_state(const GraphSystem& g, const StatePoint& x, double tol = 1e-12) {
  if (x.size() != g.dimension()) throw DomainError("state has the wrong dimension");
  for (int i = 0; i < g.num_walks(); ++i) {
    double s = 0.0;
    for (int k = 0; k < g.degree(i); ++k) {
      double v = x[g.offset(i) + k];
      if (!(v >= 0.0)) throw DomainError("state has a negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > tol) throw DomainError("walk " + std::to_string(i + 1) + " does not sum to 1");
  }
}

inline double weight_from_base(double base, double alpha) {
  if (!(base > 0.0)) throw DomainError("weight base is not positive");
  if (alpha == 1.0) return base;
  if (alpha == 2.0) return base * base;
  return std::pow(base, alpha);
}

/// H_v^i(x).
inline double weight(const Model& m, const StatePoint& x, int walk, VertexId v) {
  return weight_from_base(m.base(x.data(), m.graph.coord(walk, v)), m.params.alpha);
}

/// N^i(x) = sum_w x_w^i H_w^i(x) for every walk.
inline std::vector<double> normalizers(const Model& m, const StatePoint& x) {
  const auto& g = m.graph;
  std::vector<double> n(g.num_walks(), 0.0);
  for (std::size_t c = 0; c < g.dimension(); ++c)
    n[g.walk_of(c)] += x[c] * weight_from_base(m.base(x.data(), c), m.params.alpha);
  return n;
}

inline StatePoint transition_kernel(const Model& m, const StatePoint& x) {
  const auto& g = m.graph;
  StatePoint p(g.dimension());
  for (int i = 0; i < g.num_walks(); ++i) {
    std::size_t o = g.offset(i), d = g.degree(i);
    double n = 0.0;
    for (std::size_t c = o; c < o + d; ++c) {
      p[c] = x[c] * weight_from_base(m.base(x.data(), c), m.params.alpha);
      n += p[c];
    }
    if (!(n > 0.0)) throw DomainError("kernel normalizer is not positive");
    for (std::size_t c = o; c < o + d; ++c) p[c] /= n;
  }
  return p;
}

/// F(x) = -x + pi(x).
inline std::vector<double> vector_field(const Model& m, const StatePoint& x) {
  auto f = transition_kernel(m, x);
  for (std::size_t c = 0; c < f.size(); ++c) f[c] -= x[c];
  return f;
}

/// Sum over walk pairs i<j of sum_v x_v^i x_v^j on shared vertices.
inline double overlap(const GraphSystem& g, const StatePoint& x) {
  double h = 0.0;
  for (VertexId v = 1; v <= g.num_vertices(); ++v) {
    const auto& I = g.walks_at(v);
    for (std::size_t a = 0; a < I.size(); ++a)
      for (std::size_t b = a + 1; b < I.size(); ++b) h += x[g.coord(I[a], v)] * x[g.coord(I[b], v)];
  }
  return h;
}

struct FlowSample {
  double t;
  StatePoint x;
};

/// Classical RK4 for dx/dt = F(x) with per-step projection back onto the simplices.
inline std::vector<FlowSample> integrate_flow(const Model& m, StatePoint x, double t_end,
                                              double dt = 0.01, int record_every = 1) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const auto& g = m.graph;
  const std::size_t d = g.dimension();
  const long steps = std::lround(t_end / dt);
  std::vector<FlowSample> path{{0.0, x}};
  StatePoint y(d);
  auto axpy = [&](const std::vector<double>& k, double h) {
    for (std::size_t c = 0; c < d; ++c) y[c] = x[c] + h * k[c];
    return y;
  };
  for (long s = 1; s <= steps; ++s) {
    auto k1 = vector_field(m, x);
    std::vector<double> k2, k3, k4;
    try {
      k2 = vector_field(m, axpy(k1, dt / 2));
      k3 = vector_field(m, axpy(k2, dt / 2));
      k4 = vector_field(m, axpy(k3, dt));
    } catch (const DomainError&) {
      // an intermediate stage left the state space far enough to break the kernel
      throw StepRejected("RK4 stage left the state space; reduce dt");
    }
    for (std::size_t c = 0; c < d; ++c) {
      x[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
      if (x[c] < -1e-8) throw StepRejected("RK4 step left the state space; reduce dt");
      if (x[c] < 0.0) x[c] = 0.0;
    }
    for (int i = 0; i < g.num_walks(); ++i) {
      double sum = 0.0;
      for (int k = 0; k < g.degree(i); ++k) sum += x[g.offset(i) + k];
      for (int k = 0; k < g.degree(i); ++k) x[g.offset(i) + k] /= sum;
    }
    if (s % record_every == 0 || s == steps) path.push_back({s * dt, x});
  }
  return path;
}

// ---------------------------------------------------------------- randomness

inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the stream owned by one walk of one replica.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replica, std::uint64_t walk) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (replica + 0x632be59bd9b4e019ULL);
  std::uint64_t b = splitmix64(s);
  s = b ^ (walk * 0x8cb92ba72f3d8dd7ULL + 1);
  return splitmix64(s);
}

inline double unit_draw(std::mt19937_64& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------- process

struct WalkConfiguration {
  std::vector<VertexId> position;  // W^i(n); before the first step the lowest vertex of V^i
  std::uint64_t n = 0;
};

/// The coupled walks with their visit counts. X_v^i(n) = (1 + visits) / (d^i + n).
class Process {
 public:
  Process(const Model& model, std::uint64_t seed, std::uint64_t replica = 0)
      : m_(&model), visits_(model.dimension(), 0), x_(model.dimension()), w_(model.dimension()) {
    const auto& g = model.graph;
    for (int i = 0; i < g.num_walks(); ++i) {
      rng_.emplace_back(stream_seed(seed, replica, static_cast<std::uint64_t>(i)));
      cfg_.position.push_back(g.vertices(i).front());
    }
  }

  const WalkConfiguration& configuration() const { return cfg_; }
  std::uint64_t n() const { return cfg_.n; }
  const std::vector<std::uint64_t>& visits() const { return visits_; }

  StatePoint occupation() const {
    StatePoint x(visits_.size());
    fill_occupation(x.data());
    return x;
  }

  /// One synchronous move of every walk, each drawn from pi^i(X(n)) with its own stream.
  void step() {
    const auto& g = m_->graph;
    const double alpha = m_->params.alpha;
    fill_occupation(x_.data());
    for (std::size_t c = 0; c < x_.size(); ++c) {
      double b = m_->base(x_.data(), c);
      w_[c] = x_[c] * weight_from_base(b, alpha);
    }
    for (int i = 0; i < g.num_walks(); ++i) {
      std::size_t o = g.offset(i), d = g.degree(i);
      double total = 0.0;
      for (std::size_t c = o; c < o + d; ++c) total += w_[c];
      double u = unit_draw(rng_[i]) * total;
      std::size_t pick = o + d - 1;
      double acc = 0.0;
      for (std::size_t c = o; c < o + d; ++c) {
        acc += w_[c];
        if (u < acc) {
          pick = c;
          break;
        }
      }
      ++visits_[pick];
      cfg_.position[i] = g.vertex_of(pick);
    }
    ++cfg_.n;
  }

 private:
  void fill_occupation(double* x) const {
    const auto& g = m_->graph;
    for (int i = 0; i < g.num_walks(); ++i) {
      double inv = 1.0 / (static_cast<double>(g.degree(i)) + static_cast<double>(cfg_.n));
      std::size_t o = g.offset(i);
      for (int k = 0; k < g.degree(i); ++k) x[o + k] = (1.0 + static_cast<double>(visits_[o + k])) * inv;
    }
  }

  const Model* m_;
  WalkConfiguration cfg_;
  std::vector<std::uint64_t> visits_;
  std::vector<std::mt19937_64> rng_;
  std::vector<double> x_, w_;
};

/// ||X(n+1) - X(n) - (F(X(n)) + U(n)) gamma_n||_inf for one recorded step.
inline double sa_residual(const Model& m, const StatePoint& x_n, const StatePoint& x_next,
                          const std::vector<VertexId>& chosen, std::uint64_t n) {
  const auto& g = m.graph;
  auto p = transition_kernel(m, x_n);
  double r = 0.0;
  for (std::size_t c = 0; c < x_n.size(); ++c) {
    int i = g.walk_of(c);
    double gamma = 1.0 / (static_cast<double>(g.degree(i)) + static_cast<double>(n) + 1.0);
    double xi = chosen[i] == g.vertex_of(c) ? 1.0 : 0.0;
    double f = -x_n[c] + p[c];
    double u = xi - p[c];
    r = std::max(r, std::abs(x_next[c] - x_n[c] - (f + u) * gamma));
  }
  return r;
}

// ---------------------------------------------------------------- schedules and runs

/// Ascending, deduplicated recording steps within [0, n_steps].
struct Schedule {
  std::vector<std::uint64_t> steps;
  std::string description;

  static Schedule geometric(double base, std::uint64_t n_steps) {
    if (!(base > 1.0)) throw InvalidParameter("geometric schedule base must exceed 1");
    Schedule s;
    s.description = "geometric:" + trim_number(base);
    s.steps.push_back(0);
    for (double t = 1.0; std::ceil(t) <= static_cast<double>(n_steps); t *= base) {
      auto k = static_cast<std::uint64_t>(std::ceil(t - 1e-9));
      if (k > s.steps.back()) s.steps.push_back(k);
    }
    if (s.steps.back() != n_steps) s.steps.push_back(n_steps);
    return s;
  }

  static Schedule arithmetic(std::uint64_t stride, std::uint64_t n_steps) {
    if (stride == 0) throw InvalidParameter("arithmetic schedule stride must be positive");
    Schedule s;
    s.description = "arithmetic:" + std::to_string(stride);
    for (std::uint64_t k = 0; k <= n_steps; k += stride) s.steps.push_back(k);
    if (s.steps.back() != n_steps) s.steps.push_back(n_steps);
    return s;
  }

  static Schedule explicit_steps(std::vector<std::uint64_t> steps) {
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    Schedule s;
    s.steps = std::move(steps);
    s.description = "explicit";
    return s;
  }

  /// "geometric:1.2" or "arithmetic:1000".
  static Schedule parse(const std::string& text, std::uint64_t n_steps) {
    auto colon = text.find(':');
    std::string kind = text.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
      if (kind == "geometric") return geometric(arg.empty() ? 1.2 : std::stod(arg), n_steps);
      if (kind == "arithmetic") return arithmetic(arg.empty() ? 1000 : std::stoull(arg), n_steps);
    } catch (const std::logic_error&) {
    }
    throw ConfigError("unrecognised schedule '" + text + "'");
  }

 private:
  static std::string trim_number(double v) {
    std::string s = std::to_string(v);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
};

struct TrajectoryRecord {
  std::uint64_t n;
  StatePoint x;
  double overlap;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::uint64_t n_steps = 0;
  std::vector<std::uint64_t> schedule;
  std::vector<TrajectoryRecord> records;
  WalkConfiguration final_config;

  const StatePoint& final_state() const { return records.back().x; }
};

/// Deterministic in (model, n_steps, seed, replica); the schedule only selects what is kept.
inline Trajectory simulate(const Model& m, std::uint64_t n_steps, std::uint64_t seed,
                           const Schedule& schedule, std::uint64_t replica = 0) {
  Trajectory t;
  t.seed = seed;
  t.replica = replica;
  t.n_steps = n_steps;
  t.schedule = schedule.steps;
  Process p(m, seed, replica);
  auto next = schedule.steps.begin();
  auto record = [&] {
    auto x = p.occupation();
    double h = overlap(m.graph, x);
    t.records.push_back({p.n(), std::move(x), h});
  };
  while (next != schedule.steps.end() && *next == 0) {
    record();
    ++next;
  }
  for (std::uint64_t k = 1; k <= n_steps; ++k) {
    p.step();
    if (next != schedule.steps.end() && *next == k) {
      record();
      ++next;
    }
  }
  t.final_config = p.configuration();
  return t;
}

}  // namespace rvrw
