#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "case_studies.hpp"
#include "dynamics.hpp"
#include "fixed_points.hpp"
#include "io.hpp"
#include "lyapunov.hpp"
#include "stability.hpp"

namespace rvrw {

inline constexpr const char* kVersion = "1.0.0";

/// Worker count: RVRW_THREADS if set, otherwise the hardware concurrency, never more than the work.
inline unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RVRW_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

/// Runs fn(k) for k in [0, n) on a small pool; the first exception is rethrown after joining.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
  const unsigned workers = worker_count(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
}

struct RunId {
  std::uint64_t seed;
  std::uint64_t replica;
};

struct ExperimentSpec {
  json config;
  std::uint64_t n_steps = 0;
  std::vector<RunId> runs;
  std::string schedule = "geometric:1.2";
  bool fixed_points = false;
  bool stability = false;
  bool lyapunov = false;
  bool match = false;
  double match_tol = 0.05;
  std::filesystem::path out;

  /// Seeds first..last inclusive, replica 0 each.
  static std::vector<RunId> seed_range(std::uint64_t first, std::uint64_t last) {
    std::vector<RunId> r;
    for (std::uint64_t s = first; s <= last; ++s) r.push_back({s, 0});
    return r;
  }
  /// One seed fanned into n replicas with independent streams.
  static std::vector<RunId> replicas(std::uint64_t seed, std::uint64_t n) {
    if (n < 1) throw InvalidParameter("at least one replica is required");
    std::vector<RunId> r;
    for (std::uint64_t k = 0; k < n; ++k) r.push_back({seed, k});
    return r;
  }
};

struct RunOutput {
  RunId id;
  std::string csv;
  std::string sidecar;
  double seconds = 0.0;
  StatePoint final_state;
  std::vector<TrajectoryRecord> records;
};

struct RunManifest {
  std::string version = kVersion;
  std::string config_hash;
  std::string config_path;
  std::vector<RunOutput> runs;
  std::vector<std::string> reports;
  double wall_seconds = 0.0;
  unsigned threads = 1;

  json to_json() const {
    json rs = json::array();
    for (const auto& r : runs)
      rs.push_back({{"seed", r.id.seed},
                    {"replica", r.id.replica},
                    {"csv", r.csv},
                    {"sidecar", r.sidecar},
                    {"seconds", sig15(r.seconds)}});
    return json{{"version", version},    {"config_hash", config_hash}, {"config", config_path},
                {"runs", rs},            {"reports", reports},        {"wall_seconds", sig15(wall_seconds)},
                {"threads", threads}};
  }
};

inline std::string trajectory_basename(const RunId& id) {
  return "traj_seed" + std::to_string(id.seed) + "_rep" + std::to_string(id.replica);
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot write " + p.string());
  os << text;
  if (!os) throw IoError("write failed for " + p.string());
}

}  // namespace detail

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline RunManifest run_experiment(const ExperimentSpec& spec) {
  auto t0 = std::chrono::steady_clock::now();
  if (spec.runs.empty()) throw InvalidParameter("experiment needs at least one run");
  auto cfg = load_config(spec.config);
  const Model& model = cfg.model;
  auto schedule = Schedule::parse(spec.schedule, spec.n_steps);

  std::error_code ec;
  std::filesystem::create_directories(spec.out, ec);
  if (ec) throw IoError("cannot create " + spec.out.string() + ": " + ec.message());

  RunManifest man;
  man.config_hash = sha256_hex(cfg.canonical);
  man.config_path = "config.json";
  detail::write_text(spec.out / man.config_path, cfg.canonical);
  man.threads = worker_count(spec.runs.size());
  man.runs.resize(spec.runs.size());

  parallel_for(spec.runs.size(), [&](std::size_t k) {
    auto r0 = std::chrono::steady_clock::now();
    const RunId id = spec.runs[k];
    auto traj = simulate(model, spec.n_steps, id.seed, schedule, id.replica);
    RunOutput& out = man.runs[k];
    out.id = id;
    out.csv = trajectory_basename(id) + ".csv";
    out.sidecar = trajectory_basename(id) + ".json";
    std::ostringstream csv;
    write_trajectory_csv(csv, model.graph, traj);
    detail::write_text(spec.out / out.csv, csv.str());
    detail::write_text(spec.out / out.sidecar, sidecar_json(traj, man.config_hash, schedule.description).dump(2) + "\n");
    out.final_state = traj.final_state();
    out.records = std::move(traj.records);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - r0).count();
  });

  std::vector<FixedPointComponent> comps;
  if (spec.fixed_points || spec.stability || (spec.match && !cfg.preset)) comps = fixed_point_set(model);
  if (spec.fixed_points) {
    json a = json::array();
    for (const auto& c : comps) a.push_back(to_json(c));
    detail::write_text(spec.out / "fixed_points.json", a.dump(2) + "\n");
    man.reports.push_back("fixed_points.json");
  }
  std::vector<StabilityReport> reps;
  if (spec.stability || (spec.match && !cfg.preset)) reps = classify(model, comps);
  if (spec.stability) {
    json a = json::array();
    for (const auto& r : reps) a.push_back(to_json(r));
    detail::write_text(spec.out / "stability.json", a.dump(2) + "\n");
    man.reports.push_back("stability.json");
  }
  if (spec.lyapunov) {
    for (const auto& r : man.runs) {
      std::ostringstream os;
      os << "t_or_n,L,descent\n";
      for (const auto& rec : r.records) {
        auto e = descent_value(model, rec.x);
        os << rec.n << ',' << fmt15(e.value) << ',' << fmt15(e.inner_product) << '\n';
      }
      std::string name = "lyapunov_" + trajectory_basename(r.id) + ".csv";
      detail::write_text(spec.out / name, os.str());
      man.reports.push_back(name);
    }
  }
  if (spec.match) {
    std::ostringstream os;
    os << "seed,replica,matched,distance,nearest,overlap,detail\n";
    std::optional<PredictedLimitSet> pred;
    if (cfg.preset) pred = predict(*cfg.preset);
    for (const auto& r : man.runs) {
      double h = overlap(model.graph, r.final_state);
      if (pred) {
        auto mr = match_prediction(*pred, model.graph, r.final_state, spec.match_tol);
        os << r.id.seed << ',' << r.id.replica << ',' << (mr.matched ? 1 : 0) << ',' << fmt15(mr.distance) << ','
           << csv_quote(mr.nearest) << ',' << fmt15(h) << ',' << csv_quote(mr.detail) << '\n';
      } else {
        auto el = empirical_limit(model.graph, r.final_state, comps);
        bool ok = el.distance <= spec.match_tol && !is_excluded(reps[el.component].classification);
        os << r.id.seed << ',' << r.id.replica << ',' << (ok ? 1 : 0) << ',' << fmt15(el.distance) << ','
           << csv_quote(comps[el.component].support.to_string()) << ',' << fmt15(h) << ','
           << to_string(reps[el.component].classification) << '\n';
      }
    }
    detail::write_text(spec.out / "match.csv", os.str());
    man.reports.push_back("match.csv");
  }

  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::write_text(spec.out / "manifest.json", man.to_json().dump(2) + "\n");
  return man;
}

}  // namespace rvrw
