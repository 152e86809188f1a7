// rvrw: command-line front end for simulation, fixed-point analysis and the acceptance suite.

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rvrw/experiment.hpp"
#include "rvrw/io.hpp"
#include "rvrw/lyapunov.hpp"
#include "rvrw/testing/acceptance.hpp"

using namespace rvrw;

namespace {

enum Exit { kOk = 0, kFailure = 1, kIo = 2, kSize = 3 };

/// "N" or "N..M" (inclusive).
std::vector<RunId> parse_seeds(const std::string& text) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) return {{std::stoull(text), 0}};
    auto a = std::stoull(text.substr(0, dots)), b = std::stoull(text.substr(dots + 2));
    if (b < a) throw ConfigError("seed range '" + text + "' is empty");
    return ExperimentSpec::seed_range(a, b);
  } catch (const std::logic_error&) {
    throw ConfigError("bad seed range '" + text + "'");
  }
}

/// Writes to the named file, or stdout when the name is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << text)) throw IoError("cannot write " + path);
}

std::string point_cells(const StatePoint& x) {
  std::string s;
  for (std::size_t k = 0; k < x.size(); ++k) s += (k ? ";" : "") + fmt15(x[k]);
  return s;
}

std::string fixed_points_csv(const std::vector<FixedPointComponent>& comps) {
  std::ostringstream os;
  os << "component,support,kind,det,residual,condition,point\n";
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const auto& c = comps[k];
    os << k << ',' << csv_quote(c.support.to_string()) << ','
       << (c.kind == ComponentKind::isolated ? "isolated" : "continuum") << ',' << fmt15(c.determinant) << ','
       << fmt15(c.residual) << ',' << fmt15(c.condition) << ',' << point_cells(c.point) << '\n';
  }
  return os.str();
}

std::string lyapunov_csv(const Model& m, const std::vector<std::pair<double, StatePoint>>& path) {
  std::ostringstream os;
  os << "t_or_n,L,descent\n";
  for (const auto& [t, x] : path) {
    auto e = descent_value(m, x);
    os << fmt15(t) << ',' << fmt15(e.value) << ',' << fmt15(e.inner_product) << '\n';
  }
  return os.str();
}

std::vector<TrajectoryRecord> read_trajectory(const std::string& path, const GraphSystem& g) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  auto recs = read_trajectory_csv(in, g);
  if (recs.empty()) throw IoError(path + " holds no records");
  return recs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interacting vertex-reinforced random walks: simulation and fixed-point analysis"};
  app.require_subcommand(1);

  std::string config, out, format = "json", schedule = "geometric:1.2", seeds = "1";
  std::uint64_t steps = 0, replicas = 1;
  bool fp = false, stab = false, lyap = false, match = false, check_fd = false;
  double tol = 0.05, t_end = 50.0, dt = 0.01;
  std::size_t cap = kDefaultSupportCap;
  std::vector<std::string> trajectories;
  std::string start = "uniform", scale = "quick";
  std::uint64_t start_seed = 1;

  auto* sim = app.add_subcommand("simulate", "run seeded replicas and write trajectories");
  sim->add_option("--config", config, "system config (JSON)")->required();
  sim->add_option("--seed,--seeds", seeds, "seed N or inclusive range N..M")->capture_default_str();
  sim->add_option("--replicas", replicas, "replicas per seed (independent streams)")->capture_default_str();
  sim->add_option("--steps", steps, "steps per replica")->required();
  sim->add_option("--schedule", schedule, "geometric:BASE or arithmetic:STRIDE")->capture_default_str();
  sim->add_option("--out", out, "output directory")->required();
  sim->add_flag("--fixed-points", fp, "also write fixed_points.json");
  sim->add_flag("--stability", stab, "also write stability.json");
  sim->add_flag("--lyapunov", lyap, "also write L along each trajectory");
  sim->add_flag("--match", match, "also write match.csv");
  sim->add_option("--tol", tol, "match tolerance (inf-norm)")->capture_default_str();

  auto* fps = app.add_subcommand("fixed-points", "enumerate the fixed points of the kernel");
  fps->add_option("--config", config, "system config (JSON)")->required();
  fps->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  fps->add_option("--out", out, "output file (default stdout)");
  fps->add_option("--support-cap", cap, "largest dimension to enumerate")->capture_default_str();

  auto* st = app.add_subcommand("stability", "classify every fixed-point component");
  st->add_option("--config", config, "system config (JSON)")->required();
  st->add_option("--out", out, "output file (default stdout)");
  st->add_flag("--check-fd", check_fd, "compare the analytic Jacobian with finite differences");
  st->add_option("--support-cap", cap, "largest dimension to enumerate")->capture_default_str();

  auto* ly = app.add_subcommand("lyapunov", "evaluate L along a trajectory file or an RK4 flow");
  ly->add_option("--config", config, "system config (JSON)")->required();
  ly->add_option("--trajectory", trajectories, "trajectory CSV (omit to integrate the flow)");
  ly->add_option("--t-end", t_end, "flow horizon")->capture_default_str();
  ly->add_option("--dt", dt, "RK4 step")->capture_default_str();
  ly->add_option("--start", start, "uniform or random")->check(CLI::IsMember({"uniform", "random"}))->capture_default_str();
  ly->add_option("--seed", start_seed, "seed for a random start")->capture_default_str();
  ly->add_option("--out", out, "output file (default stdout)");

  auto* pr = app.add_subcommand("predict", "closed-form limit sets of a preset family");
  pr->add_option("--config", config, "preset config (JSON)")->required();
  pr->add_option("--out", out, "output file (default stdout)");

  auto* ma = app.add_subcommand("match", "compare trajectory endpoints with the predictions");
  ma->add_option("--config", config, "system config (JSON)")->required();
  ma->add_option("--trajectory", trajectories, "trajectory CSV files")->required();
  ma->add_option("--tol", tol, "tolerance (inf-norm)")->capture_default_str();
  ma->add_option("--out", out, "output file (default stdout)");

  auto* ac = app.add_subcommand("accept", "run the acceptance criteria");
  ac->add_option("--scale", scale, "quick or full")->check(CLI::IsMember({"quick", "full"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (*ac) {
      auto rs = testing::run_acceptance(scale == "full" ? testing::Scale::full : testing::Scale::quick, &std::cerr);
      testing::print_report(std::cout, rs);
      return testing::all_passed(rs) ? kOk : kFailure;
    }

    auto raw = read_json_file(config);
    auto cfg = load_config(raw);
    const Model& m = cfg.model;
    SolveOptions opt;
    opt.support_cap = cap;

    if (*sim) {
      ExperimentSpec spec;
      spec.config = raw;
      spec.n_steps = steps;
      for (const auto& id : parse_seeds(seeds)) {
        auto fan = ExperimentSpec::replicas(id.seed, replicas);
        spec.runs.insert(spec.runs.end(), fan.begin(), fan.end());
      }
      spec.schedule = schedule;
      spec.fixed_points = fp;
      spec.stability = stab;
      spec.lyapunov = lyap;
      spec.match = match;
      spec.match_tol = tol;
      spec.out = out;
      auto man = run_experiment(spec);
      std::cout << "wrote " << man.runs.size() << " trajectories to " << out << " (config " << man.config_hash.substr(0, 12)
                << ", " << fmt15(man.wall_seconds) << " s)\n";
      return kOk;
    }
    if (*fps) {
      auto comps = fixed_point_set(m, opt);
      if (format == "csv") {
        emit(out, fixed_points_csv(comps));
      } else {
        json a = json::array();
        for (const auto& c : comps) a.push_back(to_json(c));
        emit(out, a.dump(2) + "\n");
      }
      return kOk;
    }
    if (*st) {
      auto comps = fixed_point_set(m, opt);
      auto reps = classify(m, comps);
      json a = json::array();
      for (const auto& r : reps) {
        auto j = to_json(r);
        if (check_fd) {
          try {
            j["fd_max_abs_diff"] = sig15((jacobian(m, r.point) - jacobian_fd(m, r.point)).norm_inf());
          } catch (const DomainError&) {
            j["fd_max_abs_diff"] = nullptr;  // the stencil left the region where the kernel is defined
          }
        }
        a.push_back(j);
      }
      emit(out, a.dump(2) + "\n");
      return kOk;
    }
    if (*ly) {
      std::vector<std::pair<double, StatePoint>> path;
      if (!trajectories.empty()) {
        for (const auto& r : read_trajectory(trajectories.front(), m.graph)) path.push_back({double(r.n), r.x});
      } else {
        StatePoint x0 = uniform_state(m.graph);
        if (start == "random") {
          std::mt19937_64 rng(start_seed);
          x0 = testing::random_interior(m.graph, rng, 1e-3);
        }
        for (auto& s : integrate_flow(m, x0, t_end, dt, std::max(1, int(std::lround(0.1 / dt)))))
          path.push_back({s.t, s.x});
      }
      emit(out, lyapunov_csv(m, path));
      return kOk;
    }
    if (*pr) {
      if (!cfg.preset) throw ConfigError("predict needs a preset config without eta overrides");
      emit(out, to_json(predict(*cfg.preset)).dump(2) + "\n");
      return kOk;
    }
    if (*ma) {
      std::ostringstream os;
      os << "file,seed,replica,matched,distance,nearest,overlap,detail\n";
      std::optional<PredictedLimitSet> pred;
      std::vector<FixedPointComponent> comps;
      std::vector<StabilityReport> reps;
      if (cfg.preset) {
        pred = predict(*cfg.preset);
      } else {
        comps = fixed_point_set(m, opt);
        reps = classify(m, comps);
      }
      bool all = true;
      for (const auto& path : trajectories) {
        auto x = read_trajectory(path, m.graph).back().x;
        std::string seed = "", replica = "";
        auto side = std::filesystem::path(path).replace_extension(".json");
        if (std::filesystem::exists(side)) {
          auto j = read_json_file(side.string());
          seed = std::to_string(j.value("seed", 0ULL));
          replica = std::to_string(j.value("replica", 0ULL));
        }
        double h = overlap(m.graph, x);
        os << csv_quote(path) << ',' << seed << ',' << replica << ',';
        if (pred) {
          auto r = match_prediction(*pred, m.graph, x, tol);
          all = all && r.matched;
          os << (r.matched ? 1 : 0) << ',' << fmt15(r.distance) << ',' << csv_quote(r.nearest) << ',' << fmt15(h) << ','
             << csv_quote(r.detail) << '\n';
        } else {
          auto el = empirical_limit(m.graph, x, comps);
          bool ok = el.distance <= tol && !is_excluded(reps[el.component].classification);
          all = all && ok;
          os << (ok ? 1 : 0) << ',' << fmt15(el.distance) << ',' << csv_quote(comps[el.component].support.to_string())
             << ',' << fmt15(h) << ',' << to_string(reps[el.component].classification) << '\n';
        }
      }
      emit(out, os.str());
      return all ? kOk : kFailure;
    }
  } catch (const SizeGuard& e) {
    std::cerr << "size guard: " << e.what() << "\n";
    return kSize;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
