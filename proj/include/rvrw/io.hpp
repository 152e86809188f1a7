#pragma once

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "case_studies.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "fixed_points.hpp"
#include "graph_model.hpp"
#include "json.hpp"
#include "stability.hpp"

namespace rvrw {

using json = nlohmann::json;

/// Round to 15 significant digits so every emitted number carries at most that many.
inline double sig15(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::strtod(buf, nullptr);
}

inline std::string fmt15(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// ---------------------------------------------------------------- configs

struct PresetInfo {
  Family family;
  int size;
  double epsilon = 0.0;
  double eta = 0.0;
  double alpha = 1.0;
  double eta_tilde = 0.0;
};

struct LoadedConfig {
  Model model;
  std::optional<PresetInfo> preset;
  std::string canonical;  // compact, key-sorted JSON text the hash is taken over
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

inline std::vector<SystemSpec::EtaOverride> eta_overrides(const json& j) {
  std::vector<SystemSpec::EtaOverride> out;
  for (const auto& o : j) out.push_back({o.at("walk").get<int>() - 1, o.at("vertex").get<int>(), o.at("value").get<double>()});
  return out;
}

inline Family family_from(const std::string& s) {
  if (s == "complete") return Family::complete;
  if (s == "star") return Family::star;
  if (s == "star_pref") return Family::star_pref;
  if (s == "cycle") return Family::cycle;
  throw ConfigError("unknown preset family '" + s + "'");
}

}  // namespace detail

inline LoadedConfig load_config(const json& j) {
  LoadedConfig out;
  out.canonical = j.dump();
  try {
    if (j.contains("preset")) {
      const auto& p = j.at("preset");
      PresetInfo info;
      info.family = detail::family_from(p.at("family").get<std::string>());
      info.alpha = detail::get_or(p, "alpha", 1.0);
      auto overrides = p.contains("eta_overrides") ? detail::eta_overrides(p.at("eta_overrides"))
                                                   : std::vector<SystemSpec::EtaOverride>{};
      switch (info.family) {
        case Family::complete:
          info.size = p.at("kappa").get<int>();
          info.epsilon = detail::get_or(p, "epsilon", 0.0);
          info.eta = p.at("eta").get<double>();
          out.model = preset_complete(info.size, info.epsilon, info.eta, info.alpha, overrides);
          break;
        case Family::star:
          info.size = p.at("m").get<int>();
          info.epsilon = detail::get_or(p, "epsilon", 0.0);
          info.eta = p.at("eta").get<double>();
          out.model = preset_star(info.size, info.epsilon, info.eta, info.alpha, overrides);
          break;
        case Family::star_pref:
          info.size = 2;
          info.eta = p.at("eta").get<double>();
          info.eta_tilde = p.at("eta_tilde").get<double>();
          out.model = preset_star_preferences(info.eta, info.eta_tilde, info.alpha);
          break;
        case Family::cycle:
          info.size = p.at("m").get<int>();
          info.epsilon = detail::get_or(p, "epsilon", 0.0);
          info.eta = p.at("eta").get<double>();
          out.model = preset_cycle(info.size, info.epsilon, info.eta, info.alpha, overrides);
          break;
      }
      if (!overrides.empty() && info.family != Family::star_pref) {
        // a preset with overrides has no closed-form prediction attached
      } else {
        out.preset = info;
      }
      return out;
    }
    SystemSpec s;
    for (const auto& w : j.at("walks")) s.walks.push_back(w.at("vertices").get<std::vector<VertexId>>());
    s.alpha = detail::get_or(j, "alpha", 1.0);
    if (j.contains("eta")) {
      const auto& e = j.at("eta");
      if (e.is_number()) {
        s.eta_default = e.get<double>();
      } else {
        s.eta_default = detail::get_or(e, "default", 1.0);
        if (e.contains("overrides")) s.eta_overrides = detail::eta_overrides(e.at("overrides"));
      }
    }
    if (j.contains("rho")) {
      const auto& r = j.at("rho");
      s.rho_pairwise = detail::get_or(r, "pairwise", 0.0);
      s.rho_self = detail::get_or(r, "self", 0.0);
      if (r.contains("overrides"))
        for (const auto& o : r.at("overrides")) {
          int wi = o.at("walk_i").get<int>() - 1, wj = o.at("walk_j").get<int>() - 1;
          VertexId v = o.at("vertex").get<int>();
          double val = o.at("value").get<double>();
          s.rho_overrides.push_back({v, wi, wj, val});
          if (detail::get_or(o, "symmetric", true) && wi != wj) s.rho_overrides.push_back({v, wj, wi, val});
        }
    }
    auto mode = detail::get_or<std::string>(j, "validation", "strict") == "relaxed" ? Validation::relaxed
                                                                                   : Validation::strict;
    out.model = build_system(s, mode);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline LoadedConfig load_config_file(const std::string& path) { return load_config(read_json_file(path)); }

inline std::string sha256_hex(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, text.data(), text.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("SHA-256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return os.str();
}

// ---------------------------------------------------------------- trajectories

inline void write_trajectory_csv(std::ostream& os, const GraphSystem& g, const Trajectory& t) {
  os << "n,walk,vertex,occupation,overlap\n";
  for (const auto& r : t.records) {
    std::string h = fmt15(r.overlap);
    for (std::size_t c = 0; c < r.x.size(); ++c)
      os << r.n << ',' << g.walk_of(c) + 1 << ',' << g.vertex_of(c) << ',' << fmt15(r.x[c]) << ',' << h << '\n';
  }
}

inline std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& in, const GraphSystem& g) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,walk,vertex,occupation,overlap", 0) != 0)
    throw IoError("trajectory CSV header missing");
  std::vector<TrajectoryRecord> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string f[5];
    for (auto& s : f)
      if (!std::getline(ls, s, ',')) throw IoError("short trajectory CSV row: " + line);
    try {
      std::uint64_t n = std::stoull(f[0]);
      int walk = std::stoi(f[1]) - 1;
      VertexId v = std::stoi(f[2]);
      if (out.empty() || out.back().n != n) out.push_back({n, StatePoint(g.dimension(), 0.0), std::stod(f[4])});
      if (walk < 0 || walk >= g.num_walks() || !g.contains(walk, v)) throw IoError("row outside the system: " + line);
      out.back().x[g.coord(walk, v)] = std::stod(f[3]);
    } catch (const std::logic_error&) {
      throw IoError("unparsable trajectory CSV row: " + line);
    }
  }
  return out;
}

inline json sidecar_json(const Trajectory& t, const std::string& params_hash, const std::string& schedule) {
  json positions = json::array();
  for (VertexId v : t.final_config.position) positions.push_back(v);
  return json{{"seed", t.seed},
              {"replica", t.replica},
              {"params_hash", params_hash},
              {"n_steps", t.n_steps},
              {"schedule", schedule},
              {"recorded", t.records.size()},
              {"final_positions", positions}};
}

// ---------------------------------------------------------------- reports

inline json to_json(const StatePoint& x) {
  json a = json::array();
  for (double v : x) a.push_back(sig15(v));
  return a;
}

inline json to_json(const SupportProfile& s) {
  json a = json::array();
  for (const auto& si : s.sets) a.push_back(si);
  return a;
}

inline json to_json(const FixedPointComponent& c) {
  json j{{"support", to_json(c.support)},
         {"kind", c.kind == ComponentKind::isolated ? "isolated" : "continuum"},
         {"det", sig15(c.determinant)},
         {"residual", std::isfinite(c.residual) ? json(sig15(c.residual)) : json(nullptr)}};
  if (c.kind == ComponentKind::isolated) {
    j["point"] = to_json(c.point);
    j["condition"] = sig15(c.condition);
    j["ill_conditioned"] = c.ill_conditioned;
  } else {
    j["base"] = to_json(c.point);
    json b = json::array();
    for (const auto& v : c.directions) b.push_back(to_json(v));
    j["basis"] = b;
    j["unclassified"] = c.unclassified;
  }
  return j;
}

inline json to_json(const StabilityReport& r) {
  json ev = json::array();
  for (auto l : r.eigenvalues) ev.push_back({sig15(l.real()), sig15(l.imag())});
  json j{{"component", r.component},
         {"point", to_json(r.point)},
         {"classification", to_string(r.classification)},
         {"informational", r.continuum},
         {"eigenvalues", ev},
         {"neutral_eigenvalues", r.neutral_eigenvalues}};
  if (r.interior) j["interior"] = {{"verdict", to_string(r.interior->verdict)}, {"max_real", sig15(r.interior->max_real)}};
  json b = json::array();
  for (const auto& x : r.boundary)
    b.push_back({{"walk", x.walk + 1}, {"vertex", x.vertex}, {"ratio", sig15(x.ratio)}, {"verdict", to_string(x.verdict)}});
  j["boundary"] = b;
  return j;
}

inline json to_json(const PredictedLimitSet& p) {
  json pts = json::array();
  for (const auto& x : p.points) pts.push_back({{"label", x.label}, {"point", to_json(x.point)}});
  json j{{"family", to_string(p.family)},
         {"size", p.size},
         {"epsilon", p.epsilon},
         {"eta", p.eta},
         {"alpha", p.alpha},
         {"points", pts},
         {"descriptions", p.descriptions},
         {"warnings", p.warnings}};
  if (p.family == Family::star_pref) j["eta_tilde"] = p.eta_tilde;
  if (p.overlap_limit) j["overlap_limit"] = sig15(*p.overlap_limit);
  if (p.overlap_bound) j["overlap_bound"] = sig15(*p.overlap_bound);
  return j;
}

inline PredictedLimitSet predict(const PresetInfo& p) {
  switch (p.family) {
    case Family::complete: return complete_limits(p.size, p.epsilon, p.eta, p.alpha);
    case Family::star: return star_limits(p.size, p.epsilon, p.eta, p.alpha);
    case Family::star_pref: return star_pref_limits(p.eta, p.eta_tilde, p.alpha);
    default: return cycle_limits(p.size, p.epsilon, p.eta, p.alpha);
  }
}

}  // namespace rvrw
