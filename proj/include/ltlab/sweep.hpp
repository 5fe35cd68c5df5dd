#pragma once

// Resumable, deterministic sweep harness. Each (gamma, I) point is computed
// independently (or warm-started along I), written to its own JSON file, and
// recorded in an atomically rewritten manifest; the final CSV is assembled
// from the point files in canonical order, so its bytes do not depend on the
// worker count or on whether the run was interrupted and resumed.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltlab/io.hpp"
#include "ltlab/parallel.hpp"
#include "ltlab/scf.hpp"

namespace ltlab {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Canonical identity of one point's computation; everything that can change
// the numbers is included (warm-started points additionally depend on their
// predecessors, which the sweep-level config snapshot pins down).
inline std::string point_config_string(const ScfConfig& cfg, bool warm) {
  const Lattice lat = make_lattice(cfg.lattice, cfg.dim);
  std::string s;
  s += "gamma=" + fmt(cfg.gamma);
  s += ";dim=" + std::to_string(cfg.dim);
  s += ";lattice=" + to_string(cfg.lattice);
  s += ";K=" + std::to_string(cfg.bands);
  s += ";I=" + fmt(cfg.norm);
  s += ";nc=" + std::to_string(cfg.n_cell_value());
  s += ";nb=" + std::to_string(cfg.n_bz_value());
  s += ";ecut=" + fmt(cfg.ecut_value(lat));
  s += ";tol=" + fmt(cfg.tol);
  s += ";max_iter=" + std::to_string(cfg.max_iter);
  s += ";init_width=" + fmt(cfg.init_width);
  s += ";init_perturb=" + fmt(cfg.init_perturb);
  s += ";seed=" + std::to_string(cfg.seed);
  s += ";mixing=" + fmt(cfg.mixing);
  s += ";warm=" + std::string(warm ? "1" : "0");
  return s;
}

inline std::string point_key(const ScfConfig& cfg, bool warm) {
  return hex16(fnv1a(point_config_string(cfg, warm)));
}

struct SweepPlan {
  ScfConfig base;  // gamma and norm are overridden per point
  std::vector<double> gamma_list;
  std::vector<double> norm_list;
  bool warm_start = false;
  std::filesystem::path out_dir = "lt-lab-out";
  unsigned jobs = 1;
  bool resume = false;
};

inline std::string sweep_config_string(const SweepPlan& plan) {
  ScfConfig c = plan.base;
  c.gamma = plan.gamma_list.empty() ? plan.base.gamma : plan.gamma_list.front();
  c.norm = plan.norm_list.empty() ? plan.base.norm : plan.norm_list.front();
  std::string s = "base{" + point_config_string(c, plan.warm_start) + "};gammas=";
  for (double g : plan.gamma_list) s += fmt(g) + ",";
  s += ";norms=";
  for (double I : plan.norm_list) s += fmt(I) + ",";
  return s;
}

struct SweepOutcome {
  int computed = 0;
  int skipped = 0;
  int failed = 0;
  int not_converged = 0;
  std::filesystem::path csv_path;
  bool ok() const { return failed == 0 && not_converged == 0; }
};

namespace detail {

struct ManifestState {
  std::string run_id;
  std::string config;
  std::set<std::string> completed;
};

inline std::string manifest_json(const ManifestState& m) {
  std::string s = "{\"schema\":\"lt-lab/manifest-v1\"";
  s += ",\"run_id\":\"" + m.run_id + "\"";
  s += ",\"config\":\"" + json_escape(m.config) + "\"";
  s += ",\"completed\":[";
  bool first = true;
  for (const std::string& k : m.completed) {
    if (!first) s += ',';
    s += '"' + k + '"';
    first = false;
  }
  s += "]}";
  return s;
}

inline ManifestState manifest_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ManifestState m;
  m.run_id = j.at("run_id").get<std::string>();
  m.config = j.at("config").get<std::string>();
  for (const auto& k : j.at("completed")) m.completed.insert(k.get<std::string>());
  return m;
}

}  // namespace detail

// Run the cross product gamma_list x norm_list (gamma-major canonical
// order). Wall-clock data stays out of the CSV, so reruns, resumes, and any
// worker count produce byte-identical results.csv.
inline SweepOutcome run_sweep(const SweepPlan& plan, std::ostream* log = nullptr) {
  if (plan.gamma_list.empty() || plan.norm_list.empty())
    throw std::invalid_argument("run_sweep: empty gamma or norm list");
  const std::filesystem::path points_dir = plan.out_dir / "points";
  const std::filesystem::path manifest_path = plan.out_dir / "manifest.json";
  std::filesystem::create_directories(points_dir);

  std::vector<ScfConfig> points;
  for (double g : plan.gamma_list) {
    for (double I : plan.norm_list) {
      ScfConfig c = plan.base;
      c.gamma = g;
      c.norm = I;
      c.validate();
      points.push_back(c);
    }
  }

  detail::ManifestState manifest;
  manifest.config = sweep_config_string(plan);
  manifest.run_id = hex16(fnv1a(manifest.config));
  if (plan.resume && std::filesystem::exists(manifest_path)) {
    detail::ManifestState prev = detail::manifest_from_json(read_file(manifest_path));
    if (prev.config != manifest.config)
      throw std::runtime_error(
          "run_sweep: manifest in " + plan.out_dir.string() +
          " belongs to a different sweep configuration; refusing to resume");
    manifest.completed = std::move(prev.completed);
  }
  atomic_write(manifest_path, detail::manifest_json(manifest));

  SweepOutcome outcome;
  std::mutex manifest_mutex;
  std::atomic<int> computed{0}, skipped{0};

  auto is_done = [&](const std::string& key) {
    return manifest.completed.count(key) != 0 &&
           std::filesystem::exists(points_dir / (key + ".json"));
  };
  auto mark_done = [&](const std::string& key) {
    std::lock_guard<std::mutex> lock(manifest_mutex);
    manifest.completed.insert(key);
    atomic_write(manifest_path, detail::manifest_json(manifest));
  };
  // The key always reflects the sweep mode: the head of a warm chain runs
  // from the default guess but is still a warm-mode point.
  auto compute_point = [&](const ScfConfig& cfg,
                           const PotentialField* warm) -> OptimizationResult {
    OptimizationResult r;
    try {
      r = optimize_point(cfg, warm);
    } catch (const std::exception& ex) {
      r = OptimizationResult{};
      r.config = cfg;
      r.failed = true;
      r.error = ex.what();
    }
    const std::string key = point_key(cfg, plan.warm_start);
    atomic_write(points_dir / (key + ".json"), result_json(r));
    mark_done(key);
    ++computed;
    if (log)
      *log << "point " << key << " gamma=" << cfg.gamma << " I=" << cfg.norm
           << (r.failed ? " FAILED: " + r.error
                        : " iters=" + std::to_string(r.iterations))
           << "\n";
    return r;
  };

  if (plan.warm_start) {
    // Chains along I must run in order; jobs are spent inside the eigensolves.
    for (std::size_t gi = 0; gi < plan.gamma_list.size(); ++gi) {
      std::optional<PotentialField> prev;
      for (std::size_t ni = 0; ni < plan.norm_list.size(); ++ni) {
        ScfConfig cfg = points[gi * plan.norm_list.size() + ni];
        cfg.jobs = plan.jobs;
        const std::string key = point_key(cfg, true);
        if (is_done(key)) {
          ++skipped;
          const nlohmann::json j =
              nlohmann::json::parse(read_file(points_dir / (key + ".json")));
          if (!j.at("failed").get<bool>())
            prev = potential_from_json(j.at("potential"));
          else
            prev.reset();
          continue;
        }
        OptimizationResult r = compute_point(cfg, prev ? &*prev : nullptr);
        if (!r.failed)
          prev = std::move(r.potential);
        else
          prev.reset();
      }
    }
  } else {
    // Independent points: parallel map, one worker per point.
    parallel_for(points.size(), plan.jobs, [&](std::size_t i) {
      ScfConfig cfg = points[i];
      cfg.jobs = 1;
      const std::string key = point_key(cfg, false);
      if (is_done(key)) {
        ++skipped;
        return;
      }
      compute_point(cfg, nullptr);
    });
  }
  outcome.computed = computed;
  outcome.skipped = skipped;

  // Assemble the CSV from the point files in canonical order.
  std::string csv = sweep_csv_header();
  for (const ScfConfig& cfg : points) {
    const std::string key = point_key(cfg, plan.warm_start);
    const nlohmann::json j =
        nlohmann::json::parse(read_file(points_dir / (key + ".json")));
    if (j.at("failed").get<bool>()) ++outcome.failed;
    else if (!j.at("converged").get<bool>()) ++outcome.not_converged;
    csv += sweep_csv_row(j);
  }
  outcome.csv_path = plan.out_dir / "results.csv";
  atomic_write(outcome.csv_path, csv);
  return outcome;
}

}  // namespace ltlab
