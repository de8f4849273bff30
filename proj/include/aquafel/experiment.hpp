#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aquafel/benchmark.hpp"
#include "aquafel/config.hpp"
#include "aquafel/io.hpp"
#include "aquafel/metrics.hpp"
#include "aquafel/mission.hpp"
#include "aquafel/worldmap.hpp"

namespace aquafel {

/// One mission of a batch.
struct MissionJob {
  Planner planner = Planner::aquafel;
  std::uint64_t seed = 0;
  int n_vehicles = 4;
  PhaseSplit split;
  LearningMode mode = LearningMode::federated;
};

/// The mission configuration for a job: the experiment's template with the job's
/// planner, seed, fleet size, phase split and learning mode.
inline MissionConfig mission_config(const ExperimentSpec& spec, const MissionJob& job) {
  MissionConfig cfg = spec.mission;
  cfg.planner = job.planner;
  cfg.seed = job.seed;
  cfg.n_vehicles = job.n_vehicles;
  cfg.exploration_distance_m = job.split.exploration_km * 1000.0;
  cfg.exploitation_distance_m = job.split.exploitation_km * 1000.0;
  cfg.learning_mode = job.mode;
  return cfg;
}

struct MissionOutcome {
  MetricsRow row;
  MissionResult result;
};

/// Generates the seed's ground truth and runs the job on it.
inline MissionOutcome run_job(const ExperimentSpec& spec, const GridMap& map, const MissionJob& job) {
  const MissionConfig cfg = mission_config(spec, job);
  const GroundTruth truth = generate_ground_truth(map, job.n_vehicles, job.seed, spec.truth);
  MissionOutcome out{{}, run_mission(cfg, truth, map)};
  auto& row = out.row;
  row.seed = job.seed;
  row.planner = job.planner;
  row.n_vehicles = job.n_vehicles;
  if (job.planner == Planner::aquafel) {
    row.explore_km = job.split.exploration_km;
    row.exploit_km = job.split.exploitation_km;
  } else {
    row.explore_km = cfg.max_distance_m / 1000.0;
    row.exploit_km = 0.0;
  }
  row.learning_mode = job.mode;
  row.mse_map = out.result.metrics.mse_map;
  row.mse_zones = out.result.metrics.mse_action_zones;
  row.mean_peak_error = out.result.metrics.mean_peak_error;
  row.samples_taken = out.result.samples.size();
  row.wall_ms = spec.record_time ? out.result.wall_ms : 0.0;
  return out;
}

/// Writes the fixed per-mission file set into `dir`.
inline void write_mission(const std::filesystem::path& dir, const MissionOutcome& m, const GridMap& map) {
  write_text(dir / "metrics.csv", metrics_csv(std::span<const MetricsRow>(&m.row, 1)));
  write_text(dir / "mean.csv", grid_csv(m.result.final_mean, map));
  write_text(dir / "std.csv", grid_csv(m.result.final_std, map));
  write_text(dir / "traj.csv", trajectory_csv(m.result.trajectories));
  write_text(dir / "zones.csv", zones_csv(m.result.zones));
  write_text(dir / "mean.pgm", render_pgm(m.result.final_mean, map));
  write_text(dir / "std.pgm", render_pgm(m.result.final_std, map));
}

/// Aggregated line of a comparison, sweep or learning-mode table.
struct SummaryRow {
  std::string label;
  int n_vehicles = 0;
  PhaseSplit split;
  LearningMode mode = LearningMode::federated;
  ReportAggregate metrics;
  double mean_samples = 0.0;
};

inline std::string summary_csv(std::span<const SummaryRow> rows) {
  std::string out =
      "label,n_vehicles,explore_km,exploit_km,learning_mode,runs,mse_map_mean,mse_map_sd,mse_map_ci95,"
      "mse_zones_mean,mse_zones_sd,mse_zones_ci95,peak_error_mean,peak_error_sd,peak_error_ci95,samples_mean\n";
  for (const auto& r : rows) {
    out += r.label + ',' + std::to_string(r.n_vehicles) + ',' + format_number(r.split.exploration_km) + ',' +
           format_number(r.split.exploitation_km) + ',' + std::string(learning_mode_name(r.mode)) + ',' +
           std::to_string(r.metrics.mse_map.n);
    for (const Aggregate* a : {&r.metrics.mse_map, &r.metrics.mse_action_zones, &r.metrics.mean_peak_error})
      out += ',' + format_number(a->mean) + ',' + format_number(a->stddev) + ',' + format_number(a->ci_half_width);
    out += ',' + format_number(r.mean_samples) + '\n';
  }
  return out;
}

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<SummaryRow> summary;
};

/// Called after every finished mission, e.g. for progress output.
using ProgressFn = std::function<void(const MetricsRow&)>;

namespace detail {

inline std::string split_tag(int n, const PhaseSplit& s) {
  return "n" + std::to_string(n) + "_" + format_number(s.exploration_km) + "-" + format_number(s.exploitation_km) + "km";
}

/// Runs every seed of one job template, optionally writing each mission to
/// <root>/<planner>/<seed>/, and aggregates the batch.
inline SummaryRow run_batch(const ExperimentSpec& spec, const GridMap& map, MissionJob job, std::string label,
                            const std::optional<std::filesystem::path>& root, std::vector<MetricsRow>& rows,
                            const ProgressFn& progress) {
  std::vector<MetricsReport> reports;
  double samples = 0.0;
  for (int k = 0; k < spec.seed_count; ++k) {
    job.seed = spec.seed_start + static_cast<std::uint64_t>(k);
    MissionOutcome m = run_job(spec, map, job);
    if (root) write_mission(*root / std::string(planner_name(job.planner)) / std::to_string(job.seed), m, map);
    reports.push_back(m.result.metrics);
    samples += static_cast<double>(m.row.samples_taken);
    rows.push_back(m.row);
    if (progress) progress(m.row);
  }
  return {std::move(label), job.n_vehicles, job.split, job.mode, aggregate(std::span<const MetricsReport>(reports)),
          samples / static_cast<double>(spec.seed_count)};
}

inline void require_batch(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.seed_count < 2) throw ConfigError("aggregation needs at least two seeds");
}

inline PhaseSplit mission_split(const ExperimentSpec& spec) {
  return {spec.mission.exploration_distance_m / 1000.0, spec.mission.exploitation_distance_m / 1000.0};
}

}  // namespace detail

/// Single mission; writes <dir>/<planner>/<seed>/ when `dir` is given.
inline MissionOutcome run_single(const ExperimentSpec& spec, const GridMap& map,
                                 const std::optional<std::filesystem::path>& dir) {
  validate(spec);
  const MissionJob job{spec.mission.planner, spec.mission.seed, spec.mission.n_vehicles, detail::mission_split(spec),
                       spec.mission.learning_mode};
  MissionOutcome m = run_job(spec, map, job);
  if (dir) write_mission(*dir / std::string(planner_name(job.planner)) / std::to_string(job.seed), m, map);
  return m;
}

/// Every planner on the same seeds: same map, truth and spawns per seed.
inline ExperimentResult run_compare(const ExperimentSpec& spec, const GridMap& map,
                                    const std::optional<std::filesystem::path>& dir, const ProgressFn& progress = {}) {
  detail::require_batch(spec);
  if (spec.planners.size() < 2) throw ConfigError("compare needs at least two planners");
  ExperimentResult out;
  for (Planner p : spec.planners) {
    const MissionJob job{p, 0, spec.mission.n_vehicles, detail::mission_split(spec), spec.mission.learning_mode};
    out.summary.push_back(detail::run_batch(spec, map, job, std::string(planner_name(p)), dir, out.rows, progress));
  }
  if (dir) {
    write_text(*dir / "metrics.csv", metrics_csv(out.rows));
    write_text(*dir / "compare.csv", summary_csv(out.summary));
  }
  return out;
}

/// AquaFeL over every (fleet size, phase split) pair.
inline ExperimentResult run_sweep(const ExperimentSpec& spec, const GridMap& map,
                                  const std::optional<std::filesystem::path>& dir, const ProgressFn& progress = {}) {
  detail::require_batch(spec);
  validate_splits(spec.splits);
  ExperimentResult out;
  for (int n : spec.fleet_sizes) {
    for (const auto& split : spec.splits) {
      const MissionJob job{Planner::aquafel, 0, n, split, spec.mission.learning_mode};
      const std::string tag = detail::split_tag(n, split);
      std::optional<std::filesystem::path> sub;
      if (dir) sub = *dir / tag;
      out.summary.push_back(detail::run_batch(spec, map, job, tag, sub, out.rows, progress));
    }
  }
  if (dir) {
    write_text(*dir / "metrics.csv", metrics_csv(out.rows));
    write_text(*dir / "sweep.csv", summary_csv(out.summary));
    // one row per (fleet, exploration km), total km across, "mean ± ci" cells
    std::map<double, bool> totals;
    for (const auto& r : out.summary) totals[r.split.exploration_km + r.split.exploitation_km] = true;
    std::string table = "n_vehicles,exploration_km";
    for (const auto& [t, _] : totals) table += ",total_" + format_number(t) + "km";
    table += '\n';
    for (int n : spec.fleet_sizes) {
      std::map<double, std::map<double, std::string>> grid;
      for (const auto& r : out.summary) {
        if (r.n_vehicles != n) continue;
        grid[r.split.exploration_km][r.split.exploration_km + r.split.exploitation_km] =
            format_number(r.metrics.mse_map.mean) + " ± " + format_number(r.metrics.mse_map.ci_half_width);
      }
      for (const auto& [e, cells] : grid) {
        table += std::to_string(n) + ',' + format_number(e);
        for (const auto& [t, _] : totals) {
          table += ',';
          if (auto it = cells.find(t); it != cells.end()) table += it->second;
        }
        table += '\n';
      }
    }
    write_text(*dir / "sweep_table.csv", table);
  }
  return out;
}

/// AquaFeL with federated and with centralized learning on the same seeds.
inline ExperimentResult run_fedcmp(const ExperimentSpec& spec, const GridMap& map,
                                   const std::optional<std::filesystem::path>& dir, const ProgressFn& progress = {}) {
  detail::require_batch(spec);
  ExperimentResult out;
  for (LearningMode mode : {LearningMode::federated, LearningMode::centralized}) {
    const MissionJob job{Planner::aquafel, 0, spec.mission.n_vehicles, detail::mission_split(spec), mode};
    std::optional<std::filesystem::path> sub;
    if (dir) sub = *dir / std::string(learning_mode_name(mode));
    out.summary.push_back(
        detail::run_batch(spec, map, job, std::string(learning_mode_name(mode)), sub, out.rows, progress));
  }
  if (dir) {
    write_text(*dir / "metrics.csv", metrics_csv(out.rows));
    write_text(*dir / "fedcmp.csv", summary_csv(out.summary));
    const auto& f = out.summary[0].metrics;
    const auto& c = out.summary[1].metrics;
    std::string delta = "metric,federated,centralized,abs_delta\n";
    auto line = [&](const char* name, const Aggregate& a, const Aggregate& b) {
      delta += std::string(name) + ',' + format_number(a.mean) + ',' + format_number(b.mean) + ',' +
               format_number(std::abs(a.mean - b.mean)) + '\n';
    };
    line("mse_map", f.mse_map, c.mse_map);
    line("mse_zones", f.mse_action_zones, c.mse_action_zones);
    line("mean_peak_error", f.mean_peak_error, c.mean_peak_error);
    write_text(*dir / "fedcmp_delta.csv", delta);
  }
  return out;
}

/// Loads the experiment's map at its cell size.
inline GridMap load_spec_map(const ExperimentSpec& spec) { return load_map(spec.map_path, spec.cell_size_m); }

}  // namespace aquafel
