#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "aquafel/core.hpp"
#include "aquafel/worldmap.hpp"
#include "aquafel/zones.hpp"

namespace aquafel {

namespace detail {
inline void require_shape(const Field& a, const Field& b, const GridMap& map) {
  if (!a.same_shape(b) || a.rows() != map.rows() || a.cols() != map.cols())
    throw DimensionError("metrics: grid shapes differ");
}
}  // namespace detail

/// Mean squared error over every water cell.
inline double mse_map(const Field& truth, const Field& estimate, const GridMap& map) {
  detail::require_shape(truth, estimate, map);
  double sum = 0.0;
  for (int w : map.water_cells()) {
    const double d = truth[static_cast<std::size_t>(w)] - estimate[static_cast<std::size_t>(w)];
    sum += d * d;
  }
  return sum / static_cast<double>(map.water_cells().size());
}

/// Mean squared error over the union of water cells inside the ground-truth zones.
inline double mse_action_zones(const Field& truth, const Field& estimate, std::span<const ActionZone> truth_zones,
                               const GridMap& map) {
  detail::require_shape(truth, estimate, map);
  if (truth_zones.empty()) throw ConfigError("mse_action_zones: no ground-truth zones");
  const Grid<int> owner = zone_ownership(truth_zones, map);
  double sum = 0.0;
  std::size_t count = 0;
  for (int w : map.water_cells()) {
    const auto i = static_cast<std::size_t>(w);
    if (owner[i] < 0) continue;
    const double d = truth[i] - estimate[i];
    sum += d * d;
    ++count;
  }
  return sum / static_cast<double>(count);
}

/// |truth - estimate| at each ground-truth zone's peak cell.
inline std::vector<double> peak_errors(const Field& truth, const Field& estimate,
                                       std::span<const ActionZone> truth_zones) {
  if (!truth.same_shape(estimate)) throw DimensionError("peak_errors: grid shapes differ");
  std::vector<double> out;
  out.reserve(truth_zones.size());
  for (const auto& z : truth_zones) {
    const auto i = static_cast<std::size_t>(z.center_cell);
    out.push_back(std::abs(truth[i] - estimate[i]));
  }
  return out;
}

/// Ground-truth action zones, built exactly like the planner's zones.
inline std::vector<ActionZone> truth_zones(const Field& truth, const GridMap& map, int n_vehicles) {
  const ZoneRadius radius = compute_zone_radius(map.shortest_length_m(), n_vehicles, map.cell_size_m());
  auto zones = extract_action_zones(truth, map, n_vehicles, radius.cells);
  assign_priorities(zones, n_vehicles);
  return zones;
}

struct MetricsReport {
  double mse_map = 0.0;
  double mse_action_zones = 0.0;
  std::vector<double> peak_errors;
  double mean_peak_error = 0.0;
};

inline MetricsReport evaluate(const Field& truth, const Field& estimate, const GridMap& map, int n_vehicles) {
  MetricsReport r;
  const auto zones = truth_zones(truth, map, n_vehicles);
  r.mse_map = mse_map(truth, estimate, map);
  r.mse_action_zones = mse_action_zones(truth, estimate, zones, map);
  r.peak_errors = peak_errors(truth, estimate, zones);
  r.mean_peak_error = std::accumulate(r.peak_errors.begin(), r.peak_errors.end(), 0.0) /
                      static_cast<double>(r.peak_errors.size());
  return r;
}

/// Sample mean with a normal-approximation 95% interval.
struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;
  double ci_half_width = 0.0;
  std::size_t n = 0;
};

inline Aggregate aggregate(std::span<const double> values) {
  if (values.size() < 2) throw ConfigError("aggregate needs at least two values");
  Aggregate a;
  a.n = values.size();
  const double n = static_cast<double>(a.n);
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - a.mean) * (v - a.mean);
  a.stddev = std::sqrt(ss / (n - 1.0));
  a.ci_half_width = 1.96 * a.stddev / std::sqrt(n);
  return a;
}

/// Per-metric aggregates of a batch of mission reports.
struct ReportAggregate {
  Aggregate mse_map;
  Aggregate mse_action_zones;
  Aggregate mean_peak_error;
};

inline ReportAggregate aggregate(std::span<const MetricsReport> reports) {
  if (reports.size() < 2) throw ConfigError("aggregate needs at least two reports");
  std::vector<double> map, zones, peak;
  for (const auto& r : reports) {
    map.push_back(r.mse_map);
    zones.push_back(r.mse_action_zones);
    peak.push_back(r.mean_peak_error);
  }
  return {aggregate(std::span<const double>(map)), aggregate(std::span<const double>(zones)),
          aggregate(std::span<const double>(peak))};
}

}  // namespace aquafel
