#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>

#include "aquafel/core.hpp"
#include "aquafel/mission.hpp"
#include "aquafel/worldmap.hpp"
#include "aquafel/zones.hpp"

namespace aquafel {

/// Six significant digits, the precision of every CSV this library writes.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Row-major matrix, one map row per line; land cells are written as -1.
inline std::string grid_csv(const Field& field, const GridMap& map) {
  if (field.rows() != map.rows() || field.cols() != map.cols()) throw DimensionError("grid_csv: shape mismatch");
  std::string out;
  out.reserve(field.size() * 9);
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      if (c > 0) out.push_back(',');
      out += map.is_water(r, c) ? format_number(field.at(r, c)) : "-1";
    }
    out.push_back('\n');
  }
  return out;
}

inline std::string trajectory_csv(std::span<const TrajectoryRow> rows) {
  std::string out = "step,vehicle,x,y,vx,vy,sampled\n";
  for (const auto& t : rows) {
    out += std::to_string(t.step) + ',' + std::to_string(t.vehicle) + ',' + format_number(t.position.x) + ',' +
           format_number(t.position.y) + ',' + format_number(t.velocity.x) + ',' + format_number(t.velocity.y) + ',' +
           (t.sampled ? "1" : "0") + '\n';
  }
  return out;
}

/// Assigned vehicles are listed space-separated in the last column.
inline std::string zones_csv(std::span<const ActionZone> zones) {
  std::string out = "zone_id,center_x,center_y,radius,peak_value,priority,vehicles\n";
  for (std::size_t z = 0; z < zones.size(); ++z) {
    const auto& zone = zones[z];
    std::string vehicles;
    for (int v : zone.vehicles) {
      if (!vehicles.empty()) vehicles.push_back(' ');
      vehicles += std::to_string(v);
    }
    out += std::to_string(z) + ',' + format_number(zone.center.x) + ',' + format_number(zone.center.y) + ',' +
           format_number(zone.radius_cells) + ',' + format_number(zone.peak_value) + ',' +
           std::to_string(zone.priority) + ',' + vehicles + '\n';
  }
  return out;
}

/// One mission's line of the report CSV.
struct MetricsRow {
  std::uint64_t seed = 0;
  Planner planner = Planner::aquafel;
  int n_vehicles = 0;
  double explore_km = 0.0;
  double exploit_km = 0.0;
  LearningMode learning_mode = LearningMode::federated;
  double mse_map = 0.0;
  double mse_zones = 0.0;
  double mean_peak_error = 0.0;
  std::size_t samples_taken = 0;
  double wall_ms = 0.0;
};

inline constexpr std::string_view kMetricsHeader =
    "seed,planner,n_vehicles,explore_km,exploit_km,learning_mode,mse_map,mse_zones,mean_peak_error,samples_taken,"
    "wall_ms\n";

inline std::string metrics_line(const MetricsRow& m) {
  return std::to_string(m.seed) + ',' + std::string(planner_name(m.planner)) + ',' + std::to_string(m.n_vehicles) +
         ',' + format_number(m.explore_km) + ',' + format_number(m.exploit_km) + ',' +
         std::string(learning_mode_name(m.learning_mode)) + ',' + format_number(m.mse_map) + ',' +
         format_number(m.mse_zones) + ',' + format_number(m.mean_peak_error) + ',' + std::to_string(m.samples_taken) +
         ',' + format_number(m.wall_ms) + '\n';
}

inline std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::string out(kMetricsHeader);
  for (const auto& r : rows) out += metrics_line(r);
  return out;
}

/// Plain-text grayscale raster: v in [0, 1] maps to round-half-up(v * 255),
/// values outside the range saturate, land is black.
inline std::string render_pgm(const Field& field, const GridMap& map) {
  if (field.rows() != map.rows() || field.cols() != map.cols()) throw DimensionError("render_pgm: shape mismatch");
  for (double v : field.data())
    if (!std::isfinite(v)) throw DimensionError("render_pgm: non-finite value in grid");
  std::string out = "P2\n" + std::to_string(map.cols()) + " " + std::to_string(map.rows()) + "\n255\n";
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      int px = 0;
      if (map.is_water(r, c)) px = static_cast<int>(std::floor(std::clamp(field.at(r, c), 0.0, 1.0) * 255.0 + 0.5));
      if (c > 0) out.push_back(' ');
      out += std::to_string(px);
    }
    out.push_back('\n');
  }
  return out;
}

/// Writes `content` to `path`, creating parent directories.
inline void write_text(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace aquafel
