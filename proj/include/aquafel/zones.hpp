#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "aquafel/core.hpp"
#include "aquafel/worldmap.hpp"

namespace aquafel {

/// Fraction of the model maximum a cell must reach to seed an action zone.
inline constexpr double kZoneThreshold = 0.33;

struct ActionZone {
  Vec2 center;
  int center_cell = -1;
  double radius_cells = 0.0;
  double peak_value = 0.0;
  int priority = 0;
  std::vector<int> vehicles;

  /// Open disk: cells strictly closer than the radius belong to the zone.
  bool contains(Vec2 p) const { return distance(p, center) < radius_cells; }
};

struct ZoneRadius {
  double meters = 0.0;
  double cells = 0.0;
};

/// rad = shortest lake length / fleet size.
inline ZoneRadius compute_zone_radius(double length_m, int n_vehicles, double cell_size_m = 100.0) {
  if (n_vehicles < 1) throw ConfigError("zone radius needs at least one vehicle");
  const double m = length_m / n_vehicles;
  return {m, m / cell_size_m};
}

inline int max_priority(int n_vehicles) { return n_vehicles * 10 + 10; }

/// Repeatedly takes the highest cell at or above 33% of the model maximum that
/// lies outside every existing zone, until n_vehicles zones exist or no cell
/// qualifies. Zones come out in descending peak order.
inline std::vector<ActionZone> extract_action_zones(const Field& model, const GridMap& map, int n_vehicles,
                                                    double radius_cells) {
  if (model.rows() != map.rows() || model.cols() != map.cols()) throw DimensionError("zones: shape mismatch");
  double top = -std::numeric_limits<double>::infinity();
  for (int w : map.water_cells()) top = std::max(top, model[static_cast<std::size_t>(w)]);
  const double threshold = kZoneThreshold * top;

  std::vector<ActionZone> zones;
  while (static_cast<int>(zones.size()) < n_vehicles) {
    int best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int w : map.water_cells()) {
      const double v = model[static_cast<std::size_t>(w)];
      if (v < threshold || v <= best_val) continue;
      const Vec2 p = map.cell_center(w);
      const bool covered = std::any_of(zones.begin(), zones.end(), [&](const ActionZone& z) { return z.contains(p); });
      if (covered) continue;
      best = w;
      best_val = v;
    }
    if (best < 0) break;
    ActionZone z;
    z.center_cell = best;
    z.center = map.cell_center(best);
    z.radius_cells = radius_cells;
    z.peak_value = best_val;
    zones.push_back(std::move(z));
  }
  return zones;
}

/// Highest peak gets n*10+10, each following zone 10 less.
inline void assign_priorities(std::vector<ActionZone>& zones, int n_vehicles) {
  std::stable_sort(zones.begin(), zones.end(),
                   [](const ActionZone& a, const ActionZone& b) { return a.peak_value > b.peak_value; });
  int prt = max_priority(n_vehicles);
  for (auto& z : zones) {
    z.priority = prt;
    prt -= 10;
  }
}

/// Assigns every vehicle to a zone and records it in zone.vehicles; returns the
/// zone index per vehicle.
///
/// Round one: zones in descending priority each take their nearest free
/// vehicle. Afterwards each free vehicle goes to the zone with the highest
/// working priority, which then takes its nearest free vehicle. Every
/// assignment costs the zone 10 points. Ties in working priority go to the zone
/// with fewer vehicles, then to the earlier zone.
inline std::vector<int> allocate_vehicles(std::vector<ActionZone>& zones, std::span<const Vec2> positions) {
  if (zones.empty()) throw ConfigError("allocation needs at least one zone");
  if (zones.size() > positions.size()) throw ConfigError("more zones than vehicles");

  std::vector<int> assignment(positions.size(), -1);
  std::vector<int> working(zones.size());
  for (std::size_t z = 0; z < zones.size(); ++z) {
    working[z] = zones[z].priority;
    zones[z].vehicles.clear();
  }

  auto nearest_free = [&](std::size_t z) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < positions.size(); ++v) {
      if (assignment[v] >= 0) continue;
      const double d = distance(positions[v], zones[z].center);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(v);
      }
    }
    return best;
  };
  auto take = [&](std::size_t z) {
    const int v = nearest_free(z);
    assignment[static_cast<std::size_t>(v)] = static_cast<int>(z);
    zones[z].vehicles.push_back(v);
    working[z] -= 10;
  };

  std::vector<std::size_t> by_priority(zones.size());
  for (std::size_t z = 0; z < zones.size(); ++z) by_priority[z] = z;
  std::stable_sort(by_priority.begin(), by_priority.end(),
                   [&](std::size_t a, std::size_t b) { return zones[a].priority > zones[b].priority; });
  for (std::size_t z : by_priority) take(z);

  for (std::size_t remaining = positions.size() - zones.size(); remaining > 0; --remaining) {
    std::size_t pick = 0;
    for (std::size_t z = 1; z < zones.size(); ++z) {
      if (working[z] > working[pick] ||
          (working[z] == working[pick] && zones[z].vehicles.size() < zones[pick].vehicles.size()))
        pick = z;
    }
    take(pick);
  }
  return assignment;
}

/// Owning zone per cell (-1 for none). Only water cells are claimed; where
/// disks overlap the earlier zone keeps the cell.
inline Grid<int> zone_ownership(std::span<const ActionZone> zones, const GridMap& map) {
  Grid<int> owner(map.rows(), map.cols(), -1);
  for (int w : map.water_cells()) {
    const Vec2 p = map.cell_center(w);
    for (std::size_t z = 0; z < zones.size(); ++z) {
      if (zones[z].contains(p)) {
        owner[static_cast<std::size_t>(w)] = static_cast<int>(z);
        break;
      }
    }
  }
  return owner;
}

/// Water cells inside zone z's disk (including cells another zone also covers).
inline std::vector<int> zone_cells(const ActionZone& zone, const GridMap& map) {
  std::vector<int> cells;
  for (int w : map.water_cells())
    if (zone.contains(map.cell_center(w))) cells.push_back(w);
  return cells;
}

}  // namespace aquafel
