#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "aquafel/core.hpp"
#include "aquafel/surrogate.hpp"
#include "aquafel/worldmap.hpp"
#include "aquafel/zones.hpp"

namespace aquafel {

/// Local learner of one action zone.
struct ZoneNode {
  int zone = -1;
  std::vector<int> vehicles;
  std::vector<Sample> samples;
  std::size_t exploration_count = 0;
  GPModel model;

  bool serves(int vehicle) const { return std::find(vehicles.begin(), vehicles.end(), vehicle) != vehicles.end(); }
};

/// One node per zone, each seeded with the full exploration sample set.
inline std::vector<ZoneNode> init_nodes(std::span<const ActionZone> zones, std::span<const Sample> exploration_samples,
                                        const GpOptions& options) {
  if (zones.empty()) throw ConfigError("federated learning needs at least one zone");
  if (exploration_samples.empty()) throw ConfigError("federated learning needs exploration samples");
  const GPModel seed_model = fit(exploration_samples, options);
  std::vector<ZoneNode> nodes;
  nodes.reserve(zones.size());
  for (std::size_t z = 0; z < zones.size(); ++z) {
    ZoneNode node;
    node.zone = static_cast<int>(z);
    node.vehicles = zones[z].vehicles;
    node.samples.assign(exploration_samples.begin(), exploration_samples.end());
    node.exploration_count = exploration_samples.size();
    node.model = seed_model;
    nodes.push_back(std::move(node));
  }
  return nodes;
}

/// Appends samples from the node's own vehicles and refits once.
inline void node_ingest(ZoneNode& node, std::span<const Sample> batch, const GpOptions& options) {
  for (const auto& s : batch)
    if (!node.serves(s.taker))
      throw RoutingError("sample from vehicle " + std::to_string(s.taker) + " routed to zone " +
                         std::to_string(node.zone));
  if (batch.empty()) return;
  node.samples.insert(node.samples.end(), batch.begin(), batch.end());
  node.model = fit(node.samples, options);
}

inline void node_ingest(ZoneNode& node, const Sample& sample, const GpOptions& options) {
  node_ingest(node, std::span<const Sample>(&sample, 1), options);
}

struct ModelGrids {
  Field mean;
  Field std;
};

/// Overwrites the central grids with each node's grids inside that node's zone
/// disk. Earlier zones win where disks overlap; every other cell is untouched.
inline ModelGrids merge_models(const Field& central_mean, const Field& central_std, std::span<const ActionZone> zones,
                               std::span<const Field> node_means, std::span<const Field> node_stds,
                               const GridMap& map) {
  if (node_means.size() != zones.size() || node_stds.size() != zones.size())
    throw DimensionError("merge: one node grid per zone required");
  ModelGrids out{central_mean, central_std};
  const Grid<int> owner = zone_ownership(zones, map);
  for (int w : map.water_cells()) {
    const auto i = static_cast<std::size_t>(w);
    const int z = owner[i];
    if (z < 0) continue;
    out.mean[i] = node_means[static_cast<std::size_t>(z)][i];
    out.std[i] = node_stds[static_cast<std::size_t>(z)][i];
  }
  return out;
}

/// Predicts each node over its own zone and merges the results.
inline ModelGrids merge_nodes(const GridPrediction& central, std::span<const ActionZone> zones,
                              std::span<const ZoneNode> nodes, const GridMap& map) {
  std::vector<Field> means, stds;
  for (std::size_t z = 0; z < nodes.size(); ++z) {
    GridPrediction p = nodes[z].model.predict_cells(map, zone_cells(zones[z], map));
    means.push_back(std::move(p.mean));
    stds.push_back(std::move(p.std));
  }
  return merge_models(central.mean, central.std, zones, means, stds, map);
}

/// Single model over every sample, the centralized counterpart of the nodes.
inline GridPrediction centralized_exploitation(std::span<const Sample> exploration_samples,
                                               std::span<const Sample> exploitation_samples, const GridMap& map,
                                               const GpOptions& options) {
  std::vector<Sample> all(exploration_samples.begin(), exploration_samples.end());
  all.insert(all.end(), exploitation_samples.begin(), exploitation_samples.end());
  return fit(all, options).predict_grid(map);
}

struct FederatedReport {
  double federated_mse = 0.0;
  double centralized_mse = 0.0;
  double accuracy_delta = 0.0;
};

inline FederatedReport federated_report(double federated_mse, double centralized_mse) {
  return {federated_mse, centralized_mse, std::abs(federated_mse - centralized_mse)};
}

}  // namespace aquafel
