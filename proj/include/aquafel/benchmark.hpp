#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "aquafel/core.hpp"
#include "aquafel/rng.hpp"
#include "aquafel/worldmap.hpp"

namespace aquafel {

/// Shekel function: sum_i 1 / (c_i + |x - a_i|^2).
inline double shekel_eval(std::span<const Vec2> peaks, std::span<const double> weights, Vec2 x) {
  if (peaks.size() != weights.size()) throw DimensionError("shekel: peak and weight counts differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    if (!(weights[i] > 0.0)) throw DimensionError("shekel: weights must be positive");
    sum += 1.0 / (weights[i] + (x - peaks[i]).squared_norm());
  }
  return sum;
}

/// Min-max normalizes the water cells of `raw` into [0, 1]; land cells get kLandSentinel.
inline Field normalize_field(const Field& raw, const GridMap& map) {
  if (raw.rows() != map.rows() || raw.cols() != map.cols()) throw DimensionError("normalize: shape mismatch");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int w : map.water_cells()) {
    lo = std::min(lo, raw[static_cast<std::size_t>(w)]);
    hi = std::max(hi, raw[static_cast<std::size_t>(w)]);
  }
  if (!(hi > lo)) throw DegenerateFieldError("normalize: field is constant over water");
  Field out(raw.rows(), raw.cols(), kLandSentinel);
  const double span = hi - lo;
  for (int w : map.water_cells()) {
    const auto i = static_cast<std::size_t>(w);
    out[i] = (raw[i] - lo) / span;
  }
  return out;
}

struct GroundTruthOptions {
  double c_min = 0.05;
  double c_max = 0.25;
  /// Cells per unit of the Shekel input domain. The function is evaluated at
  /// (cell coordinate / coordinate_scale); 100 maps the bundled lake's shortest
  /// extent onto one unit, which gives peaks a few kilometres wide.
  double coordinate_scale = 100.0;
};

struct GroundTruth {
  std::vector<Vec2> peaks;  ///< cell coordinates (cell centers)
  std::vector<double> weights;
  Field field;  ///< normalized; land = kLandSentinel
  int peak_count = 0;
  double raw_min = 0.0;
  double raw_max = 0.0;
  double coordinate_scale = 1.0;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Raw (unnormalized) Shekel value at a cell-coordinate position.
inline double raw_truth(const GroundTruth& truth, Vec2 p) {
  std::vector<Vec2> scaled(truth.peaks.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = (1.0 / truth.coordinate_scale) * truth.peaks[i];
  return shekel_eval(scaled, truth.weights, (1.0 / truth.coordinate_scale) * p);
}

/// Draws a multimodal field: M ~ U{2..n_vehicles}, peaks on uniformly chosen
/// water cells, c_i ~ U[c_min, c_max]. Fully determined by `seed`.
inline GroundTruth generate_ground_truth(const GridMap& map, int n_vehicles, std::uint64_t seed,
                                         const GroundTruthOptions& options = {}) {
  if (n_vehicles < 2) throw ConfigError("ground truth needs at least 2 vehicles");
  if (!(options.c_min > 0.0) || options.c_max < options.c_min) throw ConfigError("invalid c range");
  if (!(options.coordinate_scale > 0.0)) throw ConfigError("coordinate scale must be positive");

  Rng rng(derive_seed(seed, 0x7275746855ULL));
  GroundTruth truth;
  truth.coordinate_scale = options.coordinate_scale;
  truth.peak_count = static_cast<int>(rng.uniform_int(2, n_vehicles));
  const auto& water = map.water_cells();
  for (int i = 0; i < truth.peak_count; ++i) {
    const auto pick = rng.uniform_int(0, static_cast<std::int64_t>(water.size()) - 1);
    truth.peaks.push_back(map.cell_center(water[static_cast<std::size_t>(pick)]));
  }
  for (int i = 0; i < truth.peak_count; ++i) truth.weights.push_back(rng.uniform(options.c_min, options.c_max));

  std::vector<Vec2> scaled(truth.peaks.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = (1.0 / options.coordinate_scale) * truth.peaks[i];

  Field raw(map.rows(), map.cols(), 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int w : map.water_cells()) {
    const double v = shekel_eval(scaled, truth.weights, (1.0 / options.coordinate_scale) * map.cell_center(w));
    raw[static_cast<std::size_t>(w)] = v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  truth.raw_min = lo;
  truth.raw_max = hi;
  truth.field = normalize_field(raw, map);
  return truth;
}

/// Exact point sensor: the normalized value of the cell containing p.
inline double read_sensor(const GroundTruth& truth, const GridMap& map, Vec2 p) {
  const int cell = map.cell_of(p);
  if (cell < 0 || !map.is_water(static_cast<std::size_t>(cell))) throw DimensionError("sensor read outside water");
  return truth.field[static_cast<std::size_t>(cell)];
}

}  // namespace aquafel
