#pragma once

#include <algorithm>
#include <concepts>
#include <limits>
#include <span>
#include <vector>

#include "aquafel/core.hpp"
#include "aquafel/surrogate.hpp"

namespace aquafel {

/// Anything that yields uniform [0, 1) doubles: Rng, or a scripted source in tests.
template <typename T>
concept UniformSource = requires(T& t) {
  { t.uniform01() } -> std::convertible_to<double>;
};

/// Acceleration coefficients: local best, global best, max uncertainty, max contamination.
struct Coefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;

  friend constexpr bool operator==(const Coefficients&, const Coefficients&) = default;
};

namespace coefficients {
inline constexpr Coefficients kClassic{2.0, 2.0, 0.0, 0.0};
inline constexpr Coefficients kExploration{2.0187, 0.0, 3.2697, 0.0};
inline constexpr Coefficients kExploitation{3.6845, 1.5614, 0.0, 3.6703};
/// Exploit set of the epsilon-greedy planner; differs from kExploitation in c4.
inline constexpr Coefficients kEpsilonExploit{3.6845, 1.5614, 0.0, 3.1262};
}  // namespace coefficients

inline constexpr int kGroupAll = -1;

struct VehicleState {
  Vec2 position;
  Vec2 velocity;
  Vec2 pbest_pos;
  double pbest_val = -std::numeric_limits<double>::infinity();
  double distance_m = 0.0;
  int group = kGroupAll;
};

struct SwarmConfig {
  double inertia = 0.7;
  Coefficients coeffs = coefficients::kClassic;
  double max_step_cells = 2.0;
};

struct GroupBest {
  Vec2 pos;
  double val = -std::numeric_limits<double>::infinity();
  int group = kGroupAll;
};

/// Per-vehicle, per-iteration random factors r1..r4.
struct Draws {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;
};

template <UniformSource Source>
Draws draw_terms(Source& rng) {
  Draws d;
  d.r1 = rng.uniform01();
  d.r2 = rng.uniform01();
  d.r3 = rng.uniform01();
  d.r4 = rng.uniform01();
  return d;
}

inline Vec2 clamp_magnitude(Vec2 v, double max_norm) {
  const double n = v.norm();
  if (n > max_norm && n > 0.0) return (max_norm / n) * v;
  return v;
}

struct StepProposal {
  Vec2 velocity;
  Vec2 position;
};

/// Four-term velocity law. Terms with a zero coefficient contribute nothing,
/// so this also covers the classic two-term update.
inline StepProposal velocity_update(const VehicleState& s, Vec2 gbest, Vec2 max_un, Vec2 max_con, double inertia,
                                    const Coefficients& k, const Draws& r, double max_step) {
  Vec2 v = inertia * s.velocity;
  if (k.c1 != 0.0) v += (k.c1 * r.r1) * (s.pbest_pos - s.position);
  if (k.c2 != 0.0) v += (k.c2 * r.r2) * (gbest - s.position);
  if (k.c3 != 0.0) v += (k.c3 * r.r3) * (max_un - s.position);
  if (k.c4 != 0.0) v += (k.c4 * r.r4) * (max_con - s.position);
  v = clamp_magnitude(v, max_step);
  return {v, s.position + v};
}

/// Classic PSO: inertia, cognitive and social terms. Consumes r1..r4 so every
/// planner draws the same amount per vehicle.
template <UniformSource Source>
StepProposal classic_step(const VehicleState& s, const GroupBest& gbest, const SwarmConfig& cfg, Source& rng) {
  const Draws r = draw_terms(rng);
  Coefficients k = cfg.coeffs;
  k.c3 = 0.0;
  k.c4 = 0.0;
  return velocity_update(s, gbest.pos, {}, {}, cfg.inertia, k, r, cfg.max_step_cells);
}

/// GP-enhanced PSO: adds attraction toward the max-uncertainty and
/// max-contamination coordinates of the surrogate.
template <UniformSource Source>
StepProposal enhanced_step(const VehicleState& s, const GroupBest& gbest, const GridPrediction& gp,
                           const SwarmConfig& cfg, Source& rng) {
  if (gp.max_un_cell < 0 || gp.max_con_cell < 0) throw Error("enhanced_step: surrogate has no prediction");
  const Draws r = draw_terms(rng);
  return velocity_update(s, gbest.pos, gp.max_un, gp.max_con, cfg.inertia, cfg.coeffs, r, cfg.max_step_cells);
}

/// Epsilon-greedy switch between an exploring and an exploiting coefficient set.
struct EpsilonSchedule {
  double epsilon = 0.95;
  double d_eps0_m = 6500.0;
  double d_epsf_m = 13500.0;
  double delta_eps = 0.13;
  Coefficients explore = coefficients::kExploration;
  Coefficients exploit = coefficients::kEpsilonExploit;

  static constexpr double kMax = 0.95;
  static constexpr double kMin = 0.05;

  /// Advances epsilon for this iteration given the distance travelled.
  void advance(double total_distance_m) {
    if (total_distance_m <= d_eps0_m)
      epsilon = kMax;
    else if (total_distance_m >= d_epsf_m)
      epsilon = kMin;
    else
      epsilon = std::max(epsilon - delta_eps, kMin);
  }

  /// Advances epsilon, draws val and returns the explore set when epsilon >= val.
  template <UniformSource Source>
  Coefficients coefficients(double total_distance_m, Source& rng) {
    advance(total_distance_m);
    const double val = rng.uniform01();
    return epsilon >= val ? explore : exploit;
  }
};

/// Raises pbest only on strict improvement.
inline bool update_personal_best(VehicleState& s, double reading) {
  if (reading > s.pbest_val) {
    s.pbest_val = reading;
    s.pbest_pos = s.position;
    return true;
  }
  return false;
}

/// Best pbest among members of `previous.group`; the previous holder keeps ties.
inline GroupBest group_best(std::span<const VehicleState> states, const GroupBest& previous) {
  GroupBest best = previous;
  for (const auto& s : states) {
    if (previous.group != kGroupAll && s.group != previous.group) continue;
    if (s.pbest_val > best.val) {
      best.val = s.pbest_val;
      best.pos = s.pbest_pos;
    }
  }
  return best;
}

/// Applies one round of sensor readings: pbest per vehicle, then gbest per group.
/// `groups[g].group` names the group each entry tracks.
inline void update_bests(std::span<VehicleState> states, std::span<GroupBest> groups, std::span<const double> readings) {
  if (readings.size() != states.size()) throw DimensionError("update_bests: one reading per vehicle required");
  for (std::size_t i = 0; i < states.size(); ++i) update_personal_best(states[i], readings[i]);
  for (auto& g : groups) g = group_best(states, g);
}

}  // namespace aquafel
