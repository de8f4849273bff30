#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aquafel/benchmark.hpp"
#include "aquafel/core.hpp"
#include "aquafel/fedserver.hpp"
#include "aquafel/metrics.hpp"
#include "aquafel/rng.hpp"
#include "aquafel/surrogate.hpp"
#include "aquafel/swarm.hpp"
#include "aquafel/worldmap.hpp"
#include "aquafel/zones.hpp"

namespace aquafel {

enum class Planner { lawnmower, classic_pso, enhanced_explore, enhanced_exploit, epsilon_greedy, aquafel };

inline constexpr std::array kAllPlanners{Planner::lawnmower,       Planner::classic_pso,    Planner::enhanced_explore,
                                         Planner::enhanced_exploit, Planner::epsilon_greedy, Planner::aquafel};

inline std::string_view planner_name(Planner p) {
  switch (p) {
    case Planner::lawnmower: return "lawnmower";
    case Planner::classic_pso: return "classic_pso";
    case Planner::enhanced_explore: return "enhanced_explore";
    case Planner::enhanced_exploit: return "enhanced_exploit";
    case Planner::epsilon_greedy: return "epsilon_greedy";
    case Planner::aquafel: return "aquafel";
  }
  return "?";
}

inline std::optional<Planner> parse_planner(std::string_view name) {
  for (Planner p : kAllPlanners)
    if (planner_name(p) == name) return p;
  return std::nullopt;
}

inline std::string planner_list() {
  std::string out;
  for (Planner p : kAllPlanners) {
    if (!out.empty()) out += ", ";
    out += planner_name(p);
  }
  return out;
}

enum class LearningMode { federated, centralized };

inline std::string_view learning_mode_name(LearningMode m) {
  return m == LearningMode::federated ? "federated" : "centralized";
}

inline std::optional<LearningMode> parse_learning_mode(std::string_view s) {
  if (s == "federated") return LearningMode::federated;
  if (s == "centralized") return LearningMode::centralized;
  return std::nullopt;
}

/// Battery autonomy of a vehicle.
inline constexpr double kAutonomyM = 30000.0;

struct MissionConfig {
  Planner planner = Planner::aquafel;
  int n_vehicles = 4;
  /// Budget of the single-phase planners.
  double max_distance_m = 20000.0;
  double exploration_distance_m = 10000.0;
  double exploitation_distance_m = 10000.0;
  LearningMode learning_mode = LearningMode::federated;
  std::uint64_t seed = 0;

  double inertia = 0.7;
  double max_step_cells = 2.0;
  double lambda = 0.3;
  GpOptions gp;
  EpsilonSchedule epsilon;
  double lawnmower_swath_cells = 10.0;
  /// Explicit spawn positions; empty means default_spawns().
  std::vector<Vec2> spawns;
  /// A phase stops after factor * (budget / max step) iterations even if some
  /// vehicle is stuck against the shore.
  double iteration_cap_factor = 5.0;
};

inline void validate(const MissionConfig& cfg) {
  if (cfg.n_vehicles < 2) throw ConfigError("n_vehicles must be at least 2");
  if (cfg.max_distance_m < 0.0 || cfg.max_distance_m > kAutonomyM)
    throw ConfigError("max_distance_m must lie in [0, 30000]");
  if (cfg.exploration_distance_m < 0.0 || cfg.exploitation_distance_m < 0.0)
    throw ConfigError("phase distances must be non-negative");
  if (cfg.exploration_distance_m + cfg.exploitation_distance_m > kAutonomyM)
    throw ConfigError("exploration + exploitation distance exceeds the 30000 m autonomy");
  if (!(cfg.max_step_cells > 0.0)) throw ConfigError("max_step_cells must be positive");
  if (cfg.inertia < 0.0) throw ConfigError("inertia must be non-negative");
  if (cfg.lambda < 0.1 || cfg.lambda > 0.5) throw ConfigError("lambda must lie in [0.1, 0.5]");
  if (!(cfg.lawnmower_swath_cells > 0.0)) throw ConfigError("lawnmower swath must be positive");
  if (!cfg.spawns.empty() && static_cast<int>(cfg.spawns.size()) < cfg.n_vehicles)
    throw ConfigError("fewer spawn positions than vehicles");
  if (!(cfg.iteration_cap_factor >= 1.0)) throw ConfigError("iteration_cap_factor must be >= 1");
}

/// Near-shore water cells spread evenly by bearing around the lake centroid.
inline std::vector<Vec2> default_spawns(const GridMap& map, int n_vehicles) {
  Vec2 centroid;
  for (int w : map.water_cells()) centroid += map.cell_center(w);
  centroid = (1.0 / static_cast<double>(map.water_cells().size())) * centroid;

  struct Shore {
    double angle;
    int cell;
  };
  std::vector<Shore> shore;
  for (int w : map.water_cells()) {
    const int r = w / map.cols(), c = w % map.cols();
    const bool edge = !map.is_water(r - 1, c) || !map.is_water(r + 1, c) || !map.is_water(r, c - 1) ||
                      !map.is_water(r, c + 1);
    if (!edge) continue;
    const Vec2 p = map.cell_center(w) - centroid;
    shore.push_back({std::atan2(p.y, p.x), w});
  }
  std::sort(shore.begin(), shore.end(),
            [](const Shore& a, const Shore& b) { return a.angle != b.angle ? a.angle < b.angle : a.cell < b.cell; });
  std::vector<Vec2> spawns;
  for (int k = 0; k < n_vehicles; ++k) {
    const std::size_t i = static_cast<std::size_t>(k) * shore.size() / static_cast<std::size_t>(n_vehicles);
    spawns.push_back(map.cell_center(shore[i].cell));
  }
  return spawns;
}

struct StepOutcome {
  Vec2 position;
  double distance_m = 0.0;
};

/// Executes a proposed move: truncates it at the shoreline and meters the
/// distance actually covered. The velocity is left untouched.
inline StepOutcome step_vehicle(VehicleState& state, Vec2 proposed, const GridMap& map) {
  const Vec2 executed = map.clip_move(state.position, proposed);
  const double d = distance(state.position, executed) * map.cell_size_m();
  state.position = executed;
  state.distance_m += d;
  return {executed, d};
}

/// Row ranges [first, last) of the horizontal lawnmower bands over the water bounding box.
inline std::vector<std::pair<int, int>> lawnmower_bands(const GridMap& map, int n_vehicles) {
  int r0 = map.rows(), r1 = -1;
  for (int w : map.water_cells()) {
    r0 = std::min(r0, w / map.cols());
    r1 = std::max(r1, w / map.cols());
  }
  const int height = r1 - r0 + 1;
  std::vector<std::pair<int, int>> bands;
  for (int k = 0; k < n_vehicles; ++k)
    bands.emplace_back(r0 + k * height / n_vehicles, r0 + (k + 1) * height / n_vehicles);
  return bands;
}

/// Boustrophedon sweep per vehicle: lines every `swath_cells` rows inside the
/// vehicle's band, each spanning the water extent of its row, alternating direction.
inline std::vector<std::vector<Vec2>> lawnmower_path(const GridMap& map, int n_vehicles, double swath_cells) {
  if (!(swath_cells > 0.0)) throw ConfigError("swath must be positive");
  std::vector<std::vector<Vec2>> paths;
  for (const auto& [first, last] : lawnmower_bands(map, n_vehicles)) {
    std::vector<Vec2> wp;
    auto add_line = [&](double y) {
      const int row = std::clamp(static_cast<int>(std::floor(y)), 0, map.rows() - 1);
      int lo = -1, hi = -1;
      for (int c = 0; c < map.cols(); ++c) {
        if (!map.is_water(row, c)) continue;
        if (lo < 0) lo = c;
        hi = c;
      }
      if (lo < 0) return;
      const Vec2 left{lo + 0.5, y}, right{hi + 0.5, y};
      const bool forward = (wp.size() / 2) % 2 == 0;
      wp.push_back(forward ? left : right);
      wp.push_back(forward ? right : left);
    };
    for (double y = first + swath_cells / 2.0; y < last; y += swath_cells) add_line(y);
    if (wp.empty() && last > first) add_line(0.5 * (first + last));
    paths.push_back(std::move(wp));
  }
  return paths;
}

struct TrajectoryRow {
  int step = 0;
  int vehicle = 0;
  Vec2 position;
  Vec2 velocity;
  bool sampled = false;
};

struct MissionResult {
  Field final_mean;
  Field final_std;
  std::optional<GridPrediction> exploration;
  std::vector<ActionZone> zones;
  std::vector<int> assignment;
  std::vector<TrajectoryRow> trajectories;
  std::vector<Sample> samples;
  std::vector<double> distances_m;
  MetricsReport metrics;
  int phase_switch_step = -1;
  int iterations = 0;
  double wall_ms = 0.0;
};

namespace detail {

inline bool needs_surrogate_grid(Planner p) {
  return p == Planner::enhanced_explore || p == Planner::enhanced_exploit || p == Planner::epsilon_greedy ||
         p == Planner::aquafel;
}

inline int iteration_cap(double budget_m, const MissionConfig& cfg, const GridMap& map) {
  const double per_step = cfg.max_step_cells * map.cell_size_m();
  return static_cast<int>(std::ceil(budget_m / per_step * cfg.iteration_cap_factor)) + 10;
}

class MissionRunner {
 public:
  MissionRunner(const MissionConfig& cfg, const GroundTruth& truth, const GridMap& map)
      : cfg_(cfg), truth_(truth), map_(map), rng_(derive_seed(cfg.seed, 1)), policy_(cfg.n_vehicles, cfg.lambda) {
    validate(cfg);
    if (!truth.field.same_shape(Field(map.rows(), map.cols()))) throw DimensionError("ground truth / map mismatch");
    const auto spawns = cfg.spawns.empty() ? default_spawns(map, cfg.n_vehicles) : cfg.spawns;
    for (int v = 0; v < cfg.n_vehicles; ++v) {
      const Vec2 p = spawns[static_cast<std::size_t>(v)];
      if (!map.is_navigable(p)) throw ConfigError("spawn position of vehicle " + std::to_string(v) + " is on land");
      VehicleState s;
      s.position = p;
      states_.push_back(s);
      schedules_.push_back(cfg.epsilon);
    }
    phase_start_m_.assign(states_.size(), 0.0);
    in_zone_pso_.assign(states_.size(), false);
    routes_.assign(states_.size(), {});
    if (cfg.planner == Planner::lawnmower) {
      waypoints_ = lawnmower_path(map, cfg.n_vehicles, cfg.lawnmower_swath_cells);
      waypoint_idx_.assign(states_.size(), 0);
      waypoint_dir_.assign(states_.size(), 1);
    }
  }

  MissionResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg_.planner == Planner::aquafel)
      run_two_phase();
    else
      run_single_phase();
    finish();
    result_.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return std::move(result_);
  }

 private:
  enum class Phase { single, exploration, exploitation };

  // --- sensing and learning -------------------------------------------------

  double sampling_length_scale(int v) const {
    if (phase_ == Phase::exploitation && cfg_.learning_mode == LearningMode::federated) {
      const auto& node = nodes_[static_cast<std::size_t>(result_.assignment[static_cast<std::size_t>(v)])];
      return node.model.length_scale();
    }
    return central_ ? central_->length_scale() : cfg_.gp.length_scale_init;
  }

  bool pbest_eligible(int v) const {
    if (phase_ != Phase::exploitation) return true;
    const auto& zone = result_.zones[static_cast<std::size_t>(result_.assignment[static_cast<std::size_t>(v)])];
    return zone.contains(states_[static_cast<std::size_t>(v)].position);
  }

  /// Reads sensors, updates bests, takes samples and refits whatever changed.
  void sense(int step) {
    std::vector<Sample> fresh;
    std::vector<bool> sampled(states_.size(), false);
    for (std::size_t i = 0; i < states_.size(); ++i) {
      const int v = static_cast<int>(i);
      auto& s = states_[i];
      const double reading = read_sensor(truth_, map_, s.position);
      if (pbest_eligible(v)) update_personal_best(s, reading);
      if (policy_.should_sample(sampling_length_scale(v), s.position, v)) {
        const int cell = map_.cell_of(s.position);
        fresh.push_back({map_.cell_center(cell), reading, v, step});
        policy_.record(v, s.position);
        sampled[i] = true;
      }
    }
    for (auto& g : gbests_) g = group_best(states_, g);
    for (std::size_t i = 0; i < states_.size(); ++i)
      result_.trajectories.push_back({step, static_cast<int>(i), states_[i].position, states_[i].velocity, sampled[i]});
    if (fresh.empty()) return;
    result_.samples.insert(result_.samples.end(), fresh.begin(), fresh.end());

    if (phase_ == Phase::exploitation && cfg_.learning_mode == LearningMode::federated) {
      for (std::size_t z = 0; z < nodes_.size(); ++z) {
        std::vector<Sample> batch;
        for (const auto& smp : fresh)
          if (result_.assignment[static_cast<std::size_t>(smp.taker)] == static_cast<int>(z)) batch.push_back(smp);
        if (batch.empty()) continue;
        node_ingest(nodes_[z], batch, cfg_.gp);
        zone_pred_[z] = nodes_[z].model.predict_cells(map_, zone_cells_[z]);
      }
      return;
    }

    central_samples_.insert(central_samples_.end(), fresh.begin(), fresh.end());
    central_ = fit(central_samples_, cfg_.gp);
    if (phase_ == Phase::exploitation) {
      for (std::size_t z = 0; z < zone_pred_.size(); ++z) zone_pred_[z] = central_->predict_cells(map_, zone_cells_[z]);
    } else if (needs_surrogate_grid(cfg_.planner)) {
      central_pred_ = central_->predict_grid(map_);
    }
  }

  // --- motion ---------------------------------------------------------------

  void move_pso(std::size_t i, const Coefficients& k, Vec2 gbest, const GridPrediction* surrogate) {
    auto& s = states_[i];
    const Draws r = draw_terms(rng_);
    VehicleState view = s;
    if (!std::isfinite(view.pbest_val)) view.pbest_pos = s.position;
    const Vec2 max_un = surrogate ? surrogate->max_un : s.position;
    const Vec2 max_con = surrogate ? surrogate->max_con : s.position;
    const StepProposal p = velocity_update(view, gbest, max_un, max_con, cfg_.inertia, k, r, cfg_.max_step_cells);
    s.velocity = p.velocity;
    step_vehicle(s, p.position, map_);
  }

  Vec2 gbest_for(std::size_t i, const GroupBest& g) const {
    return std::isfinite(g.val) ? g.pos : states_[i].position;
  }

  /// Moves toward `target` at most one max step, detouring along a water
  /// route when the straight leg is blocked. Returns false when the target
  /// cannot be reached at all.
  bool pursue(std::size_t i, Vec2 target) {
    auto& s = states_[i];
    auto& route = routes_[i];
    if (!route.empty() && !(route.front() == target)) route.clear();
    if (route.empty()) {
      const Vec2 direct = s.position + clamp_magnitude(target - s.position, cfg_.max_step_cells);
      if (!(map_.clip_move(s.position, direct) == direct)) {
        route = water_path(map_, s.position, target);
        if (route.empty()) return false;
        std::reverse(route.begin(), route.end());
      }
    }
    const Vec2 next = route.empty() ? target : route.back();
    const Vec2 delta = clamp_magnitude(next - s.position, cfg_.max_step_cells);
    s.velocity = delta;
    step_vehicle(s, s.position + delta, map_);
    if (!route.empty() && distance(s.position, next) < 1e-9) route.pop_back();
    return true;
  }

  void move_lawnmower(std::size_t i) {
    const auto& wp = waypoints_[i];
    if (wp.empty()) return;
    auto& idx = waypoint_idx_[i];
    auto& dir = waypoint_dir_[i];
    auto advance = [&] {
      if (wp.size() == 1) return;
      if (idx + dir < 0 || idx + dir >= static_cast<int>(wp.size())) dir = -dir;
      idx += dir;
    };
    for (std::size_t tries = 0; tries < wp.size(); ++tries) {
      const Vec2 target = wp[static_cast<std::size_t>(idx)];
      if (distance(states_[i].position, target) < 1e-9 || !map_.is_navigable(target)) {
        advance();
        continue;
      }
      if (pursue(i, target)) {
        if (distance(states_[i].position, target) < 1e-9) advance();
        return;
      }
      advance();
    }
  }

  bool active(std::size_t i, double budget_m) const {
    return states_[i].distance_m - phase_start_m_[i] < budget_m;
  }

  void move_all(double budget_m) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (!active(i, budget_m)) continue;
      switch (cfg_.planner) {
        case Planner::lawnmower: move_lawnmower(i); break;
        case Planner::classic_pso:
          move_pso(i, coefficients::kClassic, gbest_for(i, gbests_[0]), nullptr);
          break;
        case Planner::enhanced_explore:
          move_pso(i, coefficients::kExploration, gbest_for(i, gbests_[0]), &*central_pred_);
          break;
        case Planner::enhanced_exploit:
          move_pso(i, coefficients::kExploitation, gbest_for(i, gbests_[0]), &*central_pred_);
          break;
        case Planner::epsilon_greedy: {
          const Coefficients k = schedules_[i].coefficients(states_[i].distance_m, rng_);
          move_pso(i, k, gbest_for(i, gbests_[0]), &*central_pred_);
          break;
        }
        case Planner::aquafel:
          if (phase_ == Phase::exploration)
            move_pso(i, coefficients::kExploration, gbest_for(i, gbests_[0]), &*central_pred_);
          else
            move_exploitation(i);
          break;
      }
    }
  }

  void move_exploitation(std::size_t i) {
    auto& s = states_[i];
    const auto z = static_cast<std::size_t>(result_.assignment[i]);
    const ActionZone& zone = result_.zones[z];
    if (!in_zone_pso_[i] && zone.contains(s.position)) in_zone_pso_[i] = true;
    if (!in_zone_pso_[i]) {
      if (pursue(i, zone.center)) return;
      in_zone_pso_[i] = true;
    }
    move_pso(i, coefficients::kExploitation, gbest_for(i, gbests_[z]), &zone_pred_[z]);
  }

  // --- phases ---------------------------------------------------------------

  void run_single_phase() {
    phase_ = Phase::single;
    gbests_.assign(1, GroupBest{});
    const int cap = iteration_cap(cfg_.max_distance_m, cfg_, map_);
    int step = 0;
    for (;; ++step) {
      sense(step);
      bool any = false;
      for (std::size_t i = 0; i < states_.size(); ++i) any = any || active(i, cfg_.max_distance_m);
      if (!any || step >= cap) break;
      move_all(cfg_.max_distance_m);
    }
    result_.iterations = step;
  }

  void run_two_phase() {
    phase_ = Phase::exploration;
    gbests_.assign(1, GroupBest{});
    const int cap1 = iteration_cap(cfg_.exploration_distance_m, cfg_, map_);
    const int cap2 = iteration_cap(cfg_.exploitation_distance_m, cfg_, map_);
    int step = 0;
    for (;; ++step) {
      sense(step);
      if (phase_ == Phase::exploration) {
        const bool all_done = std::all_of(states_.begin(), states_.end(), [&](const VehicleState& s) {
          return s.distance_m >= cfg_.exploration_distance_m;
        });
        if (all_done || step >= cap1) switch_to_exploitation(step);
      }
      if (phase_ == Phase::exploitation) {
        bool any = false;
        for (std::size_t i = 0; i < states_.size(); ++i) any = any || active(i, cfg_.exploitation_distance_m);
        if (!any || step >= result_.phase_switch_step + cap2) break;
        move_all(cfg_.exploitation_distance_m);
      } else {
        move_all(std::numeric_limits<double>::infinity());
      }
    }
    result_.iterations = step;
  }

  void switch_to_exploitation(int step) {
    result_.phase_switch_step = step;
    result_.exploration = central_->predict_grid(map_);
    const ZoneRadius radius = compute_zone_radius(map_.shortest_length_m(), cfg_.n_vehicles, map_.cell_size_m());
    auto zones = extract_action_zones(result_.exploration->mean, map_, cfg_.n_vehicles, radius.cells);
    if (zones.empty()) throw Error("mission seed " + std::to_string(cfg_.seed) + ": exploration model yields no zones");
    assign_priorities(zones, cfg_.n_vehicles);
    std::vector<Vec2> positions;
    for (const auto& s : states_) positions.push_back(s.position);
    result_.assignment = allocate_vehicles(zones, positions);
    result_.zones = std::move(zones);

    zone_cells_.clear();
    for (const auto& z : result_.zones) zone_cells_.push_back(zone_cells(z, map_));
    zone_pred_.clear();
    if (cfg_.learning_mode == LearningMode::federated) {
      nodes_ = init_nodes(result_.zones, central_samples_, cfg_.gp);
      for (std::size_t z = 0; z < nodes_.size(); ++z) zone_pred_.push_back(nodes_[z].model.predict_cells(map_, zone_cells_[z]));
    } else {
      for (std::size_t z = 0; z < result_.zones.size(); ++z)
        zone_pred_.push_back(central_->predict_cells(map_, zone_cells_[z]));
    }

    gbests_.clear();
    for (std::size_t z = 0; z < result_.zones.size(); ++z) {
      GroupBest g;
      g.group = static_cast<int>(z);
      gbests_.push_back(g);
    }
    for (std::size_t i = 0; i < states_.size(); ++i) {
      auto& s = states_[i];
      s.group = result_.assignment[i];
      s.pbest_val = -std::numeric_limits<double>::infinity();
      s.pbest_pos = s.position;
      phase_start_m_[i] = s.distance_m;
    }
    phase_ = Phase::exploitation;
  }

  void finish() {
    for (const auto& s : states_) result_.distances_m.push_back(s.distance_m);
    if (cfg_.planner == Planner::aquafel && cfg_.learning_mode == LearningMode::federated) {
      ModelGrids merged = merge_nodes(*result_.exploration, result_.zones, nodes_, map_);
      result_.final_mean = std::move(merged.mean);
      result_.final_std = std::move(merged.std);
    } else {
      GridPrediction p = central_->predict_grid(map_);
      result_.final_mean = std::move(p.mean);
      result_.final_std = std::move(p.std);
    }
    result_.metrics = evaluate(truth_.field, result_.final_mean, map_, cfg_.n_vehicles);
  }

  const MissionConfig& cfg_;
  const GroundTruth& truth_;
  const GridMap& map_;
  Rng rng_;
  SamplingPolicy policy_;
  Phase phase_ = Phase::single;

  std::vector<VehicleState> states_;
  std::vector<EpsilonSchedule> schedules_;
  std::vector<GroupBest> gbests_;
  std::vector<double> phase_start_m_;
  std::vector<bool> in_zone_pso_;

  std::vector<Sample> central_samples_;
  std::optional<GPModel> central_;
  std::optional<GridPrediction> central_pred_;

  std::vector<ZoneNode> nodes_;
  std::vector<std::vector<int>> zone_cells_;
  std::vector<GridPrediction> zone_pred_;

  std::vector<std::vector<Vec2>> routes_;  ///< detour waypoints, next one last
  std::vector<std::vector<Vec2>> waypoints_;
  std::vector<int> waypoint_idx_;
  std::vector<int> waypoint_dir_;

  MissionResult result_;
};

}  // namespace detail

/// Runs one mission of the configured planner on (truth, map). Deterministic per seed.
inline MissionResult run_mission(const MissionConfig& cfg, const GroundTruth& truth, const GridMap& map) {
  return detail::MissionRunner(cfg, truth, map).run();
}

}  // namespace aquafel
