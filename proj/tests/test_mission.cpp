#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "aquafel/io.hpp"
#include "aquafel/mission.hpp"
#include "oracles.hpp"

using namespace aquafel;

namespace aquafel {
void PrintTo(Planner p, std::ostream* os) { *os << planner_name(p); }
}  // namespace aquafel

namespace {

const GridMap& lake() {
  static const GridMap m = load_map(AQUAFEL_DATA_DIR "/ypacarai.map");
  return m;
}

double point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  const double t = len2 == 0.0 ? 0.0 : std::clamp(((p - a).x * ab.x + (p - a).y * ab.y) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

std::map<int, std::vector<TrajectoryRow>> by_vehicle(const MissionResult& r) {
  std::map<int, std::vector<TrajectoryRow>> out;
  for (const auto& t : r.trajectories) out[t.vehicle].push_back(t);
  return out;
}

std::string export_all(const MissionResult& r, const GridMap& map) {
  return grid_csv(r.final_mean, map) + grid_csv(r.final_std, map) + trajectory_csv(r.trajectories) +
         zones_csv(r.zones);
}

}  // namespace

TEST(StepVehicle, MeteredDistance) {
  const GridMap m = oracle::picture_map({"......", "......", "...###"});
  VehicleState s;
  s.position = {0.5, 0.5};
  EXPECT_NEAR(step_vehicle(s, {2.5, 0.5}, m).distance_m, 200.0, 1e-9);
  EXPECT_NEAR(s.distance_m, 200.0, 1e-9);

  VehicleState blocked;
  blocked.position = {2.999, 2.5};
  EXPECT_EQ(step_vehicle(blocked, {4.999, 2.5}, m).distance_m, 0.0);
  EXPECT_EQ(blocked.position, (Vec2{2.999, 2.5}));

  VehicleState half;
  half.position = {2.0, 2.5};
  half.velocity = {2.0, 0.0};
  EXPECT_NEAR(step_vehicle(half, {4.0, 2.5}, m).distance_m, 90.0, 1e-6);  // last 0.1-cell sample before x = 3
  EXPECT_EQ(half.velocity, (Vec2{2.0, 0.0}));
}

TEST(Lawnmower, TwoPassesOnOpenSquare) {
  const GridMap m = oracle::open_map(20, 20);
  const auto p = lawnmower_path(m, 1, 10.0);
  ASSERT_EQ(p.size(), 1u);
  ASSERT_EQ(p[0].size(), 4u);
  EXPECT_EQ(p[0][0], (Vec2{0.5, 5.0}));
  EXPECT_EQ(p[0][1], (Vec2{19.5, 5.0}));
  EXPECT_EQ(p[0][2], (Vec2{19.5, 15.0}));
  EXPECT_EQ(p[0][3], (Vec2{0.5, 15.0}));
}

TEST(Lawnmower, BandsDisjointAndCovering) {
  const GridMap m = oracle::picture_map({"####", "#..#", "....", "....", "....", "##.#", "####"});
  for (int n = 1; n <= 5; ++n) {
    const auto bands = lawnmower_bands(m, n);
    ASSERT_EQ(static_cast<int>(bands.size()), n);
    EXPECT_EQ(bands.front().first, 1);
    EXPECT_EQ(bands.back().second, 6);
    for (std::size_t k = 1; k < bands.size(); ++k) EXPECT_EQ(bands[k].first, bands[k - 1].second);
  }
  EXPECT_THROW(lawnmower_path(m, 2, 0.0), ConfigError);
}

TEST(Lawnmower, BudgetLeavesWaterUncovered) {
  MissionConfig cfg;
  cfg.planner = Planner::lawnmower;
  cfg.max_distance_m = 20000;
  const GroundTruth t = generate_ground_truth(lake(), 4, 0);
  const MissionResult r = run_mission(cfg, t, lake());
  std::size_t covered = 0;
  const auto paths = by_vehicle(r);
  for (int w : lake().water_cells()) {
    const Vec2 c = lake().cell_center(w);
    bool hit = false;
    for (const auto& [v, rows] : paths) {
      for (std::size_t k = 1; k < rows.size() && !hit; ++k)
        hit = point_segment(c, rows[k - 1].position, rows[k].position) <= cfg.lawnmower_swath_cells / 2.0;
      if (hit) break;
    }
    covered += hit ? 1 : 0;
  }
  EXPECT_LT(covered, lake().water_cells().size());
  EXPECT_GT(covered, 0u);
  for (double d : r.distances_m) EXPECT_GT(d, 19000.0);
}

TEST(DefaultSpawns, OnWaterAndDistinct) {
  for (int n : {2, 4, 6, 8}) {
    const auto s = default_spawns(lake(), n);
    ASSERT_EQ(static_cast<int>(s.size()), n);
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_TRUE(lake().is_navigable(s[i]));
      for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(s[i] == s[j]);
    }
  }
}

TEST(MissionConfig, Validation) {
  MissionConfig c;
  EXPECT_NO_THROW(validate(c));
  c.n_vehicles = 1;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.exploration_distance_m = 20000;
  c.exploitation_distance_m = 15000;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.max_distance_m = 31000;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.lambda = 0.7;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.spawns = {{60.5, 60.5}};
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.spawns = {{0.5, 0.5}, {0.5, 1.5}, {1.5, 0.5}, {1.5, 1.5}};
  const GroundTruth t = generate_ground_truth(lake(), 4, 0);
  EXPECT_THROW(run_mission(c, t, lake()), ConfigError);  // corner cells are land
}

TEST(PlannerNames, RoundTrip) {
  for (Planner p : kAllPlanners) EXPECT_EQ(parse_planner(planner_name(p)), p);
  EXPECT_FALSE(parse_planner("zigzag"));
  EXPECT_EQ(planner_list(), "lawnmower, classic_pso, enhanced_explore, enhanced_exploit, epsilon_greedy, aquafel");
  EXPECT_EQ(parse_learning_mode("centralized"), LearningMode::centralized);
  EXPECT_FALSE(parse_learning_mode("pooled"));
}

class EveryPlanner : public ::testing::TestWithParam<Planner> {};

TEST_P(EveryPlanner, DeterministicAndWellFormed) {
  MissionConfig cfg;
  cfg.planner = GetParam();
  cfg.seed = 5;
  cfg.max_distance_m = 8000;
  cfg.exploration_distance_m = 5000;
  cfg.exploitation_distance_m = 5000;
  const GroundTruth t = generate_ground_truth(lake(), 4, 5);
  const MissionResult a = run_mission(cfg, t, lake());
  const MissionResult b = run_mission(cfg, t, lake());
  EXPECT_EQ(export_all(a, lake()), export_all(b, lake()));
  EXPECT_EQ(a.samples, b.samples);

  for (const auto& row : a.trajectories) {
    EXPECT_TRUE(lake().is_navigable(row.position));
    EXPECT_LE(row.velocity.norm(), cfg.max_step_cells + 1e-9);
  }
  // per-vehicle path length from the trajectory equals the metered distance
  for (const auto& [v, rows] : by_vehicle(a)) {
    double len = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) len += distance(rows[k - 1].position, rows[k].position);
    EXPECT_NEAR(len * lake().cell_size_m(), a.distances_m[static_cast<std::size_t>(v)], 1e-6);
  }
  // AquaFeL vehicles keep exploring until the whole swarm switches, so only the autonomy bounds them
  const double budget = GetParam() == Planner::aquafel ? kAutonomyM : cfg.max_distance_m;
  for (double d : a.distances_m) EXPECT_LE(d, budget + 2 * cfg.max_step_cells * lake().cell_size_m() + 1e-6);

  // sample count bound: distance / (lambda * l_min * cell) + 1
  std::map<int, int> per_vehicle;
  for (const auto& s : a.samples) ++per_vehicle[s.taker];
  for (const auto& [v, n] : per_vehicle)
    EXPECT_LE(n, a.distances_m[static_cast<std::size_t>(v)] / (cfg.lambda * cfg.gp.length_scale_min * 100.0) + 1);

  EXPECT_EQ(a.metrics.mse_map, mse_map(t.field, a.final_mean, lake()));
  EXPECT_GE(a.metrics.mse_map, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Mission, EveryPlanner, ::testing::ValuesIn(kAllPlanners),
                         [](const auto& info) { return std::string(planner_name(info.param)); });

TEST(AquaFeL, SinglePhaseSwitchAfterExplorationDistance) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    MissionConfig cfg;
    cfg.seed = seed;
    const GroundTruth t = generate_ground_truth(lake(), 4, seed);
    const MissionResult r = run_mission(cfg, t, lake());
    ASSERT_GE(r.phase_switch_step, 0);
    ASSERT_TRUE(r.exploration.has_value());
    // distance covered by each vehicle up to the switch
    for (const auto& [v, rows] : by_vehicle(r)) {
      double len = 0.0;
      for (std::size_t k = 1; k < rows.size() && rows[k].step <= r.phase_switch_step; ++k)
        len += distance(rows[k - 1].position, rows[k].position);
      EXPECT_GE(len * 100.0, cfg.exploration_distance_m - 1e-6) << "vehicle " << v;
    }
    EXPECT_FALSE(r.zones.empty());
    EXPECT_LE(static_cast<int>(r.zones.size()), cfg.n_vehicles);
    ASSERT_EQ(static_cast<int>(r.assignment.size()), cfg.n_vehicles);
    for (std::size_t z = 0; z < r.zones.size(); ++z)
      for (int v : r.zones[z].vehicles) EXPECT_EQ(r.assignment[static_cast<std::size_t>(v)], static_cast<int>(z));
    // exploitation samples come from assigned vehicles only
    for (const auto& s : r.samples)
      if (s.step > r.phase_switch_step) {
        EXPECT_GE(r.assignment[static_cast<std::size_t>(s.taker)], 0);
      }
  }
}

TEST(AquaFeL, ZeroExplorationStillCompletes) {
  MissionConfig cfg;
  cfg.exploration_distance_m = 0;
  cfg.exploitation_distance_m = 5000;
  const GroundTruth t = generate_ground_truth(lake(), 4, 3);
  const MissionResult r = run_mission(cfg, t, lake());
  EXPECT_EQ(r.phase_switch_step, 0);
  EXPECT_FALSE(r.zones.empty());
  EXPECT_GT(r.samples.size(), 4u);
}

TEST(AquaFeL, FederatedOutsideZonesEqualsExplorationModel) {
  MissionConfig cfg;
  cfg.seed = 9;
  const GroundTruth t = generate_ground_truth(lake(), 4, 9);
  const MissionResult r = run_mission(cfg, t, lake());
  const Grid<int> own = zone_ownership(r.zones, lake());
  for (int w : lake().water_cells()) {
    const auto i = static_cast<std::size_t>(w);
    if (own[i] < 0) EXPECT_EQ(r.final_mean[i], r.exploration->mean[i]);
  }
}

TEST(AquaFeL, ThirtySeedMeanMseInRange) {
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    MissionConfig cfg;
    cfg.seed = seed;
    sum += run_mission(cfg, generate_ground_truth(lake(), 4, seed), lake()).metrics.mse_map;
  }
  const double mean = sum / 30.0;
  EXPECT_GE(mean, 0.0001);
  EXPECT_LE(mean, 0.005);
}
