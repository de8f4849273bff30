#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aquafel/config.hpp"
#include "aquafel/experiment.hpp"
#include "aquafel/io.hpp"
#include "oracles.hpp"

using namespace aquafel;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("aquafel_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  TempDir capture;
  const fs::path log = capture.path / "log.txt";
  const std::string cmd = std::string(AQUAFEL_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

/// Hash of every CSV under `root`, keyed by relative path.
std::map<std::string, std::uint64_t> csv_hashes(const fs::path& root) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = oracle::fnv1a(slurp(e.path()));
  return out;
}

}  // namespace

TEST(ConfigFile, SectionsCommentsAndWhitespace) {
  const auto c = ConfigFile::parse(
      "# top comment\n"
      "[mission]\n"
      "  planner = aquafel   # trailing\n"
      "vehicles=6\r\n"
      "\n"
      "[ swarm ]\n"
      "inertia = 0.6\n");
  EXPECT_EQ(c.values().at("mission.planner"), "aquafel");
  EXPECT_EQ(c.values().at("mission.vehicles"), "6");
  EXPECT_EQ(c.values().at("swarm.inertia"), "0.6");
  EXPECT_EQ(c.values().size(), 3u);
}

TEST(ConfigFile, ErrorsCarryLineNumbers) {
  auto line_of = [](std::string_view text) {
    try {
      ConfigFile::parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("a = 1\nnot a pair\n"), 2u);
  EXPECT_EQ(line_of("a = 1\n\na = 2\n"), 3u);
  EXPECT_EQ(line_of("[broken\n"), 1u);
  EXPECT_EQ(line_of(" = 3\n"), 1u);
  EXPECT_THROW(ConfigFile::load("/nonexistent/config.ini"), ConfigError);
}

TEST(ApplySetting, MapsKeysOntoSpec) {
  ExperimentSpec s;
  apply_setting(s, "mission.planner", "epsilon_greedy");
  apply_setting(s, "mission.vehicles", "6");
  apply_setting(s, "mission.exploration_km", "15");
  apply_setting(s, "mission.exploitation_distance_m", "5000");
  apply_setting(s, "mission.learning_mode", "centralized");
  apply_setting(s, "mission.spawns", "10.5 20.5; 30.5 40.5");
  apply_setting(s, "swarm.inertia", "0.5");
  apply_setting(s, "surrogate.fit_length_scale", "false");
  apply_setting(s, "benchmark.coordinate_scale", "50");
  apply_setting(s, "experiment.planners", "aquafel,lawnmower");
  apply_setting(s, "experiment.seeds", "10..14");
  apply_setting(s, "experiment.splits_km", "5/15, 10/10");
  apply_setting(s, "experiment.fleet_sizes", "2,4,6");
  EXPECT_EQ(s.mission.planner, Planner::epsilon_greedy);
  EXPECT_EQ(s.mission.n_vehicles, 6);
  EXPECT_DOUBLE_EQ(s.mission.exploration_distance_m, 15000.0);
  EXPECT_DOUBLE_EQ(s.mission.exploitation_distance_m, 5000.0);
  EXPECT_EQ(s.mission.learning_mode, LearningMode::centralized);
  EXPECT_EQ(s.mission.spawns, (std::vector<Vec2>{{10.5, 20.5}, {30.5, 40.5}}));
  EXPECT_DOUBLE_EQ(s.mission.inertia, 0.5);
  EXPECT_FALSE(s.mission.gp.fit_length_scale);
  EXPECT_DOUBLE_EQ(s.truth.coordinate_scale, 50.0);
  EXPECT_EQ(s.planners, (std::vector<Planner>{Planner::aquafel, Planner::lawnmower}));
  EXPECT_EQ(s.seed_start, 10u);
  EXPECT_EQ(s.seed_count, 5);
  EXPECT_EQ(s.splits, (std::vector<PhaseSplit>{{5, 15}, {10, 10}}));
  EXPECT_EQ(s.fleet_sizes, (std::vector<int>{2, 4, 6}));
  apply_setting(s, "experiment.planners", "all");
  EXPECT_EQ(s.planners.size(), 6u);
}

TEST(ApplySetting, BadValues) {
  ExperimentSpec s;
  EXPECT_THROW(apply_setting(s, "no.such.key", "1"), ConfigError);
  EXPECT_THROW(apply_setting(s, "mission.vehicles", "four"), ConfigError);
  EXPECT_THROW(apply_setting(s, "swarm.inertia", "0.7x"), ConfigError);
  EXPECT_THROW(apply_setting(s, "mission.learning_mode", "pooled"), ConfigError);
  EXPECT_THROW(apply_setting(s, "experiment.seeds", "5..2"), ConfigError);
  EXPECT_THROW(apply_setting(s, "experiment.splits_km", "10-10"), ConfigError);
  try {
    apply_setting(s, "mission.planner", "zigzag");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(planner_list()), std::string::npos);
  }
}

TEST(Validate, SplitsAndSpec) {
  EXPECT_NO_THROW(validate_splits(std::vector<PhaseSplit>{{5, 15}, {10, 10}, {15, 5}}));
  EXPECT_NO_THROW(validate_splits(std::vector<PhaseSplit>{{15, 15}}));
  EXPECT_THROW(validate_splits(std::vector<PhaseSplit>{{20, 15}}), ConfigError);
  EXPECT_THROW(validate_splits(std::vector<PhaseSplit>{{7, 13}}), ConfigError);
  EXPECT_THROW(validate_splits(std::vector<PhaseSplit>{}), ConfigError);
  ExperimentSpec s;
  s.fleet_sizes = {1};
  EXPECT_THROW(validate(s), ConfigError);
}

TEST(Io, NumberFormatting) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(10), "10");
  EXPECT_EQ(format_number(0.000451234567), "0.000451235");
}

TEST(Io, PgmRendering) {
  const GridMap m = oracle::picture_map({"..#", "..."});
  Field f(2, 3, 0.0);
  EXPECT_EQ(render_pgm(f, m), "P2\n3 2\n255\n0 0 0\n0 0 0\n");
  f.at(0, 0) = 1.0;
  f.at(0, 1) = 0.5;
  f.at(0, 2) = 1.0;  // land stays black
  f.at(1, 0) = 1.7;
  f.at(1, 1) = -0.2;
  f.at(1, 2) = 0.25;
  EXPECT_EQ(render_pgm(f, m), "P2\n3 2\n255\n255 128 0\n255 0 64\n");
  f.at(1, 1) = std::nan("");
  EXPECT_THROW(render_pgm(f, m), DimensionError);
  EXPECT_THROW(render_pgm(Field(1, 1), m), DimensionError);
}

TEST(Io, GridCsvMarksLand) {
  const GridMap m = oracle::picture_map({".#", ".."});
  Field f(2, 2, 0.25);
  EXPECT_EQ(grid_csv(f, m), "0.25,-1\n0.25,0.25\n");
}

TEST(Io, TablesHaveHeaders) {
  EXPECT_EQ(trajectory_csv({}), "step,vehicle,x,y,vx,vy,sampled\n");
  ActionZone z;
  z.center = {1.5, 2.5};
  z.radius_cells = 25;
  z.peak_value = 0.75;
  z.priority = 50;
  z.vehicles = {0, 3};
  const std::vector<ActionZone> zs{z};
  EXPECT_EQ(zones_csv(zs), "zone_id,center_x,center_y,radius,peak_value,priority,vehicles\n0,1.5,2.5,25,0.75,50,0 3\n");
  const std::vector<MetricsRow> rows(1);
  EXPECT_EQ(metrics_csv(rows), std::string(kMetricsHeader) + "0,aquafel,0,0,0,federated,0,0,0,0,0\n");
}

class ExperimentTest : public ::testing::Test {
 protected:
  GridMap map = load_map(AQUAFEL_DATA_DIR "/ypacarai.map");
  ExperimentSpec spec = [] {
    ExperimentSpec s;
    s.seed_count = 2;
    s.mission.max_distance_m = 4000;
    s.mission.exploration_distance_m = 3000;
    s.mission.exploitation_distance_m = 2000;
    return s;
  }();
  TempDir tmp;
};

TEST_F(ExperimentTest, RunSingleWritesFixedFileSet) {
  spec.mission.seed = 7;
  const auto m = run_single(spec, map, tmp.path);
  const fs::path dir = tmp.path / "aquafel" / "7";
  for (const char* f : {"metrics.csv", "mean.csv", "std.csv", "traj.csv", "zones.csv", "mean.pgm", "std.pgm"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(count_lines(slurp(dir / "metrics.csv")), 2u);
  EXPECT_EQ(count_lines(slurp(dir / "mean.csv")), static_cast<std::size_t>(map.rows()));
  EXPECT_EQ(m.row.wall_ms, 0.0);
}

TEST_F(ExperimentTest, CompareUsesSameTruthAndSpawnsPerSeed) {
  const auto r = run_compare(spec, map, tmp.path);
  EXPECT_EQ(r.summary.size(), 6u);
  EXPECT_EQ(r.rows.size(), 12u);
  EXPECT_EQ(count_lines(slurp(tmp.path / "compare.csv")), 7u);
  EXPECT_EQ(count_lines(slurp(tmp.path / "metrics.csv")), 13u);
  // every planner's first trajectory rows (the spawns) agree
  std::string first;
  for (Planner p : kAllPlanners) {
    const std::string traj = slurp(tmp.path / std::string(planner_name(p)) / "1" / "traj.csv");
    std::string line;
    std::string spawns;
    std::istringstream in(traj);
    std::getline(in, line);
    for (int v = 0; v < 4 && std::getline(in, line); ++v) {
      // step,vehicle,x,y
      std::size_t cut = line.size();
      int commas = 0;
      for (std::size_t i = 0; i < line.size(); ++i)
        if (line[i] == ',' && ++commas == 4) {
          cut = i;
          break;
        }
      spawns += line.substr(0, cut) + "\n";
    }
    if (first.empty()) first = spawns;
    EXPECT_EQ(spawns, first) << planner_name(p);
  }
  spec.planners = {Planner::aquafel};
  EXPECT_THROW(run_compare(spec, map, std::nullopt), ConfigError);
}

TEST_F(ExperimentTest, SweepTableShape) {
  spec.splits = {{5, 5}};
  auto r = run_sweep(spec, map, tmp.path);
  EXPECT_EQ(r.summary.size(), 1u);
  EXPECT_EQ(count_lines(slurp(tmp.path / "sweep.csv")), 2u);
  EXPECT_EQ(count_lines(slurp(tmp.path / "sweep_table.csv")), 2u);
  spec.splits = {{20, 15}};
  EXPECT_THROW(run_sweep(spec, map, std::nullopt), ConfigError);
  spec.splits = {{5, 5}};
  spec.seed_count = 1;
  EXPECT_THROW(run_sweep(spec, map, std::nullopt), ConfigError);
}

TEST_F(ExperimentTest, FedcmpDelta) {
  const auto r = run_fedcmp(spec, map, tmp.path);
  ASSERT_EQ(r.summary.size(), 2u);
  EXPECT_EQ(r.summary[0].mode, LearningMode::federated);
  EXPECT_EQ(r.summary[1].mode, LearningMode::centralized);
  EXPECT_EQ(count_lines(slurp(tmp.path / "fedcmp_delta.csv")), 4u);
  EXPECT_TRUE(fs::exists(tmp.path / "centralized" / "aquafel" / "0" / "mean.csv"));
}

TEST(Cli, RunIsByteIdenticalAcrossReruns) {
  TempDir tmp;
  const std::string base = "-q -o " + tmp.path.string() + " run --planner aquafel --vehicles 4 --seed 7 --explore-km 4 --exploit-km 3";
  ASSERT_EQ(cli(base + " -n a").code, 0);
  ASSERT_EQ(cli(base + " -n b").code, 0);
  const auto a = csv_hashes(tmp.path / "a");
  const auto b = csv_hashes(tmp.path / "b");
  EXPECT_EQ(a.size(), 7u);
  EXPECT_EQ(a, b);
}

TEST(Cli, ExitCodes) {
  const auto bad_planner = cli("run --planner zigzag");
  EXPECT_EQ(bad_planner.code, 2);
  EXPECT_NE(bad_planner.out.find("lawnmower, classic_pso"), std::string::npos);
  EXPECT_EQ(cli("run --no-such-flag").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("--set bogus.key=1 run").code, 2);
  EXPECT_EQ(cli("sweep --splits 20/15").code, 2);
  EXPECT_EQ(cli("--set map.path=/nonexistent/lake.map run").code, 3);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, ConfigFileAndEnvOutputRoot) {
  TempDir tmp;
  const fs::path cfg = tmp.path / "exp.ini";
  {
    std::ofstream(cfg) << "[mission]\nplanner = classic_pso\nmax_distance_m = 3000\nseed = 4\n";
  }
  const std::string env = "AQUAFEL_OUT=" + (tmp.path / "envroot").string() + " ";
  const std::string cmd = env + AQUAFEL_CLI + " -q -c " + cfg.string() + " -n x run > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_TRUE(fs::exists(tmp.path / "envroot" / "x" / "classic_pso" / "4" / "metrics.csv"));
  const std::string m = slurp(tmp.path / "envroot" / "x" / "classic_pso" / "4" / "metrics.csv");
  EXPECT_NE(m.find("4,classic_pso,4,3,0,"), std::string::npos) << m;
}
