// aquafel: command-line front end for single missions and batch experiments.
//
// Exit codes: 0 ok, 2 usage or configuration error, 3 runtime failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aquafel/config.hpp"
#include "aquafel/experiment.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::string timestamp_name() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::string name;
  bool record_time = false;
  bool quiet = false;
  // key -> value pairs from convenience flags, applied after --set
  std::vector<std::pair<std::string, std::string>> flags;
};

void add_flag(CLI::App* cmd, Options& o, const std::string& flag, const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(flag, [&o, key](const std::string& v) { o.flags.emplace_back(key, v); }, help);
}

aquafel::ExperimentSpec build_spec(const Options& o) {
  aquafel::ExperimentSpec spec;
  if (!o.config_path.empty()) aquafel::apply_config(spec, aquafel::ConfigFile::load(o.config_path));
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw aquafel::ConfigError("--set expects key=value, got " + kv);
    aquafel::apply_setting(spec, std::string(aquafel::ConfigFile::trim(kv.substr(0, eq))), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : o.flags) aquafel::apply_setting(spec, k, v);
  if (!o.out.empty())
    spec.output_dir = o.out;
  else if (const char* env = std::getenv("AQUAFEL_OUT"); env && *env)
    spec.output_dir = env;
  if (!o.name.empty()) spec.name = o.name;
  if (spec.name.empty()) spec.name = timestamp_name();
  if (o.record_time) spec.record_time = true;
  return spec;
}

void print_summary(const std::vector<aquafel::SummaryRow>& rows) {
  std::printf("%-20s %4s %12s %12s %12s %12s %12s %12s\n", "label", "runs", "mse_map", "+/-", "mse_zones", "+/-",
              "peak_error", "+/-");
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::printf("%-20s %4zu %12.5f %12.5f %12.5f %12.5f %12.5f %12.5f\n", r.label.c_str(), m.mse_map.n, m.mse_map.mean,
                m.mse_map.ci_half_width, m.mse_action_zones.mean, m.mse_action_zones.ci_half_width,
                m.mean_peak_error.mean, m.mean_peak_error.ci_half_width);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AquaFeL-PSO lake monitoring simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("-c,--config", o.config_path, "config file (key = value, [section] headers)")->check(CLI::ExistingFile);
  app.add_option("--set", o.sets, "override any config key, e.g. --set swarm.inertia=0.6");
  app.add_option("-o,--out", o.out, "output root (default: $AQUAFEL_OUT, then experiment.output_dir)");
  app.add_option("-n,--name", o.name, "experiment directory name (default: timestamp)");
  app.add_flag("--record-time", o.record_time, "write measured wall time into metrics.csv");
  app.add_flag("-q,--quiet", o.quiet, "no per-mission progress lines");

  auto* run = app.add_subcommand("run", "run one mission and write its outputs");
  add_flag(run, o, "-p,--planner", "mission.planner", "planner name");
  add_flag(run, o, "-v,--vehicles", "mission.vehicles", "fleet size");
  add_flag(run, o, "-s,--seed", "mission.seed", "ground-truth and mission seed");
  add_flag(run, o, "--mode", "mission.learning_mode", "federated or centralized");

  auto* compare = app.add_subcommand("compare", "all planners on the same seeds");
  add_flag(compare, o, "--planners", "experiment.planners", "comma-separated planners or 'all'");
  add_flag(compare, o, "-v,--vehicles", "mission.vehicles", "fleet size");
  add_flag(compare, o, "--seeds", "experiment.seeds", "seed range a..b");

  auto* sweep = app.add_subcommand("sweep", "AquaFeL over exploration/exploitation splits");
  add_flag(sweep, o, "--splits", "experiment.splits_km", "e.g. 5/15,10/10,15/5 (km)");
  add_flag(sweep, o, "--fleet", "experiment.fleet_sizes", "comma-separated fleet sizes");
  add_flag(sweep, o, "--seeds", "experiment.seeds", "seed range a..b");

  auto* fedcmp = app.add_subcommand("fedcmp", "AquaFeL with federated vs centralized learning");
  add_flag(fedcmp, o, "-v,--vehicles", "mission.vehicles", "fleet size");
  add_flag(fedcmp, o, "--seeds", "experiment.seeds", "seed range a..b");

  for (auto* cmd : {run, compare, fedcmp}) {
    add_flag(cmd, o, "--explore-km", "mission.exploration_km", "AquaFeL exploration distance per vehicle (km)");
    add_flag(cmd, o, "--exploit-km", "mission.exploitation_km", "AquaFeL exploitation distance per vehicle (km)");
  }
  add_flag(run, o, "--max-km", "mission.max_distance_km", "single-phase planner budget per vehicle (km)");
  add_flag(compare, o, "--max-km", "mission.max_distance_km", "single-phase planner budget per vehicle (km)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  aquafel::ExperimentSpec spec;
  try {
    spec = build_spec(o);
    aquafel::validate(spec);
  } catch (const aquafel::Error& e) {
    std::cerr << "aquafel: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const aquafel::GridMap map = aquafel::load_spec_map(spec);
    const std::filesystem::path dir = spec.output_dir / spec.name;
    aquafel::ProgressFn progress;
    if (!o.quiet)
      progress = [](const aquafel::MetricsRow& r) {
        std::fprintf(stderr, "%-16s seed %-4llu n=%d %s mse_map %.5f peak %.4f\n",
                     std::string(aquafel::planner_name(r.planner)).c_str(), static_cast<unsigned long long>(r.seed),
                     r.n_vehicles, std::string(aquafel::learning_mode_name(r.learning_mode)).c_str(), r.mse_map,
                     r.mean_peak_error);
      };

    if (run->parsed()) {
      const auto m = aquafel::run_single(spec, map, dir);
      std::printf("%s seed %llu: mse_map %.6f mse_zones %.6f mean_peak_error %.6f samples %zu\n",
                  std::string(aquafel::planner_name(m.row.planner)).c_str(),
                  static_cast<unsigned long long>(m.row.seed), m.row.mse_map, m.row.mse_zones, m.row.mean_peak_error,
                  m.row.samples_taken);
    } else if (compare->parsed()) {
      print_summary(aquafel::run_compare(spec, map, dir, progress).summary);
    } else if (sweep->parsed()) {
      print_summary(aquafel::run_sweep(spec, map, dir, progress).summary);
    } else if (fedcmp->parsed()) {
      const auto r = aquafel::run_fedcmp(spec, map, dir, progress);
      print_summary(r.summary);
      std::printf("|federated - centralized| mse_map: %.6f\n",
                  std::abs(r.summary[0].metrics.mse_map.mean - r.summary[1].metrics.mse_map.mean));
    }
    std::printf("outputs: %s\n", dir.string().c_str());
  } catch (const aquafel::ConfigError& e) {
    std::cerr << "aquafel: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "aquafel: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
