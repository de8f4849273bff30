#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "aquafel/benchmark.hpp"
#include "aquafel/core.hpp"
#include "aquafel/mission.hpp"

namespace aquafel {

/// Flat key/value configuration: "key = value" lines, optional "[section]"
/// headers that prefix the following keys with "section.", '#' comments.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text) {
    ConfigFile cfg;
    std::string section;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(start, nl - start);
      start = nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) throw ParseError(line_no, "malformed section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, "expected \"key = value\"");
      const std::string_view key = trim(line.substr(0, eq));
      if (key.empty()) throw ParseError(line_no, "empty key");
      std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
      if (cfg.values_.contains(full)) throw ParseError(line_no, "duplicate key " + full);
      cfg.values_[full] = std::string(trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  static ConfigFile load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  bool contains(const std::string& key) const { return values_.contains(key); }

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  }

 private:
  std::map<std::string, std::string> values_;
};

/// One exploration/exploitation split of a phase sweep, in kilometres.
struct PhaseSplit {
  double exploration_km = 10.0;
  double exploitation_km = 10.0;

  friend bool operator==(const PhaseSplit&, const PhaseSplit&) = default;
};

/// Everything a batch of missions needs.
struct ExperimentSpec {
  MissionConfig mission;
  GroundTruthOptions truth;
  std::filesystem::path map_path = AQUAFEL_DATA_DIR "/ypacarai.map";
  double cell_size_m = 100.0;
  std::vector<Planner> planners{kAllPlanners.begin(), kAllPlanners.end()};
  std::uint64_t seed_start = 0;
  int seed_count = 30;
  std::vector<PhaseSplit> splits{{5, 15}, {10, 10}, {15, 5}};
  std::vector<int> fleet_sizes{4};
  std::filesystem::path output_dir = "out";
  std::string name;
  /// Writes measured wall time into metrics.csv; off by default so reruns are byte-identical.
  bool record_time = false;
};

namespace detail {

inline double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out)) throw ConfigError(key + ": not a number: " + std::string(v));
  return out;
}

inline long long to_int(const std::string& key, std::string_view v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError(key + ": not an integer: " + std::string(v));
  return out;
}

inline bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": not a boolean: " + std::string(v));
}

inline std::vector<std::string_view> split_list(std::string_view v, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    std::size_t at = v.find(sep, start);
    if (at == std::string_view::npos) at = v.size();
    const auto item = ConfigFile::trim(v.substr(start, at - start));
    if (!item.empty()) out.push_back(item);
    start = at + 1;
  }
  return out;
}

inline std::vector<Planner> parse_planners(const std::string& key, std::string_view v) {
  std::vector<Planner> out;
  for (auto item : split_list(v)) {
    if (item == "all") {
      out.assign(kAllPlanners.begin(), kAllPlanners.end());
      continue;
    }
    const auto p = parse_planner(item);
    if (!p) throw ConfigError(key + ": unknown planner '" + std::string(item) + "' (valid: " + planner_list() + ")");
    if (std::find(out.begin(), out.end(), *p) == out.end()) out.push_back(*p);
  }
  if (out.empty()) throw ConfigError(key + ": planner list is empty");
  return out;
}

/// "a..b" (inclusive) or a single integer.
inline std::pair<std::uint64_t, int> parse_seed_range(const std::string& key, std::string_view v) {
  const auto dots = v.find("..");
  if (dots == std::string_view::npos) return {static_cast<std::uint64_t>(to_int(key, v)), 1};
  const long long a = to_int(key, ConfigFile::trim(v.substr(0, dots)));
  const long long b = to_int(key, ConfigFile::trim(v.substr(dots + 2)));
  if (a < 0 || b < a) throw ConfigError(key + ": seed range must be a..b with 0 <= a <= b");
  return {static_cast<std::uint64_t>(a), static_cast<int>(b - a + 1)};
}

/// "5/15, 10/10" pairs of exploration/exploitation kilometres.
inline std::vector<PhaseSplit> parse_splits(const std::string& key, std::string_view v) {
  std::vector<PhaseSplit> out;
  for (auto item : split_list(v)) {
    const auto slash = item.find('/');
    if (slash == std::string_view::npos) throw ConfigError(key + ": split must look like 10/10, got " + std::string(item));
    out.push_back({to_double(key, ConfigFile::trim(item.substr(0, slash))),
                   to_double(key, ConfigFile::trim(item.substr(slash + 1)))});
  }
  if (out.empty()) throw ConfigError(key + ": split list is empty");
  return out;
}

/// "x y; x y" spawn coordinates in cells.
inline std::vector<Vec2> parse_points(const std::string& key, std::string_view v) {
  std::vector<Vec2> out;
  for (auto item : split_list(v, ';')) {
    const auto parts = split_list(item, ' ');
    if (parts.size() != 2) throw ConfigError(key + ": point must be \"x y\", got " + std::string(item));
    out.push_back({to_double(key, parts[0]), to_double(key, parts[1])});
  }
  return out;
}

}  // namespace detail

/// Applies one key to the spec. Unknown keys are an error so typos surface.
inline void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  using namespace detail;
  auto& m = spec.mission;
  const std::string_view v = ConfigFile::trim(value);
  if (key == "mission.planner") {
    const auto p = parse_planner(v);
    if (!p) throw ConfigError("unknown planner '" + std::string(v) + "' (valid: " + planner_list() + ")");
    m.planner = *p;
  } else if (key == "mission.vehicles") {
    m.n_vehicles = static_cast<int>(to_int(key, v));
  } else if (key == "mission.max_distance_m") {
    m.max_distance_m = to_double(key, v);
  } else if (key == "mission.exploration_distance_m") {
    m.exploration_distance_m = to_double(key, v);
  } else if (key == "mission.exploitation_distance_m") {
    m.exploitation_distance_m = to_double(key, v);
  } else if (key == "mission.max_distance_km") {
    m.max_distance_m = 1000.0 * to_double(key, v);
  } else if (key == "mission.exploration_km") {
    m.exploration_distance_m = 1000.0 * to_double(key, v);
  } else if (key == "mission.exploitation_km") {
    m.exploitation_distance_m = 1000.0 * to_double(key, v);
  } else if (key == "mission.learning_mode") {
    const auto lm = parse_learning_mode(v);
    if (!lm) throw ConfigError(key + ": expected federated or centralized");
    m.learning_mode = *lm;
  } else if (key == "mission.seed") {
    const long long s = to_int(key, v);
    if (s < 0) throw ConfigError(key + ": seed must be non-negative");
    m.seed = static_cast<std::uint64_t>(s);
  } else if (key == "mission.spawns") {
    m.spawns = parse_points(key, v);
  } else if (key == "mission.iteration_cap_factor") {
    m.iteration_cap_factor = to_double(key, v);
  } else if (key == "swarm.inertia") {
    m.inertia = to_double(key, v);
  } else if (key == "swarm.max_step_cells") {
    m.max_step_cells = to_double(key, v);
  } else if (key == "surrogate.lambda") {
    m.lambda = to_double(key, v);
  } else if (key == "surrogate.nugget") {
    m.gp.nugget = to_double(key, v);
  } else if (key == "surrogate.length_scale") {
    m.gp.length_scale_init = to_double(key, v);
  } else if (key == "surrogate.length_scale_min") {
    m.gp.length_scale_min = to_double(key, v);
  } else if (key == "surrogate.length_scale_max") {
    m.gp.length_scale_max = to_double(key, v);
  } else if (key == "surrogate.fit_length_scale") {
    m.gp.fit_length_scale = to_bool(key, v);
  } else if (key == "epsilon.start_m") {
    m.epsilon.d_eps0_m = to_double(key, v);
  } else if (key == "epsilon.end_m") {
    m.epsilon.d_epsf_m = to_double(key, v);
  } else if (key == "epsilon.decay") {
    m.epsilon.delta_eps = to_double(key, v);
  } else if (key == "lawnmower.swath_cells") {
    m.lawnmower_swath_cells = to_double(key, v);
  } else if (key == "benchmark.coordinate_scale") {
    spec.truth.coordinate_scale = to_double(key, v);
  } else if (key == "benchmark.c_min") {
    spec.truth.c_min = to_double(key, v);
  } else if (key == "benchmark.c_max") {
    spec.truth.c_max = to_double(key, v);
  } else if (key == "map.path") {
    spec.map_path = std::string(v);
  } else if (key == "map.cell_size_m") {
    spec.cell_size_m = to_double(key, v);
  } else if (key == "experiment.name") {
    spec.name = std::string(v);
  } else if (key == "experiment.planners") {
    spec.planners = parse_planners(key, v);
  } else if (key == "experiment.seeds") {
    std::tie(spec.seed_start, spec.seed_count) = parse_seed_range(key, v);
  } else if (key == "experiment.seed_count") {
    spec.seed_count = static_cast<int>(to_int(key, v));
  } else if (key == "experiment.splits_km") {
    spec.splits = parse_splits(key, v);
  } else if (key == "experiment.fleet_sizes") {
    spec.fleet_sizes.clear();
    for (auto item : split_list(v)) spec.fleet_sizes.push_back(static_cast<int>(to_int(key, item)));
  } else if (key == "experiment.output_dir") {
    spec.output_dir = std::string(v);
  } else if (key == "experiment.record_time") {
    spec.record_time = to_bool(key, v);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

inline void apply_config(ExperimentSpec& spec, const ConfigFile& file) {
  for (const auto& [k, v] : file.values()) apply_setting(spec, k, v);
}

/// Checks the cross-field invariants a batch relies on.
inline void validate(const ExperimentSpec& spec) {
  validate(spec.mission);
  if (spec.planners.empty()) throw ConfigError("experiment needs at least one planner");
  if (spec.seed_count < 1) throw ConfigError("experiment needs at least one seed");
  if (spec.fleet_sizes.empty()) throw ConfigError("experiment needs at least one fleet size");
  for (int n : spec.fleet_sizes)
    if (n < 2) throw ConfigError("fleet sizes must be at least 2");
  if (!(spec.cell_size_m > 0.0)) throw ConfigError("map.cell_size_m must be positive");
}

/// Sweep splits move in 5 km steps and must fit the vehicle autonomy.
inline void validate_splits(std::span<const PhaseSplit> splits) {
  if (splits.empty()) throw ConfigError("sweep needs at least one split");
  auto multiple_of_5 = [](double km) {
    const double q = km / 5.0;
    return km >= 0.0 && std::abs(q - std::round(q)) < 1e-9;
  };
  for (const auto& s : splits) {
    if (!multiple_of_5(s.exploration_km) || !multiple_of_5(s.exploitation_km))
      throw ConfigError("sweep distances must be non-negative multiples of 5 km");
    if (s.exploration_km + s.exploitation_km > kAutonomyM / 1000.0 + 1e-9)
      throw ConfigError("split " + std::to_string(static_cast<int>(s.exploration_km)) + "/" +
                        std::to_string(static_cast<int>(s.exploitation_km)) + " km exceeds the 30 km autonomy");
  }
}

}  // namespace aquafel
