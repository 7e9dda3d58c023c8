#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scalebench/engine.hpp"
#include "scalebench/orchestrator.hpp"

namespace scalebench {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& field, const std::string& why)
      : std::runtime_error("config field '" + field + "': " + why), field_name(field) {}
  std::string field_name;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Illustrative framework profiles. The shapes (which use cases are cheap or
/// expensive for which profile) are qualitative; none of the numbers are
/// measurements.
inline std::map<std::string, SutProfile> builtin_profiles() {
  auto mk = [](std::string name, double c1, double c2, double c3, double c4,
               double lag_ratio) {
    SutProfile p;
    p.name = std::move(name);
    p.cost_per_record = {{UseCaseId::UC1, c1},
                         {UseCaseId::UC2, c2},
                         {UseCaseId::UC3, c3},
                         {UseCaseId::UC4, c4}};
    p.capacity_per_core = 10'000.0;
    p.lag_slo_ratio = lag_ratio;
    return p;
  };
  std::map<std::string, SutProfile> m;
  m["flink-like"] = mk("flink-like", 1.0, 1.0, 1.0, 1.0, 0.01);
  m["kstreams-like"] = mk("kstreams-like", 1.1, 1.2, 1.5, 1.0, 0.01);
  m["hazelcast-like"] = mk("hazelcast-like", 1.2, 0.6, 0.4, 4.0, 0.01);
  m["beam-flink-like"] = mk("beam-flink-like", 2.5, 2.5, 2.5, 2.5, 0.01);
  // the 5% lag-trend profile
  m["beam-samza-like"] = mk("beam-samza-like", 3.0, 3.0, 2.5, 3.0, 0.05);
  return m;
}

enum class SearchStrategy { linear, full, load_capacity };

inline std::string to_string(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::linear: return "linear";
    case SearchStrategy::full: return "full";
    case SearchStrategy::load_capacity: return "load_capacity";
  }
  return "?";
}

/// Declarative benchmark description: which use case, which SUT profile,
/// the load and resource grids, the search strategy, and the run layout.
struct BenchmarkConfig {
  UseCaseId use_case = UseCaseId::UC1;
  SutProfile profile;

  LoadKind load_kind = LoadKind::sensor_count;
  std::vector<std::int64_t> load_magnitudes;
  std::int64_t base_sensors = 0;
  double p_late = 0.0;
  double d_late_seconds = 90.0;

  ResourceKind resource_kind = ResourceKind::instances;
  std::vector<int> resource_amounts;
  int instances = 1;  // fixed axis value when scanning cores
  int cores = 1;      // fixed axis value when scanning instances

  SearchStrategy strategy = SearchStrategy::linear;
  bool lower_bound_restriction = true;
  bool parallel_cells = false;

  double duration_seconds = -1.0;  // <0: per-use-case default
  double warmup_seconds = -1.0;
  int repetitions = 3;
  RepetitionRule repetition_rule = RepetitionRule::majority;

  TickConfig tick;
  std::uint32_t partitions = 100;
  bool balanced_keys = true;
  int uc3_duration_days = 3;

  bool deterministic = true;  // virtual time; false = wall-clock mode
  double wallclock_time_scale = 1.0;

  std::string output_dir = "results";

  /// Fills per-use-case duration defaults (5 min / 2 min warm-up; UC4 runs
  /// 10 min with a 4 min warm-up).
  void apply_defaults() {
    if (duration_seconds < 0)
      duration_seconds = use_case == UseCaseId::UC4 ? 600.0 : 300.0;
    if (warmup_seconds < 0)
      warmup_seconds = use_case == UseCaseId::UC4 ? 240.0 : 120.0;
  }

  void validate() const {
    if (load_magnitudes.empty()) throw ConfigError("load.magnitudes", "must be non-empty");
    for (std::size_t i = 1; i < load_magnitudes.size(); ++i)
      if (load_magnitudes[i] <= load_magnitudes[i - 1])
        throw ConfigError("load.magnitudes", "must be strictly increasing");
    if (resource_amounts.empty())
      throw ConfigError("resource.amounts", "must be non-empty");
    for (std::size_t i = 1; i < resource_amounts.size(); ++i)
      if (resource_amounts[i] <= resource_amounts[i - 1])
        throw ConfigError("resource.amounts", "must be strictly increasing");
    if (resource_amounts.front() < 1)
      throw ConfigError("resource.amounts", "amounts must be >= 1");
    if (use_case == UseCaseId::UC4 && load_kind != LoadKind::nested_groups)
      throw ConfigError("load.kind", "UC4 scales load via nested_groups");
    if (load_kind == LoadKind::nested_groups && use_case != UseCaseId::UC4)
      throw ConfigError("load.kind", "nested_groups load applies to UC4 only");
    if (load_kind == LoadKind::window_duration_days) {
      if (use_case != UseCaseId::UC3)
        throw ConfigError("load.kind", "window_duration_days load applies to UC3 only");
      if (base_sensors < 1)
        throw ConfigError("load.base_sensors", "must be >= 1 for window_duration_days");
    }
    if (p_late < 0 || p_late > 1) throw ConfigError("load.p_late", "must be in [0,1]");
    try {
      base_experiment_spec().validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("(experiment)", e.what());
    }
  }

  ExperimentSpec base_experiment_spec() const {
    ExperimentSpec s;
    s.use_case = use_case;
    s.profile = profile;
    s.load.kind = load_kind;
    s.load.magnitude = load_magnitudes.empty() ? 1 : load_magnitudes.front();
    s.load.base_sensors = base_sensors;
    s.load.p_late = p_late;
    s.load.d_late_seconds = d_late_seconds;
    s.resource.kind = resource_kind;
    s.resource.instances = instances;
    s.resource.cores = cores;
    s.resource = s.resource.with_amount(resource_amounts.empty() ? 1 : resource_amounts.front());
    s.duration_seconds = duration_seconds;
    s.warmup_seconds = warmup_seconds;
    s.repetitions = repetitions;
    s.repetition_rule = repetition_rule;
    s.tick = tick;
    s.partitions = partitions;
    s.balanced_keys = balanced_keys;
    s.uc3_duration_days = uc3_duration_days;
    s.virtual_time = deterministic;
    s.wallclock_time_scale = wallclock_time_scale;
    return s;
  }
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

inline LoadKind load_kind_from_string(const std::string& s) {
  if (s == "sensor_count") return LoadKind::sensor_count;
  if (s == "nested_groups") return LoadKind::nested_groups;
  if (s == "window_duration_days") return LoadKind::window_duration_days;
  throw ConfigError("load.kind", "unknown kind '" + s + "'");
}

inline ResourceKind resource_kind_from_string(const std::string& s) {
  if (s == "instances") return ResourceKind::instances;
  if (s == "cores_per_instance") return ResourceKind::cores_per_instance;
  throw ConfigError("resource.kind", "unknown kind '" + s + "'");
}

inline SearchStrategy strategy_from_string(const std::string& s) {
  if (s == "linear") return SearchStrategy::linear;
  if (s == "full") return SearchStrategy::full;
  if (s == "load_capacity") return SearchStrategy::load_capacity;
  throw ConfigError("search.strategy", "unknown strategy '" + s + "'");
}

inline SutProfile profile_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto profiles = builtin_profiles();
    auto it = profiles.find(j.get<std::string>());
    if (it == profiles.end())
      throw ConfigError("sut_profile", "unknown profile '" + j.get<std::string>() + "'");
    return it->second;
  }
  if (!j.is_object()) throw ConfigError("sut_profile", "must be a name or an object");
  SutProfile p;
  p.name = get_or<std::string>(j, "name", "custom");
  if (j.contains("cost_per_record")) {
    for (const auto& [uc, cost] : j.at("cost_per_record").items())
      p.cost_per_record[use_case_from_string(uc)] = cost.get<double>();
  }
  p.capacity_per_core = get_or<double>(j, "capacity_per_core", p.capacity_per_core);
  p.commit_interval_seconds = get_or<double>(j, "commit_interval", p.commit_interval_seconds);
  p.lag_slo_ratio = get_or<double>(j, "lag_slo_ratio", p.lag_slo_ratio);
  p.dropped_slo_ratio = get_or<double>(j, "dropped_slo_ratio", p.dropped_slo_ratio);
  p.core_efficiency = get_or<double>(j, "core_efficiency", p.core_efficiency);
  p.sink_cost_per_record = get_or<double>(j, "sink_cost_per_record", p.sink_cost_per_record);
  p.global_sink_contention =
      get_or<bool>(j, "global_sink_contention", p.global_sink_contention);
  p.sink_capacity_per_sec = get_or<double>(j, "sink_capacity_per_sec", p.sink_capacity_per_sec);
  p.disorder_allowance_ms =
      get_or<std::int64_t>(j, "disorder_allowance_ms", p.disorder_allowance_ms);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sut_profile", e.what());
  }
  return p;
}

inline nlohmann::json profile_to_json(const SutProfile& p) {
  nlohmann::json costs;
  for (const auto& [uc, c] : p.cost_per_record) costs[to_string(uc)] = c;
  nlohmann::json j{{"name", p.name},
                   {"cost_per_record", costs},
                   {"capacity_per_core", p.capacity_per_core},
                   {"commit_interval", p.commit_interval_seconds},
                   {"lag_slo_ratio", p.lag_slo_ratio},
                   {"dropped_slo_ratio", p.dropped_slo_ratio},
                   {"core_efficiency", p.core_efficiency},
                   {"sink_cost_per_record", p.sink_cost_per_record},
                   {"global_sink_contention", p.global_sink_contention},
                   {"sink_capacity_per_sec", p.sink_capacity_per_sec},
                   {"disorder_allowance_ms", p.disorder_allowance_ms}};
  return j;
}

}  // namespace detail

inline BenchmarkConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("(root)", "config must be a JSON object");
  BenchmarkConfig c;
  if (!j.contains("use_case")) throw ConfigError("use_case", "is required");
  c.use_case = use_case_from_string(j.at("use_case").get<std::string>());
  if (!j.contains("sut_profile")) throw ConfigError("sut_profile", "is required");
  c.profile = detail::profile_from_json(j.at("sut_profile"));

  if (!j.contains("load") || !j.at("load").is_object())
    throw ConfigError("load", "is required");
  const auto& jl = j.at("load");
  c.load_kind = detail::load_kind_from_string(
      detail::get_or<std::string>(jl, "kind", "sensor_count"));
  c.load_magnitudes = detail::get_or<std::vector<std::int64_t>>(jl, "magnitudes", {});
  c.base_sensors = detail::get_or<std::int64_t>(jl, "base_sensors", 0);
  c.p_late = detail::get_or<double>(jl, "p_late", 0.0);
  c.d_late_seconds = detail::get_or<double>(jl, "d_late_seconds", 90.0);

  if (!j.contains("resource") || !j.at("resource").is_object())
    throw ConfigError("resource", "is required");
  const auto& jr = j.at("resource");
  c.resource_kind = detail::resource_kind_from_string(
      detail::get_or<std::string>(jr, "kind", "instances"));
  c.resource_amounts = detail::get_or<std::vector<int>>(jr, "amounts", {});
  c.instances = detail::get_or<int>(jr, "instances", 1);
  c.cores = detail::get_or<int>(jr, "cores", 1);

  if (j.contains("search")) {
    const auto& js = j.at("search");
    c.strategy = detail::strategy_from_string(
        detail::get_or<std::string>(js, "strategy", "linear"));
    c.lower_bound_restriction = detail::get_or<bool>(js, "lower_bound_restriction", true);
    c.parallel_cells = detail::get_or<bool>(js, "parallel_cells", false);
  }

  c.duration_seconds = detail::get_or<double>(j, "duration", -1.0);
  c.warmup_seconds = detail::get_or<double>(j, "warmup", -1.0);
  c.repetitions = detail::get_or<int>(j, "repetitions", 3);
  const std::string rule = detail::get_or<std::string>(j, "repetition_rule", "majority");
  if (rule == "majority")
    c.repetition_rule = RepetitionRule::majority;
  else if (rule == "all")
    c.repetition_rule = RepetitionRule::all;
  else
    throw ConfigError("repetition_rule", "must be 'majority' or 'all'");

  if (j.contains("engine")) {
    const auto& je = j.at("engine");
    c.partitions = detail::get_or<std::uint32_t>(je, "partitions", 100);
    c.tick.tick_ms = detail::get_or<std::int64_t>(je, "tick_ms", 100);
    c.balanced_keys = detail::get_or<bool>(je, "balanced_keys", true);
    c.uc3_duration_days = detail::get_or<int>(je, "uc3_duration_days", 3);
  }
  c.deterministic = detail::get_or<bool>(j, "deterministic", true);
  c.wallclock_time_scale = detail::get_or<double>(j, "wallclock_time_scale", 1.0);
  c.output_dir = detail::get_or<std::string>(j, "output_dir", "results");

  c.apply_defaults();
  return c;
}

/// Canonical resolved form: re-parsing it reproduces the exact run.
inline nlohmann::json config_to_json(const BenchmarkConfig& c) {
  nlohmann::json j;
  j["use_case"] = to_string(c.use_case);
  j["sut_profile"] = detail::profile_to_json(c.profile);
  j["load"] = {{"kind", to_string(c.load_kind)},
               {"magnitudes", c.load_magnitudes},
               {"base_sensors", c.base_sensors},
               {"p_late", c.p_late},
               {"d_late_seconds", c.d_late_seconds}};
  j["resource"] = {{"kind", to_string(c.resource_kind)},
                   {"amounts", c.resource_amounts},
                   {"instances", c.instances},
                   {"cores", c.cores}};
  j["search"] = {{"strategy", to_string(c.strategy)},
                 {"lower_bound_restriction", c.lower_bound_restriction},
                 {"parallel_cells", c.parallel_cells}};
  j["duration"] = c.duration_seconds;
  j["warmup"] = c.warmup_seconds;
  j["repetitions"] = c.repetitions;
  j["repetition_rule"] = c.repetition_rule == RepetitionRule::majority ? "majority" : "all";
  j["engine"] = {{"partitions", c.partitions},
                 {"tick_ms", c.tick.tick_ms},
                 {"balanced_keys", c.balanced_keys},
                 {"uc3_duration_days", c.uc3_duration_days}};
  j["deterministic"] = c.deterministic;
  j["wallclock_time_scale"] = c.wallclock_time_scale;
  j["output_dir"] = c.output_dir;
  return j;
}

inline BenchmarkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

/// Stable run id derived from the resolved config, so identical configs land
/// in the same results directory.
inline std::string run_id_for(const BenchmarkConfig& c) {
  const std::string canon = config_to_json(c).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canon)));
  return std::string("run-") + buf;
}

}  // namespace scalebench
