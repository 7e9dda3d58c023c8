#include <catch2/catch_amalgamated.hpp>

#include "scalebench/config.hpp"

using namespace scalebench;

namespace {

nlohmann::json minimal_config() {
  return nlohmann::json{
      {"use_case", "UC2"},
      {"sut_profile", "flink-like"},
      {"load", {{"kind", "sensor_count"}, {"magnitudes", {1000, 2000}}}},
      {"resource", {{"kind", "instances"}, {"amounts", {1, 2, 3}}}},
  };
}

}  // namespace

TEST_CASE("minimal config parses with per-use-case defaults") {
  const BenchmarkConfig c = config_from_json(minimal_config());
  CHECK(c.use_case == UseCaseId::UC2);
  CHECK(c.profile.name == "flink-like");
  CHECK(c.duration_seconds == 300.0);  // UC1-UC3 default
  CHECK(c.warmup_seconds == 120.0);
  CHECK(c.repetitions == 3);
  CHECK(c.partitions == 100);
  CHECK(c.tick.tick_ms == 100);
  CHECK(c.strategy == SearchStrategy::linear);
  CHECK(c.lower_bound_restriction);
  CHECK_NOTHROW(c.validate());

  auto j4 = minimal_config();
  j4["use_case"] = "UC4";
  j4["load"]["kind"] = "nested_groups";
  j4["load"]["magnitudes"] = {1, 2, 3};
  const BenchmarkConfig c4 = config_from_json(j4);
  CHECK(c4.duration_seconds == 600.0);  // UC4 runs longer
  CHECK(c4.warmup_seconds == 240.0);
}

TEST_CASE("profiles resolve by name or inline") {
  auto j = minimal_config();
  SECTION("unknown name") {
    j["sut_profile"] = "unobtainium";
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
  }
  SECTION("builtin names exist") {
    for (const auto& [name, p] : builtin_profiles()) {
      j["sut_profile"] = name;
      CHECK(config_from_json(j).profile.name == name);
    }
  }
  SECTION("the 5% lag profile carries its ratio") {
    j["sut_profile"] = "beam-samza-like";
    CHECK(config_from_json(j).profile.lag_slo_ratio == 0.05);
  }
  SECTION("inline profile") {
    j["sut_profile"] = {{"name", "mine"},
                        {"cost_per_record", {{"UC2", 2.0}}},
                        {"capacity_per_core", 1234.0},
                        {"commit_interval", 5.0}};
    const BenchmarkConfig c = config_from_json(j);
    CHECK(c.profile.name == "mine");
    CHECK(c.profile.capacity_per_core == 1234.0);
    CHECK(c.profile.cost_for(UseCaseId::UC2) == 2.0);
    CHECK(c.profile.cost_for(UseCaseId::UC1) == 1.0);  // default
  }
  SECTION("zero cost is rejected") {
    j["sut_profile"] = {{"name", "broken"}, {"cost_per_record", {{"UC2", 0.0}}}};
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
  }
}

TEST_CASE("validation names the offending field") {
  SECTION("empty load grid") {
    auto j = minimal_config();
    j["load"]["magnitudes"] = nlohmann::json::array();
    try {
      config_from_json(j).validate();
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field_name == "load.magnitudes");
    }
  }
  SECTION("non-increasing grids") {
    auto j = minimal_config();
    j["load"]["magnitudes"] = {1000, 1000};
    CHECK_THROWS_AS(config_from_json(j).validate(), ConfigError);
    j = minimal_config();
    j["resource"]["amounts"] = {3, 2};
    CHECK_THROWS_AS(config_from_json(j).validate(), ConfigError);
  }
  SECTION("UC4 requires nested_groups and vice versa") {
    auto j = minimal_config();
    j["use_case"] = "UC4";
    CHECK_THROWS_AS(config_from_json(j).validate(), ConfigError);
    j = minimal_config();
    j["load"]["kind"] = "nested_groups";
    j["load"]["magnitudes"] = {1, 2};
    CHECK_THROWS_AS(config_from_json(j).validate(), ConfigError);
  }
  SECTION("window_duration_days needs base_sensors and UC3") {
    auto j = minimal_config();
    j["use_case"] = "UC3";
    j["load"]["kind"] = "window_duration_days";
    j["load"]["magnitudes"] = {3, 6};
    CHECK_THROWS_AS(config_from_json(j).validate(), ConfigError);
    j["load"]["base_sensors"] = 100;
    CHECK_NOTHROW(config_from_json(j).validate());
  }
  SECTION("bad tick alignment surfaces as a config error") {
    auto j = minimal_config();
    j["engine"] = {{"tick_ms", 300}};
    CHECK_THROWS_AS(config_from_json(j).validate(), ConfigError);
  }
}

TEST_CASE("config round-trips through its canonical json") {
  auto j = minimal_config();
  j["search"] = {{"strategy", "full"}, {"lower_bound_restriction", false}};
  j["engine"] = {{"partitions", 24}, {"tick_ms", 50}};
  j["repetitions"] = 1;
  j["duration"] = 60.0;
  j["warmup"] = 20.0;
  const BenchmarkConfig c1 = config_from_json(j);
  const nlohmann::json canon1 = config_to_json(c1);
  const BenchmarkConfig c2 = config_from_json(canon1);
  const nlohmann::json canon2 = config_to_json(c2);
  CHECK(canon1.dump() == canon2.dump());
  CHECK(run_id_for(c1) == run_id_for(c2));
}

TEST_CASE("run ids differ when the config differs") {
  const BenchmarkConfig a = config_from_json(minimal_config());
  auto j = minimal_config();
  j["repetitions"] = 5;
  const BenchmarkConfig b = config_from_json(j);
  CHECK(run_id_for(a) != run_id_for(b));
}

TEST_CASE("load_config reports parse errors") {
  CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ParseError);
}
