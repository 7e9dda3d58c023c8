#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalebench/windowing.hpp"
#include "scalebench/workload.hpp"

namespace scalebench {

enum class UseCaseId { UC1, UC2, UC3, UC4 };

inline std::string to_string(UseCaseId id) {
  switch (id) {
    case UseCaseId::UC1: return "UC1";
    case UseCaseId::UC2: return "UC2";
    case UseCaseId::UC3: return "UC3";
    case UseCaseId::UC4: return "UC4";
  }
  return "?";
}

inline UseCaseId use_case_from_string(const std::string& s) {
  if (s == "UC1") return UseCaseId::UC1;
  if (s == "UC2") return UseCaseId::UC2;
  if (s == "UC3") return UseCaseId::UC3;
  if (s == "UC4") return UseCaseId::UC4;
  throw std::invalid_argument("unknown use case: " + s);
}

enum class StageKind {
  sink,       // stateless counting sink (stands in for the DB-write side effect)
  shuffle,    // re-keys records and forwards them to a repartition topic
  window_agg  // keyed windowed aggregation
};

/// How a window_agg stage derives its state key from a record.
enum class KeyMode {
  record_key,   // state keyed by the record key as-is
  key_and_hour  // state keyed by (record key, hour of day of the event time)
};

/// One operator in a dataflow. Work is charged per consumed record:
/// cost_multiplier * profile cost (window_agg stages with k windows per
/// record charge k times the base cost). steady_rate_* give the stage's
/// steady-state consumption rate as a linear function of the input load
/// (records/s = rate_per_input * load + rate_const); this is the closed-form
/// basis of the analytic demand oracle.
struct StageDef {
  std::string name;
  StageKind kind = StageKind::window_agg;
  std::string input_topic;
  WindowSpec window;                 // window_agg only
  KeyMode key_mode = KeyMode::record_key;
  double cost_multiplier = 1.0;
  std::string forward_topic;         // empty: no downstream stage
  bool forward_rekey_parent = false; // forwarded records keyed by parent id
  double steady_rate_per_input = 0.0;
  double steady_rate_const = 0.0;
};

/// A dataflow over the partitioned log: the stages in pipeline order plus
/// the topics they wire together. Final window results always go to
/// output_topic; repartition topics feed the next stage.
struct UseCase {
  UseCaseId id = UseCaseId::UC1;
  std::string input_topic = "input";
  std::string output_topic = "output";
  std::vector<std::string> intermediate_topics;
  std::vector<StageDef> stages;
  SensorHierarchy hierarchy;  // UC4 only
  int uc3_duration_days = 0;  // UC3 only

  /// All topics the deployment consumes (stage inputs), in pipeline order.
  std::vector<std::string> consumed_topics() const {
    std::vector<std::string> t;
    for (const StageDef& s : stages) t.push_back(s.input_topic);
    return t;
  }
};

/// UC1: stateless sink. Every incoming message bumps a counter, simulating
/// the log-statement database write.
inline UseCase uc1_pipeline() {
  UseCase uc;
  uc.id = UseCaseId::UC1;
  StageDef s;
  s.name = "sink";
  s.kind = StageKind::sink;
  s.input_topic = uc.input_topic;
  s.steady_rate_per_input = 1.0;
  uc.stages.push_back(std::move(s));
  return uc;
}

/// UC2: per-sensor tumbling window of one minute, zero grace; out-of-order
/// records arriving after the window closed are discarded.
inline UseCase uc2_pipeline() {
  UseCase uc;
  uc.id = UseCaseId::UC2;
  StageDef s;
  s.name = "aggregate";
  s.kind = StageKind::window_agg;
  s.input_topic = uc.input_topic;
  s.window = tumbling_window(60'000);
  s.steady_rate_per_input = 1.0;
  uc.stages.push_back(std::move(s));
  return uc;
}

/// UC3: hour-of-day aggregation over a hopping window (duration_days days,
/// one-day slide), early results every 5 seconds of virtual time. Records
/// stay keyed by sensor, so the (sensor, hour) state is instance-local and
/// no repartition is needed. Each record updates duration_days windows,
/// which is charged as cost_multiplier.
inline UseCase uc3_pipeline(int duration_days = 3) {
  if (duration_days < 1) throw std::invalid_argument("uc3: duration_days must be >= 1");
  constexpr std::int64_t day_ms = 86'400'000;
  UseCase uc;
  uc.id = UseCaseId::UC3;
  uc.uc3_duration_days = duration_days;
  StageDef s;
  s.name = "aggregate";
  s.kind = StageKind::window_agg;
  s.input_topic = uc.input_topic;
  s.window = hopping_window(duration_days * day_ms, day_ms, 0, 5'000);
  s.key_mode = KeyMode::key_and_hour;
  s.cost_multiplier = static_cast<double>(duration_days);
  s.steady_rate_per_input = 1.0;
  uc.stages.push_back(std::move(s));
  return uc;
}

/// UC4: hierarchical aggregation without a feedback loop. Raw records are
/// re-keyed to their leaf group (shuffle), then each of the depth-many
/// stages aggregates one hierarchy level over a 60 s tumbling window and
/// repartitions its results by parent id for the next stage. Every group's
/// final aggregate is also published to the output topic, so there is one
/// output per group per window.
inline UseCase uc4_pipeline(const SensorHierarchy& hierarchy) {
  if (hierarchy.depth < 1) throw std::invalid_argument("uc4: hierarchy is empty");
  const int n = hierarchy.depth;
  UseCase uc;
  uc.id = UseCaseId::UC4;
  uc.hierarchy = hierarchy;
  for (int j = 0; j < n; ++j)
    uc.intermediate_topics.push_back("repart-" + std::to_string(j));

  StageDef shuffle;
  shuffle.name = "shuffle";
  shuffle.kind = StageKind::shuffle;
  shuffle.input_topic = uc.input_topic;
  shuffle.forward_topic = uc.intermediate_topics[0];
  shuffle.forward_rekey_parent = true;
  shuffle.steady_rate_per_input = 1.0;
  uc.stages.push_back(std::move(shuffle));

  // groups at the level stage j aggregates into: 4^(n-1-j)
  double groups_at_level = 1.0;
  for (int i = 0; i < n - 1; ++i) groups_at_level *= 4.0;
  for (int j = 0; j < n; ++j) {
    StageDef agg;
    agg.name = "aggregate-" + std::to_string(j);
    agg.kind = StageKind::window_agg;
    agg.input_topic = uc.intermediate_topics[static_cast<std::size_t>(j)];
    agg.window = tumbling_window(60'000);
    if (j == 0) {
      agg.steady_rate_per_input = 1.0;  // consumes the re-keyed raw stream
    } else {
      // consumes one aggregate per group of the previous level per window
      agg.steady_rate_const = groups_at_level * 4.0 / 60.0;
    }
    if (j + 1 < n) {
      agg.forward_topic = uc.intermediate_topics[static_cast<std::size_t>(j + 1)];
      agg.forward_rekey_parent = true;
    }
    uc.stages.push_back(std::move(agg));
    groups_at_level /= 4.0;
  }
  return uc;
}

/// Builds the pipeline for a use case under a given load.
inline UseCase make_use_case(UseCaseId id, const LoadSpec& load, int uc3_duration_days = 3) {
  switch (id) {
    case UseCaseId::UC1: return uc1_pipeline();
    case UseCaseId::UC2: return uc2_pipeline();
    case UseCaseId::UC3:
      return uc3_pipeline(load.kind == LoadKind::window_duration_days
                              ? static_cast<int>(load.magnitude)
                              : uc3_duration_days);
    case UseCaseId::UC4: {
      if (load.kind != LoadKind::nested_groups)
        throw std::invalid_argument("UC4 requires a nested_groups load");
      return uc4_pipeline(build_hierarchy(static_cast<int>(load.magnitude)));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace scalebench
