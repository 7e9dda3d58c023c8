#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalebench/plog.hpp"

namespace scalebench {

enum class LoadKind { sensor_count, nested_groups, window_duration_days };

inline std::string to_string(LoadKind k) {
  switch (k) {
    case LoadKind::sensor_count: return "sensor_count";
    case LoadKind::nested_groups: return "nested_groups";
    case LoadKind::window_duration_days: return "window_duration_days";
  }
  return "?";
}

/// One load intensity. For nested_groups, magnitude is the hierarchy depth
/// and the generator simulates 4^magnitude sensors. For
/// window_duration_days, magnitude is the aggregation duration in days and
/// the message rate stays at base_sensors.
struct LoadSpec {
  LoadKind kind = LoadKind::sensor_count;
  std::int64_t magnitude = 1;
  std::int64_t base_sensors = 0;  // window_duration_days only

  // Out-of-order injection: every ceil(1/p_late)-th record carries an event
  // time d_late seconds behind its arrival time. Stride selection, no RNG.
  double p_late = 0.0;
  double d_late_seconds = 90.0;
};

/// Each simulated sensor emits one measurement per second.
inline std::int64_t messages_per_second(const LoadSpec& spec) {
  if (spec.magnitude < 1) throw std::invalid_argument("load magnitude must be >= 1");
  switch (spec.kind) {
    case LoadKind::sensor_count:
      return spec.magnitude;
    case LoadKind::nested_groups: {
      if (spec.magnitude > 26)
        throw std::overflow_error("nested_groups: 4^magnitude exceeds 2^53");
      std::int64_t sensors = 1;
      for (std::int64_t i = 0; i < spec.magnitude; ++i) sensors *= 4;
      return sensors;
    }
    case LoadKind::window_duration_days:
      if (spec.base_sensors < 1)
        throw std::invalid_argument("window_duration_days load needs base_sensors >= 1");
      return spec.base_sensors;
  }
  throw std::logic_error("unreachable");
}

/// Complete 4-ary tree of sensor groups. depth n gives 4^n sensors (leaves)
/// and (4^n - 1) / 3 internal group nodes including the root. Ids are path
/// strings: sensors "g0.g2.s3", groups "g0.g2", root "root".
struct SensorHierarchy {
  int depth = 0;
  int fan_out = 4;
  std::vector<std::string> sensors;  // leaves, in path order
  std::vector<std::string> groups;   // internal nodes incl. root
  std::map<std::string, std::string> parent;

  const std::string& parent_of(const std::string& id) const {
    auto it = parent.find(id);
    if (it == parent.end()) throw std::out_of_range("unknown hierarchy node: " + id);
    return it->second;
  }
};

inline SensorHierarchy build_hierarchy(int depth) {
  if (depth < 1 || depth > 12)
    throw std::invalid_argument("hierarchy depth must be in [1, 12]");
  SensorHierarchy h;
  h.depth = depth;
  h.groups.push_back("root");
  std::vector<std::string> level = {""};  // path prefixes, root == empty
  for (int d = 1; d < depth; ++d) {
    std::vector<std::string> next;
    for (const std::string& prefix : level) {
      for (int i = 0; i < h.fan_out; ++i) {
        std::string id = prefix.empty() ? "g" + std::to_string(i)
                                        : prefix + ".g" + std::to_string(i);
        h.groups.push_back(id);
        h.parent[id] = prefix.empty() ? "root" : prefix;
        next.push_back(id);
      }
    }
    level = std::move(next);
  }
  for (const std::string& prefix : level) {
    for (int i = 0; i < h.fan_out; ++i) {
      std::string id = prefix.empty() ? "s" + std::to_string(i)
                                      : prefix + ".s" + std::to_string(i);
      h.sensors.push_back(id);
      h.parent[id] = prefix.empty() ? "root" : prefix;
    }
  }
  return h;
}

/// Sensor ids whose FNV-1a partition assignment is as even as possible:
/// candidate ids "s-0", "s-1", ... are scanned in order and kept only while
/// their partition still has quota. Deterministic, no RNG.
inline std::vector<std::string> make_balanced_sensor_ids(std::int64_t count,
                                                         std::uint32_t partitions) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(count));
  std::vector<std::int64_t> quota(partitions, count / partitions);
  for (std::uint32_t p = 0; p < count % partitions; ++p) ++quota[p];
  const std::int64_t scan_limit = 200 * count + 100000;
  for (std::int64_t c = 0; c < scan_limit && ids.size() < static_cast<std::size_t>(count); ++c) {
    std::string id = "s-" + std::to_string(c);
    std::uint32_t p = partition_for_key(id, partitions);
    if (quota[p] > 0) {
      --quota[p];
      ids.push_back(std::move(id));
    }
  }
  // Tail fill, in case the scan budget ran out on a pathological quota.
  for (std::int64_t c = 0; ids.size() < static_cast<std::size_t>(count); ++c)
    ids.push_back("s#" + std::to_string(c));
  return ids;
}

struct TickConfig {
  std::int64_t tick_ms = 100;

  void validate() const {
    if (tick_ms < 1 || 1000 % tick_ms != 0)
      throw std::invalid_argument("tick_ms must divide 1 second evenly");
  }
  std::int64_t ticks_per_second() const { return 1000 / tick_ms; }
};

/// Deterministic load generator. The records of tick i are a pure function
/// of (spec, i): global record indices [floor(r*i/tps), floor(r*(i+1)/tps))
/// are emitted round-robin over the sensor ids, with event_time = tick start.
/// Values are small integers (index mod 97), so aggregate sums are exact in
/// floating point regardless of reduction order.
class LoadGenerator {
 public:
  LoadGenerator(LoadSpec spec, TickConfig tick, std::uint32_t partitions,
                bool balanced_keys = true)
      : spec_(spec), tick_(tick), rate_(messages_per_second(spec)) {
    tick_.validate();
    if (spec_.kind == LoadKind::nested_groups) {
      hierarchy_ = build_hierarchy(static_cast<int>(spec_.magnitude));
      sensor_ids_ = hierarchy_.sensors;
    } else if (balanced_keys) {
      sensor_ids_ = make_balanced_sensor_ids(rate_, partitions);
    } else {
      sensor_ids_.reserve(static_cast<std::size_t>(rate_));
      for (std::int64_t i = 0; i < rate_; ++i)
        sensor_ids_.push_back("s-" + std::to_string(i));
    }
    if (spec_.p_late > 0) {
      if (spec_.p_late > 1) throw std::invalid_argument("p_late must be <= 1");
      // ceil(1/p), tolerant of p values like 1/3 that round up in binary
      late_stride_ = static_cast<std::int64_t>(std::ceil(1.0 / spec_.p_late - 1e-9));
      if (late_stride_ < 1) late_stride_ = 1;
    }
  }

  std::int64_t rate() const { return rate_; }
  const SensorHierarchy& hierarchy() const { return hierarchy_; }
  std::int64_t late_stride() const { return late_stride_; }

  /// Records generated in ticks [0, tick_count), exact integer pacing.
  std::int64_t records_up_to(std::int64_t tick_count) const {
    return rate_ * tick_count / tick_.ticks_per_second();
  }

  /// Appends this tick's records to `topic`. Returns the count appended.
  std::size_t generate_tick(std::int64_t tick_index, Broker& broker,
                            const std::string& topic) {
    const std::int64_t begin = records_up_to(tick_index);
    const std::int64_t end = records_up_to(tick_index + 1);
    const std::int64_t t_ms = tick_index * tick_.tick_ms;
    buf_.clear();
    buf_.reserve(static_cast<std::size_t>(end - begin));
    for (std::int64_t idx = begin; idx < end; ++idx) {
      Record r;
      r.key = sensor_ids_[static_cast<std::size_t>(idx % rate_)];
      r.event_time_ms = t_ms;
      if (late_stride_ > 0 && idx % late_stride_ == late_stride_ - 1) {
        std::int64_t late_ms =
            t_ms - static_cast<std::int64_t>(spec_.d_late_seconds * 1000.0);
        r.event_time_ms = late_ms < 0 ? 0 : late_ms;
      }
      r.value = static_cast<double>(idx % 97);
      buf_.push_back(std::move(r));
    }
    return broker.append_batch(topic, std::move(buf_));
  }

 private:
  LoadSpec spec_;
  TickConfig tick_;
  std::int64_t rate_;
  std::int64_t late_stride_ = 0;  // 0: no lateness injection
  std::vector<std::string> sensor_ids_;
  SensorHierarchy hierarchy_;
  std::vector<Record> buf_;
};

}  // namespace scalebench
