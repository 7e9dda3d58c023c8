#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scalebench/plog.hpp"
#include "scalebench/usecases.hpp"
#include "scalebench/windowing.hpp"

namespace scalebench {

/// Cost/capacity parameterization standing in for a concrete stream
/// processing framework. The shipped profiles are illustrative, not
/// measured: only rate relationships matter for the harness.
struct SutProfile {
  std::string name = "default";
  std::map<UseCaseId, double> cost_per_record;  // work units per record
  double capacity_per_core = 1000.0;            // work units per second
  double commit_interval_seconds = 5.0;
  double lag_slo_ratio = 0.01;
  double dropped_slo_ratio = 0.01;
  double core_efficiency = 1.0;  // capacity factor per core beyond the first

  // UC1 sink model: per-record side-effect cost, plus an optional shared
  // synchronized sink that caps total sink throughput across instances.
  double sink_cost_per_record = 0.0;
  bool global_sink_contention = false;
  double sink_capacity_per_sec = 0.0;  // records/s, contention mode only

  std::int64_t disorder_allowance_ms = 0;  // watermark = max event time - allowance

  double cost_for(UseCaseId id) const {
    auto it = cost_per_record.find(id);
    return it == cost_per_record.end() ? 1.0 : it->second;
  }

  /// Capacity multiplier for an instance with `cores` cores.
  double effective_cores(int cores) const {
    return 1.0 + core_efficiency * (cores - 1);
  }

  void validate() const {
    if (capacity_per_core <= 0) throw std::invalid_argument("capacity_per_core must be > 0");
    for (const auto& [uc, c] : cost_per_record)
      if (c <= 0) throw std::invalid_argument("cost_per_record must be > 0 for " + to_string(uc));
    if (commit_interval_seconds <= 0)
      throw std::invalid_argument("commit_interval must be > 0");
    if (lag_slo_ratio <= 0 || lag_slo_ratio >= 1)
      throw std::invalid_argument("lag_slo_ratio must be in (0,1)");
    if (dropped_slo_ratio <= 0 || dropped_slo_ratio >= 1)
      throw std::invalid_argument("dropped_slo_ratio must be in (0,1)");
    if (core_efficiency <= 0 || core_efficiency > 1)
      throw std::invalid_argument("core_efficiency must be in (0,1]");
    if (sink_cost_per_record < 0) throw std::invalid_argument("sink_cost must be >= 0");
    if (global_sink_contention && sink_capacity_per_sec <= 0)
      throw std::invalid_argument("sink contention needs sink_capacity_per_sec > 0");
    if (disorder_allowance_ms < 0)
      throw std::invalid_argument("disorder_allowance_ms must be >= 0");
  }
};

enum class ResourceKind { instances, cores_per_instance };

inline std::string to_string(ResourceKind k) {
  return k == ResourceKind::instances ? "instances" : "cores_per_instance";
}

struct ResourceConfig {
  ResourceKind kind = ResourceKind::instances;
  int instances = 1;
  int cores = 1;

  void validate() const {
    if (instances < 1 || cores < 1)
      throw std::invalid_argument("instances and cores must be >= 1");
  }

  /// Resource config for grid amount `n` along this resource axis.
  ResourceConfig with_amount(int n) const {
    ResourceConfig r = *this;
    if (kind == ResourceKind::instances)
      r.instances = n;
    else
      r.cores = n;
    return r;
  }

  int amount() const { return kind == ResourceKind::instances ? instances : cores; }

  double effective_capacity(const SutProfile& p) const {
    return instances * p.effective_cores(cores) * p.capacity_per_core;
  }
};

/// Balanced contiguous partition ranges, one [begin, end) per instance.
/// Sizes differ by at most one; every partition is assigned exactly once.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> assign_partitions(
    std::uint32_t partition_count, std::uint32_t instances) {
  if (instances == 0) throw std::invalid_argument("instances must be >= 1");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
  ranges.reserve(instances);
  const std::uint32_t base = partition_count / instances;
  const std::uint32_t extra = partition_count % instances;
  std::uint32_t begin = 0;
  for (std::uint32_t i = 0; i < instances; ++i) {
    const std::uint32_t len = base + (i < extra ? 1 : 0);
    ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  return ranges;
}

/// A running deployment of one use case: `instances` capacity-throttled
/// workers consuming their partition ranges from the log under a shared
/// consumer group. Capacity is a work-unit token bucket per instance; at
/// most one record's worth of unused budget carries across ticks, so records
/// processed over any horizon T never exceed capacity * T / cost + instances.
class Deployment {
 public:
  static constexpr const char* kGroup = "sut";

  struct CellKey {
    std::string key;
    std::int32_t hour = -1;  // -1 unless the stage keys by (key, hour of day)
    std::int64_t window_start = 0;
    bool operator==(const CellKey& o) const {
      return window_start == o.window_start && hour == o.hour && key == o.key;
    }
    bool operator<(const CellKey& o) const {
      if (window_start != o.window_start) return window_start < o.window_start;
      if (key != o.key) return key < o.key;
      return hour < o.hour;
    }
  };
  struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
      std::uint64_t h = fnv1a64(k.key);
      h ^= static_cast<std::uint64_t>(k.window_start) * 0x9e3779b97f4a7c15ull;
      h ^= static_cast<std::uint64_t>(k.hour + 1) * 0xc2b2ae3d27d4eb4full;
      return static_cast<std::size_t>(h);
    }
  };
  struct Cell {
    Aggregate agg;
    bool dirty = false;
  };
  struct StageState {
    std::int64_t max_event_time = -1;
    std::int64_t next_close_check = 0;  // skip close scans until wm passes this
    std::unordered_map<CellKey, Cell, CellKeyHash> cells;
  };
  struct Instance {
    int id = 0;
    double tokens = 0.0;
    std::int64_t sink_count = 0;
    std::int64_t dropped_total = 0;
    std::int64_t dropped_post_warmup = 0;
    std::vector<StageState> stages;
    std::vector<Record> poll_buf;
  };

  Deployment(Broker& broker, const UseCase& uc, const SutProfile& profile,
             ResourceConfig resource, TickConfig tick, std::int64_t warmup_tick = 0)
      : broker_(broker),
        uc_(uc),
        profile_(profile),
        resource_(resource),
        tick_(tick),
        warmup_tick_(warmup_tick) {
    profile_.validate();
    resource_.validate();
    tick_.validate();
    commit_interval_ms_ =
        static_cast<std::int64_t>(std::llround(profile_.commit_interval_seconds * 1000.0));
    if (commit_interval_ms_ <= 0 || commit_interval_ms_ % tick_.tick_ms != 0)
      throw std::invalid_argument("commit interval must be a multiple of the tick length");

    for (const StageDef& s : uc_.stages) {
      broker_.register_group(kGroup, s.input_topic);
      if (s.kind == StageKind::window_agg && s.window.early_emit_interval_ms > 0 &&
          s.window.early_emit_interval_ms % tick_.tick_ms != 0)
        throw std::invalid_argument("early emit interval must be a multiple of the tick length");
      stage_ranges_.push_back(assign_partitions(
          broker_.partition_count(s.input_topic),
          static_cast<std::uint32_t>(resource_.instances)));
      max_unit_ = std::max(max_unit_, unit_work(s));
    }

    instances_.resize(static_cast<std::size_t>(resource_.instances));
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      instances_[i].id = static_cast<int>(i);
      instances_[i].stages.resize(uc_.stages.size());
    }
    work_rate_ = profile_.effective_cores(resource_.cores) * profile_.capacity_per_core;
  }

  /// Work units charged per record consumed by a stage.
  double unit_work(const StageDef& s) const {
    double u = s.cost_multiplier * profile_.cost_for(uc_.id);
    if (s.kind == StageKind::sink) u += profile_.sink_cost_per_record;
    return u;
  }

  /// One tick of virtual time: every instance consumes from its partitions
  /// up to its token budget, then window maintenance (close / early-emit)
  /// runs, then offsets are committed if the tick ends a commit interval.
  std::int64_t run_tick(std::int64_t tick_index) {
    const double tick_s = static_cast<double>(tick_.tick_ms) / 1000.0;
    refill_sink_for(tick_s);
    std::int64_t processed = 0;
    for (Instance& inst : instances_) processed += step_instance(inst, tick_index);
    const std::int64_t t_end = (tick_index + 1) * tick_.tick_ms;
    for (Instance& inst : instances_) maintain_instance(inst, t_end);
    if (t_end % commit_interval_ms_ == 0) broker_.commit_all(kGroup);
    if (profile_.global_sink_contention) {
      std::lock_guard lock(sink_mu_);
      sink_tokens_ = std::min(sink_tokens_, 1.0);
    }
    processed_total_ += processed;
    return processed;
  }

  /// Consume phase for one instance. Safe to call from the instance's own
  /// worker thread in wall-clock mode.
  std::int64_t step_instance(Instance& inst, std::int64_t tick_index) {
    const double tick_s = static_cast<double>(tick_.tick_ms) / 1000.0;
    inst.tokens += work_rate_ * tick_s;
    std::int64_t processed = 0;
    for (std::size_t si = 0; si < uc_.stages.size(); ++si) {
      const StageDef& stage = uc_.stages[si];
      const double unit = unit_work(stage);
      const auto [p_begin, p_end] = stage_ranges_[si][static_cast<std::size_t>(inst.id)];
      for (std::uint32_t p = p_begin; p < p_end; ++p) {
        std::int64_t budget = static_cast<std::int64_t>(inst.tokens / unit);
        if (budget <= 0) break;
        const bool gated_sink =
            stage.kind == StageKind::sink && profile_.global_sink_contention;
        if (gated_sink) {
          std::lock_guard lock(sink_mu_);
          budget = std::min(budget, static_cast<std::int64_t>(sink_tokens_));
          if (budget <= 0) break;
          // reserve before processing so concurrent instances cannot overdraw
          sink_tokens_ -= static_cast<double>(budget);
        }
        inst.poll_buf.clear();
        const std::size_t got = broker_.poll(stage.input_topic, kGroup, p,
                                             static_cast<std::size_t>(budget), inst.poll_buf);
        if (gated_sink && got < static_cast<std::size_t>(budget)) {
          std::lock_guard lock(sink_mu_);
          sink_tokens_ += static_cast<double>(budget - static_cast<std::int64_t>(got));
        }
        for (const Record& rec : inst.poll_buf)
          process_record(inst, si, stage, rec, tick_index);
        inst.tokens -= static_cast<double>(got) * unit;
        processed += static_cast<std::int64_t>(got);
      }
    }
    // carry at most one record's worth of budget into the next tick
    inst.tokens = std::min(inst.tokens, max_unit_);
    return processed;
  }

  /// Window maintenance for one instance at the end of a tick.
  void maintain_instance(Instance& inst, std::int64_t t_end_ms) {
    for (std::size_t si = 0; si < uc_.stages.size(); ++si) {
      const StageDef& stage = uc_.stages[si];
      if (stage.kind != StageKind::window_agg) continue;
      StageState& ss = inst.stages[si];
      const std::int64_t wm = watermark(ss);
      if (wm > ss.next_close_check)
        flush_cells(stage, ss, /*watermark=*/wm, /*final=*/true);
      if (stage.window.early_emit_interval_ms > 0 &&
          t_end_ms % stage.window.early_emit_interval_ms == 0)
        early_emit(stage, ss);
    }
  }

  /// Flushes every remaining window cell as a final emission, as if the
  /// watermark jumped past the end of time. Returns the number of cells
  /// emitted; forwarded aggregates still need ticks to be consumed.
  std::int64_t close_all_windows() {
    std::int64_t emitted = 0;
    for (Instance& inst : instances_)
      for (std::size_t si = 0; si < uc_.stages.size(); ++si)
        if (uc_.stages[si].kind == StageKind::window_agg)
          emitted += flush_cells(uc_.stages[si], inst.stages[si], /*watermark=*/-1,
                                 /*final=*/true);
    return emitted;
  }

  /// Runs generation-free ticks until all lag is consumed and all window
  /// state has been flushed through the pipeline. Returns the first unused
  /// tick index.
  std::int64_t drain(std::int64_t next_tick, std::int64_t tick_limit = 10'000'000) {
    for (;;) {
      while (group_lag() > 0) {
        run_tick(next_tick++);
        if (next_tick > tick_limit) throw std::runtime_error("drain did not converge");
      }
      if (close_all_windows() == 0 && group_lag() == 0) return next_tick;
    }
  }

  std::int64_t group_lag() const { return broker_.group_lag(kGroup); }
  std::int64_t processed_total() const { return processed_total_; }
  std::int64_t dropped_total() const {
    std::int64_t n = 0;
    for (const Instance& i : instances_) n += i.dropped_total;
    return n;
  }
  std::int64_t dropped_post_warmup() const {
    std::int64_t n = 0;
    for (const Instance& i : instances_) n += i.dropped_post_warmup;
    return n;
  }
  std::int64_t sink_total() const {
    std::int64_t n = 0;
    for (const Instance& i : instances_) n += i.sink_count;
    return n;
  }
  std::int64_t open_cells() const {
    std::int64_t n = 0;
    for (const Instance& i : instances_)
      for (const auto& ss : i.stages) n += static_cast<std::int64_t>(ss.cells.size());
    return n;
  }
  int instance_count() const { return static_cast<int>(instances_.size()); }
  Instance& instance(std::size_t i) { return instances_.at(i); }
  std::int64_t commit_interval_ms() const { return commit_interval_ms_; }

  /// Adds shared-sink budget for one tick (no-op without contention).
  /// run_tick does this itself; wall-clock drivers call it per tick.
  void refill_sink_for(double tick_seconds) {
    if (!profile_.global_sink_contention) return;
    std::lock_guard lock(sink_mu_);
    sink_tokens_ += profile_.sink_capacity_per_sec * tick_seconds;
  }

  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& partition_ranges(
      std::size_t stage) const {
    return stage_ranges_.at(stage);
  }

 private:
  std::int64_t watermark(const StageState& ss) const {
    return ss.max_event_time < 0 ? -1 : ss.max_event_time - profile_.disorder_allowance_ms;
  }

  /// Strict close rule: a window stays open while the watermark equals its
  /// end + grace, so sibling aggregates sharing an event time never drop.
  bool window_closed(const StageDef& stage, std::int64_t wm, std::int64_t window_start) const {
    return wm > stage.window.window_end(window_start) + stage.window.grace_ms;
  }

  void process_record(Instance& inst, std::size_t stage_idx, const StageDef& stage,
                      const Record& rec, std::int64_t tick_index) {
    StageState& ss = inst.stages[stage_idx];
    switch (stage.kind) {
      case StageKind::sink:
        ++inst.sink_count;
        break;
      case StageKind::shuffle: {
        Record out = rec;
        out.key = uc_.hierarchy.parent_of(rec.key);
        out.ingest_seq = -1;
        broker_.append(stage.forward_topic, std::move(out));
        break;
      }
      case StageKind::window_agg: {
        const std::int64_t wm = watermark(ss);
        bool any_open = false;
        if (rec.window_start_ms >= 0) {
          // aggregate transport record: pinned to the window it was built for
          if (!window_closed(stage, wm, rec.window_start_ms)) {
            any_open = true;
            Cell& cell = touch_cell(ss, stage, rec, rec.window_start_ms);
            Aggregate in;
            in.sum = rec.value;
            in.count = rec.agg_count;
            in.min = rec.agg_min;
            in.max = rec.agg_max;
            cell.agg.merge(in);
            cell.dirty = true;
          }
        } else {
          for_each_window(rec.event_time_ms, stage.window, [&](std::int64_t start) {
            if (window_closed(stage, wm, start)) return;
            any_open = true;
            Cell& cell = touch_cell(ss, stage, rec, start);
            cell.agg.add(rec.value);
            cell.dirty = true;
          });
        }
        if (!any_open) {
          ++inst.dropped_total;
          if (tick_index >= warmup_tick_) ++inst.dropped_post_warmup;
        }
        break;
      }
    }
    if (rec.event_time_ms > ss.max_event_time) ss.max_event_time = rec.event_time_ms;
  }

  Cell& touch_cell(StageState& ss, const StageDef& stage, const Record& rec,
                   std::int64_t window_start) {
    CellKey ck;
    ck.key = rec.key;
    ck.hour = stage.key_mode == KeyMode::key_and_hour
                  ? static_cast<std::int32_t>(hour_of_day(rec.event_time_ms))
                  : -1;
    ck.window_start = window_start;
    auto [it, inserted] = ss.cells.try_emplace(std::move(ck));
    if (inserted) {
      const std::int64_t closes_at =
          stage.window.window_end(window_start) + stage.window.grace_ms;
      if (ss.cells.size() == 1 || closes_at < ss.next_close_check)
        ss.next_close_check = closes_at;
    }
    return it->second;
  }

  /// Emits cells in (window, key, hour) order and erases them. With a
  /// non-negative watermark only the closed cells are flushed; watermark -1
  /// flushes everything. Returns the emission count.
  std::int64_t flush_cells(const StageDef& stage, StageState& ss, std::int64_t watermark,
                           bool final) {
    if (ss.cells.empty()) {
      ss.next_close_check = std::numeric_limits<std::int64_t>::max();
      return 0;
    }
    std::vector<std::pair<CellKey, Aggregate>> ready;
    std::int64_t next_check = std::numeric_limits<std::int64_t>::max();
    for (const auto& [ck, cell] : ss.cells) {
      const std::int64_t closes_at =
          stage.window.window_end(ck.window_start) + stage.window.grace_ms;
      if (watermark < 0 || watermark > closes_at)
        ready.emplace_back(ck, cell.agg);
      else
        next_check = std::min(next_check, closes_at);
    }
    std::sort(ready.begin(), ready.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [ck, agg] : ready) {
      emit(stage, ck, agg, final);
      ss.cells.erase(ck);
    }
    ss.next_close_check = next_check;
    return static_cast<std::int64_t>(ready.size());
  }

  void early_emit(const StageDef& stage, StageState& ss) {
    std::vector<std::pair<const CellKey*, Cell*>> dirty;
    for (auto& [ck, cell] : ss.cells)
      if (cell.dirty) dirty.emplace_back(&ck, &cell);
    std::sort(dirty.begin(), dirty.end(),
              [](const auto& a, const auto& b) { return *a.first < *b.first; });
    for (auto& [ck, cell] : dirty) {
      emit(stage, *ck, cell->agg, /*final=*/false);
      cell->dirty = false;
    }
  }

  void emit(const StageDef& stage, const CellKey& ck, const Aggregate& agg, bool final) {
    Record out;
    out.key = ck.hour >= 0 ? ck.key + "@h" + std::to_string(ck.hour) : ck.key;
    out.event_time_ms = stage.window.window_end(ck.window_start);
    out.window_start_ms = ck.window_start;
    out.value = agg.sum;
    out.agg_count = agg.count;
    out.agg_min = agg.min;
    out.agg_max = agg.max;
    out.final_result = final;
    if (final && !stage.forward_topic.empty()) {
      Record fwd = out;
      if (stage.forward_rekey_parent) fwd.key = uc_.hierarchy.parent_of(ck.key);
      broker_.append(stage.forward_topic, std::move(fwd));
    }
    broker_.append(uc_.output_topic, std::move(out));
  }

  Broker& broker_;
  const UseCase& uc_;
  SutProfile profile_;
  ResourceConfig resource_;
  TickConfig tick_;
  std::int64_t warmup_tick_;
  std::int64_t commit_interval_ms_ = 5000;
  double work_rate_ = 0.0;  // work units per second per instance
  double max_unit_ = 0.0;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> stage_ranges_;
  std::vector<Instance> instances_;
  std::int64_t processed_total_ = 0;

  std::mutex sink_mu_;
  double sink_tokens_ = 0.0;
};

}  // namespace scalebench
