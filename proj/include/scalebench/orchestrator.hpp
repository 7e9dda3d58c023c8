#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "scalebench/engine.hpp"
#include "scalebench/plog.hpp"
#include "scalebench/slo.hpp"
#include "scalebench/usecases.hpp"
#include "scalebench/workload.hpp"

namespace scalebench {

/// One isolated (load, resource) trial: fresh topics, state and consumer
/// groups per repetition, torn down afterwards.
struct ExperimentSpec {
  UseCaseId use_case = UseCaseId::UC1;
  SutProfile profile;
  LoadSpec load;
  ResourceConfig resource;
  double duration_seconds = 300.0;
  double warmup_seconds = 120.0;
  int repetitions = 3;
  TickConfig tick;
  std::uint32_t partitions = 100;
  bool balanced_keys = true;
  int uc3_duration_days = 3;
  bool virtual_time = true;
  double wallclock_time_scale = 1.0;  // virtual seconds per real second
  RepetitionRule repetition_rule = RepetitionRule::majority;

  std::int64_t duration_ms() const {
    return static_cast<std::int64_t>(std::llround(duration_seconds * 1000.0));
  }
  std::int64_t warmup_ms() const {
    return static_cast<std::int64_t>(std::llround(warmup_seconds * 1000.0));
  }

  void validate() const {
    profile.validate();
    resource.validate();
    tick.validate();
    if (warmup_seconds < 0 || warmup_seconds >= duration_seconds)
      throw std::invalid_argument("warmup must be shorter than the experiment duration");
    if (duration_ms() % tick.tick_ms != 0 || warmup_ms() % tick.tick_ms != 0)
      throw std::invalid_argument("duration and warmup must be multiples of the tick length");
    if (duration_seconds - warmup_seconds < 2.0 * profile.commit_interval_seconds)
      throw std::invalid_argument(
          "need at least two lag samples after warm-up; extend the duration");
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    if (partitions < 1) throw std::invalid_argument("partitions must be >= 1");
    if (!virtual_time && wallclock_time_scale <= 0)
      throw std::invalid_argument("wallclock_time_scale must be > 0");
    messages_per_second(load);  // validates the load spec
  }
};

struct RepetitionOutcome {
  LagSeries lag_series;
  double lag_slope = 0.0;
  std::int64_t dropped_count = 0;    // post warm-up
  std::int64_t generated_count = 0;  // post warm-up
  double dropped_ratio = 0.0;
  std::vector<SloVerdict> verdicts;
  bool passed = false;
};

struct CellOutcome {
  std::int64_t load_magnitude = 0;
  int resource_amount = 0;
  std::vector<RepetitionOutcome> repetitions;
  bool passed = false;
};

namespace detail {

inline RepetitionOutcome evaluate_slos(const ExperimentSpec& spec, LagSeries series,
                                       std::int64_t dropped, std::int64_t generated) {
  RepetitionOutcome rep;
  rep.lag_series = std::move(series);
  rep.lag_slope = lag_trend(rep.lag_series);
  rep.dropped_count = dropped;
  rep.generated_count = generated;
  rep.dropped_ratio =
      generated > 0 ? static_cast<double>(dropped) / static_cast<double>(generated) : 0.0;
  const double lambda = static_cast<double>(messages_per_second(spec.load));
  rep.verdicts.push_back(check_lag_slo(rep.lag_slope, lambda, spec.profile.lag_slo_ratio));
  if (spec.use_case == UseCaseId::UC2 || spec.use_case == UseCaseId::UC4)
    rep.verdicts.push_back(check_dropped_slo(dropped, generated, spec.profile.dropped_slo_ratio));
  rep.passed = true;
  for (const SloVerdict& v : rep.verdicts) rep.passed = rep.passed && v.passed;
  return rep;
}

inline RepetitionOutcome run_repetition_virtual(const ExperimentSpec& spec) {
  Broker broker;
  const UseCase uc = make_use_case(spec.use_case, spec.load, spec.uc3_duration_days);
  broker.create_topic(uc.input_topic, spec.partitions);
  for (const std::string& t : uc.intermediate_topics) broker.create_topic(t, spec.partitions);
  broker.create_topic(uc.output_topic, spec.partitions);

  LoadGenerator gen(spec.load, spec.tick, spec.partitions, spec.balanced_keys);
  const std::int64_t ticks = spec.duration_ms() / spec.tick.tick_ms;
  const std::int64_t warmup_tick = spec.warmup_ms() / spec.tick.tick_ms;
  Deployment dep(broker, uc, spec.profile, spec.resource, spec.tick, warmup_tick);

  LagSeries series;
  series.warmup_seconds = spec.warmup_seconds;
  const std::int64_t commit_ms = dep.commit_interval_ms();
  for (std::int64_t tick = 0; tick < ticks; ++tick) {
    gen.generate_tick(tick, broker, uc.input_topic);
    dep.run_tick(tick);
    const std::int64_t t_end = (tick + 1) * spec.tick.tick_ms;
    if (t_end % commit_ms == 0)
      series.samples.push_back({static_cast<double>(t_end) / 1000.0,
                                static_cast<double>(dep.group_lag())});
  }
  const std::int64_t generated = gen.records_up_to(ticks) - gen.records_up_to(warmup_tick);
  return evaluate_slos(spec, std::move(series), dep.dropped_post_warmup(), generated);
}

/// Wall-clock mode: one worker thread per instance, paced by the real clock
/// (scaled); the log provides all synchronization. Results are statistical,
/// not bit-reproducible.
inline RepetitionOutcome run_repetition_wallclock(const ExperimentSpec& spec) {
  Broker broker;
  const UseCase uc = make_use_case(spec.use_case, spec.load, spec.uc3_duration_days);
  broker.create_topic(uc.input_topic, spec.partitions);
  for (const std::string& t : uc.intermediate_topics) broker.create_topic(t, spec.partitions);
  broker.create_topic(uc.output_topic, spec.partitions);

  LoadGenerator gen(spec.load, spec.tick, spec.partitions, spec.balanced_keys);
  const std::int64_t ticks = spec.duration_ms() / spec.tick.tick_ms;
  const std::int64_t warmup_tick = spec.warmup_ms() / spec.tick.tick_ms;
  Deployment dep(broker, uc, spec.profile, spec.resource, spec.tick, warmup_tick);

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const std::chrono::duration<double> real_tick(
      static_cast<double>(spec.tick.tick_ms) / 1000.0 / spec.wallclock_time_scale);
  auto tick_deadline = [&](std::int64_t tick) {
    return t0 + std::chrono::duration_cast<clock::duration>(real_tick * tick);
  };

  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(dep.instance_count()));
  for (int i = 0; i < dep.instance_count(); ++i) {
    workers.emplace_back([&, i] {
      Deployment::Instance& inst = dep.instance(static_cast<std::size_t>(i));
      for (std::int64_t tick = 0; tick < ticks; ++tick) {
        std::this_thread::sleep_until(tick_deadline(tick));
        dep.step_instance(inst, tick);
        dep.maintain_instance(inst, (tick + 1) * spec.tick.tick_ms);
      }
    });
  }

  LagSeries series;
  series.warmup_seconds = spec.warmup_seconds;
  const std::int64_t commit_ms = dep.commit_interval_ms();
  for (std::int64_t tick = 0; tick < ticks; ++tick) {
    std::this_thread::sleep_until(tick_deadline(tick));
    gen.generate_tick(tick, broker, uc.input_topic);
    dep.refill_sink_for(static_cast<double>(spec.tick.tick_ms) / 1000.0);
    const std::int64_t t_end = (tick + 1) * spec.tick.tick_ms;
    if (t_end % commit_ms == 0) {
      broker.commit_all(Deployment::kGroup);
      series.samples.push_back({static_cast<double>(t_end) / 1000.0,
                                static_cast<double>(dep.group_lag())});
    }
  }
  for (std::thread& w : workers) w.join();

  const std::int64_t generated = gen.records_up_to(ticks) - gen.records_up_to(warmup_tick);
  return evaluate_slos(spec, std::move(series), dep.dropped_post_warmup(), generated);
}

}  // namespace detail

/// Runs one isolated experiment: `repetitions` fresh environments, each
/// driven for the configured duration, with SLOs evaluated on post-warm-up
/// data. The cell verdict aggregates the repetitions.
inline CellOutcome run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  CellOutcome cell;
  cell.load_magnitude = spec.load.magnitude;
  cell.resource_amount = spec.resource.amount();
  std::vector<std::vector<SloVerdict>> verdict_sets;
  for (int r = 0; r < spec.repetitions; ++r) {
    RepetitionOutcome rep = spec.virtual_time ? detail::run_repetition_virtual(spec)
                                              : detail::run_repetition_wallclock(spec);
    verdict_sets.push_back(rep.verdicts);
    cell.repetitions.push_back(std::move(rep));
  }
  cell.passed = aggregate_repetitions(verdict_sets, spec.repetition_rule);
  return cell;
}

// ---------------------------------------------------------------------------
// Search strategies over the load x resource grid.
// ---------------------------------------------------------------------------

/// Evaluates one grid cell; separate from the engine so strategies can be
/// tested against synthetic systems-under-test as well.
using CellEvaluator = std::function<CellOutcome(std::size_t load_idx, std::size_t res_idx)>;

/// Binds an ExperimentSpec to grid axes: loads map onto load.magnitude and
/// resources onto the configured resource kind.
inline CellEvaluator make_engine_evaluator(ExperimentSpec base,
                                           std::vector<std::int64_t> loads,
                                           std::vector<int> resources) {
  return [base = std::move(base), loads = std::move(loads),
          resources = std::move(resources)](std::size_t li, std::size_t ri) {
    ExperimentSpec spec = base;
    spec.load.magnitude = loads.at(li);
    spec.resource = base.resource.with_amount(resources.at(ri));
    return run_experiment(spec);
  };
}

/// Demand per load: the minimal resource amount whose SLOs pass, or
/// "exceeded" (nullopt) if no grid amount passes. Evidence for every cell
/// that was executed is kept.
struct DemandRow {
  std::int64_t load = 0;
  std::optional<int> demand;  // nullopt: exceeded
  std::vector<CellOutcome> cells;
};

struct DemandCurve {
  std::vector<DemandRow> rows;
  std::int64_t cells_executed = 0;
};

/// Linear search: for each load (ascending) test resource amounts ascending;
/// the first passing amount is the demand. With the lower-bound restriction
/// each load starts at the previous load's demand (valid for monotone SUTs);
/// an exceeded load seeds the next one at the grid maximum.
inline DemandCurve linear_search_demand(const std::vector<std::int64_t>& loads,
                                        const std::vector<int>& resources,
                                        const CellEvaluator& evaluate,
                                        bool lower_bound_restriction = true) {
  if (loads.empty() || resources.empty())
    throw std::invalid_argument("load and resource grids must be non-empty");
  DemandCurve curve;
  std::size_t start = 0;
  for (std::size_t li = 0; li < loads.size(); ++li) {
    DemandRow row;
    row.load = loads[li];
    for (std::size_t ri = lower_bound_restriction ? start : 0; ri < resources.size(); ++ri) {
      CellOutcome cell = evaluate(li, ri);
      ++curve.cells_executed;
      const bool passed = cell.passed;
      row.cells.push_back(std::move(cell));
      if (passed) {
        row.demand = resources[ri];
        if (lower_bound_restriction) start = ri;
        break;
      }
    }
    if (!row.demand && lower_bound_restriction) start = resources.size() - 1;
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

/// Exhaustive baseline: every cell is executed. Returns the demand curve
/// plus the full pass/fail matrix (loads x resources).
struct FullSearchResult {
  DemandCurve curve;
  std::vector<std::vector<bool>> matrix;
};

inline FullSearchResult full_search_demand(const std::vector<std::int64_t>& loads,
                                           const std::vector<int>& resources,
                                           const CellEvaluator& evaluate,
                                           bool parallel_cells = false) {
  if (loads.empty() || resources.empty())
    throw std::invalid_argument("load and resource grids must be non-empty");
  FullSearchResult result;
  result.matrix.assign(loads.size(), std::vector<bool>(resources.size(), false));
  std::vector<std::vector<CellOutcome>> cells(loads.size());
  if (parallel_cells) {
    // isolated virtual-time cells share no state, so they can run concurrently
    std::vector<std::future<CellOutcome>> futures;
    futures.reserve(loads.size() * resources.size());
    for (std::size_t li = 0; li < loads.size(); ++li)
      for (std::size_t ri = 0; ri < resources.size(); ++ri)
        futures.push_back(std::async(std::launch::async, evaluate, li, ri));
    for (std::size_t li = 0; li < loads.size(); ++li)
      for (std::size_t ri = 0; ri < resources.size(); ++ri)
        cells[li].push_back(futures[li * resources.size() + ri].get());
  } else {
    for (std::size_t li = 0; li < loads.size(); ++li)
      for (std::size_t ri = 0; ri < resources.size(); ++ri)
        cells[li].push_back(evaluate(li, ri));
  }
  for (std::size_t li = 0; li < loads.size(); ++li) {
    DemandRow row;
    row.load = loads[li];
    for (std::size_t ri = 0; ri < resources.size(); ++ri) {
      result.matrix[li][ri] = cells[li][ri].passed;
      if (!row.demand && cells[li][ri].passed) row.demand = resources[ri];
      row.cells.push_back(std::move(cells[li][ri]));
      ++result.curve.cells_executed;
    }
    result.curve.rows.push_back(std::move(row));
  }
  return result;
}

/// Dual of the demand metric: per resource amount, the greatest load whose
/// SLOs pass (nullopt if not even the smallest load is sustainable). Scans
/// loads ascending, seeded at the previous resource amount's capacity.
struct CapacityRow {
  int resource = 0;
  std::optional<std::int64_t> capacity;  // nullopt: none sustainable
  std::vector<CellOutcome> cells;
};

struct LoadCapacityResult {
  std::vector<CapacityRow> rows;
  std::int64_t cells_executed = 0;
};

inline LoadCapacityResult load_capacity(const std::vector<int>& resources,
                                        const std::vector<std::int64_t>& loads,
                                        const CellEvaluator& evaluate) {
  if (loads.empty() || resources.empty())
    throw std::invalid_argument("load and resource grids must be non-empty");
  LoadCapacityResult result;
  std::size_t start = 0;
  for (std::size_t ri = 0; ri < resources.size(); ++ri) {
    CapacityRow row;
    row.resource = resources[ri];
    std::optional<std::size_t> last_pass;
    for (std::size_t li = start; li < loads.size(); ++li) {
      CellOutcome cell = evaluate(li, ri);
      ++result.cells_executed;
      const bool passed = cell.passed;
      row.cells.push_back(std::move(cell));
      if (!passed) break;
      last_pass = li;
      row.capacity = loads[li];
    }
    if (last_pass) start = *last_pass;
    result.rows.push_back(std::move(row));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Analytic demand oracle (closed form, independent of the engine).
// ---------------------------------------------------------------------------

/// Work units consumed per record by a stage; mirrors the engine's charge.
inline double stage_unit_work(const StageDef& stage, UseCaseId id, const SutProfile& p) {
  double u = stage.cost_multiplier * p.cost_for(id);
  if (stage.kind == StageKind::sink) u += p.sink_cost_per_record;
  return u;
}

/// Steady-state work rate (work units/second) of a pipeline at load
/// `lambda` messages/second: the sum over stages of consumption rate times
/// per-record work, with each stage's rate a linear function of lambda.
inline double steady_work_rate(const UseCase& uc, const SutProfile& profile, double lambda) {
  double w = 0.0;
  for (const StageDef& s : uc.stages)
    w += (s.steady_rate_per_input * lambda + s.steady_rate_const) *
         stage_unit_work(s, uc.id, profile);
  return w;
}

/// Smallest resource amount whose capacity covers the steady work rate,
/// computed in closed form. nullopt means no finite amount suffices (shared
/// sink saturated). Valid for deterministic virtual-time runs with zero
/// lateness.
inline std::optional<int> analytic_demand_oracle(const ExperimentSpec& spec) {
  const UseCase uc = make_use_case(spec.use_case, spec.load, spec.uc3_duration_days);
  const double lambda = static_cast<double>(messages_per_second(spec.load));
  if (spec.profile.global_sink_contention)
    for (const StageDef& s : uc.stages)
      if (s.kind == StageKind::sink &&
          s.steady_rate_per_input * lambda + s.steady_rate_const >
              spec.profile.sink_capacity_per_sec)
        return std::nullopt;
  const double work = steady_work_rate(uc, spec.profile, lambda);
  const double eps = 1e-9 * std::max(1.0, work);
  if (spec.resource.kind == ResourceKind::instances) {
    const double per_instance =
        spec.profile.effective_cores(spec.resource.cores) * spec.profile.capacity_per_core;
    const double m = std::ceil(work / per_instance - eps);
    return std::max(1, static_cast<int>(m));
  }
  const double needed_cores_factor =
      work / (spec.resource.instances * spec.profile.capacity_per_core);
  // 1 + e*(k - 1) >= needed  =>  k >= (needed - 1)/e + 1
  const double k =
      std::ceil((needed_cores_factor - 1.0) / spec.profile.core_efficiency + 1.0 - eps);
  return std::max(1, static_cast<int>(k));
}

}  // namespace scalebench
