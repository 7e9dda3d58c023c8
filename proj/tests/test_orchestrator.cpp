#include <algorithm>
#include <map>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "scalebench/orchestrator.hpp"

using namespace scalebench;

namespace {

/// Small, fast experiment shell for unit tests (the paper-style durations
/// are exercised by the acceptance suite).
ExperimentSpec quick_spec(UseCaseId uc, std::int64_t load, int instances,
                          double capacity_rec_per_s) {
  ExperimentSpec s;
  s.use_case = uc;
  s.load.kind = uc == UseCaseId::UC4 ? LoadKind::nested_groups : LoadKind::sensor_count;
  s.load.magnitude = load;
  s.resource.instances = instances;
  s.profile.capacity_per_core = capacity_rec_per_s;
  s.profile.cost_per_record = {{uc, 1.0}};
  s.duration_seconds = 60.0;
  s.warmup_seconds = 20.0;
  s.repetitions = 1;
  s.partitions = 12;
  return s;
}

CellEvaluator matrix_evaluator(const std::vector<std::vector<bool>>& matrix,
                               std::int64_t* calls = nullptr) {
  return [&matrix, calls](std::size_t li, std::size_t ri) {
    if (calls) ++*calls;
    CellOutcome cell;
    cell.load_magnitude = static_cast<std::int64_t>(li);
    cell.resource_amount = static_cast<int>(ri);
    cell.passed = matrix.at(li).at(ri);
    return cell;
  };
}

std::vector<std::optional<int>> demands_of(const DemandCurve& curve) {
  std::vector<std::optional<int>> d;
  for (const DemandRow& r : curve.rows) d.push_back(r.demand);
  return d;
}

}  // namespace

TEST_CASE("run_experiment: rate surplus keeps the lag flat") {
  auto spec = quick_spec(UseCaseId::UC1, 500, 1, 1000.0);
  const CellOutcome cell = run_experiment(spec);
  REQUIRE(cell.repetitions.size() == 1);
  CHECK_THAT(cell.repetitions[0].lag_slope, Catch::Matchers::WithinAbs(0.0, 1e-9));
  CHECK(cell.passed);
}

TEST_CASE("run_experiment: rate deficit grows lag at generation minus ceiling") {
  auto spec = quick_spec(UseCaseId::UC1, 1500, 1, 1000.0);
  const CellOutcome cell = run_experiment(spec);
  REQUIRE(cell.repetitions.size() == 1);
  // threshold is 1% of 1500 = 15 msgs/s; the deficit is 500 msgs/s
  CHECK_THAT(cell.repetitions[0].lag_slope, Catch::Matchers::WithinAbs(500.0, 1e-6));
  CHECK_FALSE(cell.passed);
}

TEST_CASE("run_experiment: repetitions are identical in virtual time") {
  auto spec = quick_spec(UseCaseId::UC2, 600, 1, 1000.0);
  spec.repetitions = 3;
  const CellOutcome cell = run_experiment(spec);
  REQUIRE(cell.repetitions.size() == 3);
  for (const auto& rep : cell.repetitions) {
    CHECK(rep.lag_slope == cell.repetitions[0].lag_slope);
    CHECK(rep.dropped_count == cell.repetitions[0].dropped_count);
    CHECK(rep.passed == cell.repetitions[0].passed);
  }
  CHECK(cell.passed);
}

TEST_CASE("linear search finds ceil(load/capacity) demands") {
  auto base = quick_spec(UseCaseId::UC1, 1000, 1, 1000.0);
  const std::vector<std::int64_t> loads{1000, 2000, 3000};
  const std::vector<int> resources{1, 2, 3, 4, 5};
  auto evaluate = make_engine_evaluator(base, loads, resources);

  DemandCurve with_lbr = linear_search_demand(loads, resources, evaluate, true);
  CHECK(demands_of(with_lbr) == std::vector<std::optional<int>>{1, 2, 3});

  SECTION("lower-bound restriction saves cells but not accuracy") {
    DemandCurve without = linear_search_demand(loads, resources, evaluate, false);
    CHECK(demands_of(without) == demands_of(with_lbr));
    CHECK(with_lbr.cells_executed == 5);  // 1 + 2 + 2
    CHECK(without.cells_executed == 6);   // 1 + 2 + 3
  }

  SECTION("full search agrees and fills the whole matrix") {
    FullSearchResult full = full_search_demand(loads, resources, evaluate);
    CHECK(demands_of(full.curve) == demands_of(with_lbr));
    CHECK(full.curve.cells_executed ==
          static_cast<std::int64_t>(loads.size() * resources.size()));
    // monotone SUT: every row is false...false,true...true
    for (const auto& row : full.matrix) {
      bool seen_pass = false;
      for (bool cell : row) {
        if (seen_pass) CHECK(cell);
        seen_pass = seen_pass || cell;
      }
      CHECK(seen_pass);
    }
  }
}

TEST_CASE("exceeded loads are first-class results") {
  auto base = quick_spec(UseCaseId::UC1, 5000, 1, 1000.0);
  const std::vector<std::int64_t> loads{5000};
  const std::vector<int> resources{1, 2, 3};
  DemandCurve curve = linear_search_demand(
      loads, resources, make_engine_evaluator(base, loads, resources), true);
  REQUIRE(curve.rows.size() == 1);
  CHECK_FALSE(curve.rows[0].demand.has_value());
  CHECK(curve.cells_executed == 3);
}

TEST_CASE("load capacity is the dual metric") {
  auto base = quick_spec(UseCaseId::UC1, 500, 1, 1000.0);
  SECTION("two instances of 1000 rec/s sustain 2000 msg/s") {
    const std::vector<std::int64_t> loads{500, 1000, 1500, 2000, 2500};
    const std::vector<int> resources{2};
    LoadCapacityResult result =
        load_capacity(resources, loads, make_engine_evaluator(base, loads, resources));
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].capacity == 2000);
  }
  SECTION("no sustainable load is marked") {
    const std::vector<std::int64_t> loads{1500, 2000};
    const std::vector<int> resources{1};
    LoadCapacityResult result =
        load_capacity(resources, loads, make_engine_evaluator(base, loads, resources));
    CHECK_FALSE(result.rows[0].capacity.has_value());
  }
  SECTION("duality: demand(load_capacity(r)) <= r on a full matrix") {
    const std::vector<std::vector<bool>> m{{true, true, true},
                                           {false, true, true},
                                           {false, true, true},
                                           {false, false, true}};
    const std::vector<std::int64_t> loads{10, 20, 30, 40};
    const std::vector<int> resources{1, 2, 3};
    auto evaluate = matrix_evaluator(m);
    LoadCapacityResult cap = load_capacity(resources, loads, evaluate);
    DemandCurve demand = full_search_demand(loads, resources, evaluate).curve;
    for (std::size_t ri = 0; ri < resources.size(); ++ri) {
      if (!cap.rows[ri].capacity) continue;
      for (const DemandRow& row : demand.rows)
        if (row.load == *cap.rows[ri].capacity) {
          REQUIRE(row.demand.has_value());
          CHECK(*row.demand <= resources[ri]);
        }
    }
  }
}

TEST_CASE("analytic demand oracle closed forms") {
  SECTION("ceil(load / capacity) for single-stage pipelines") {
    auto spec = quick_spec(UseCaseId::UC1, 5500, 1, 1000.0);
    CHECK(analytic_demand_oracle(spec) == 6);
    spec.load.magnitude = 1000;
    CHECK(analytic_demand_oracle(spec) == 1);  // exact fit
  }
  SECTION("uc3 charges cost x windows-per-record") {
    ExperimentSpec spec = quick_spec(UseCaseId::UC3, 10000, 1, 10000.0);
    spec.uc3_duration_days = 3;
    spec.profile.cost_per_record = {{UseCaseId::UC3, 1.0}};
    CHECK(analytic_demand_oracle(spec) == 3);  // 10000 * 3 wu/s over 10000 wu/s
  }
  SECTION("uc4 sums the stage rates in closed form") {
    ExperimentSpec spec = quick_spec(UseCaseId::UC4, 5, 1, 1000.0);
    const UseCase uc = make_use_case(UseCaseId::UC4, spec.load);
    // shuffle + first aggregation at the input rate, then one aggregate per
    // group per minute: 2*1024 + (256+64+16+4)/60
    const double want = 2.0 * 1024.0 + 340.0 / 60.0;
    CHECK_THAT(steady_work_rate(uc, spec.profile, 1024.0),
               Catch::Matchers::WithinRel(want, 1e-12));
    CHECK(analytic_demand_oracle(spec) == 3);
  }
  SECTION("cores axis inverts the efficiency curve") {
    auto spec = quick_spec(UseCaseId::UC1, 2500, 1, 1000.0);
    spec.resource.kind = ResourceKind::cores_per_instance;
    spec.resource.instances = 1;
    CHECK(analytic_demand_oracle(spec) == 3);  // e = 1: plain ceiling
    spec.profile.core_efficiency = 0.5;
    // 1 + 0.5(k-1) >= 2.5  =>  k >= 4
    CHECK(analytic_demand_oracle(spec) == 4);
  }
  SECTION("a saturated shared sink has no finite demand") {
    auto spec = quick_spec(UseCaseId::UC1, 3000, 1, 1000.0);
    spec.profile.global_sink_contention = true;
    spec.profile.sink_capacity_per_sec = 2000.0;
    CHECK_FALSE(analytic_demand_oracle(spec).has_value());
    spec.load.magnitude = 1500;
    CHECK(analytic_demand_oracle(spec) == 2);
  }
}

TEST_CASE("measured demand equals the oracle on a small engine grid") {
  auto base = quick_spec(UseCaseId::UC2, 240, 1, 240.0);
  const std::vector<std::int64_t> loads{240, 480, 720};
  const std::vector<int> resources{1, 2, 3};
  auto evaluate = make_engine_evaluator(base, loads, resources);
  DemandCurve curve = linear_search_demand(loads, resources, evaluate, true);
  for (std::size_t li = 0; li < loads.size(); ++li) {
    ExperimentSpec s = base;
    s.load.magnitude = loads[li];
    REQUIRE(curve.rows[li].demand.has_value());
    CHECK(*curve.rows[li].demand == *analytic_demand_oracle(s));
  }
}

TEST_CASE("experiment isolation: execution order does not change verdicts") {
  auto base = quick_spec(UseCaseId::UC1, 600, 1, 500.0);
  const std::vector<std::int64_t> loads{300, 600};
  const std::vector<int> resources{1, 2};
  auto evaluate = make_engine_evaluator(base, loads, resources);

  std::vector<std::pair<std::size_t, std::size_t>> cells{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::map<std::pair<std::size_t, std::size_t>, bool> first_pass;
  for (auto [li, ri] : cells) first_pass[{li, ri}] = evaluate(li, ri).passed;
  std::reverse(cells.begin(), cells.end());
  for (auto [li, ri] : cells) CHECK(evaluate(li, ri).passed == first_pass[{li, ri}]);
}

TEST_CASE("search strategies on randomized monotone matrices") {
  std::mt19937 rng(97);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t L = 2 + rng() % 5, R = 2 + rng() % 7;
    std::vector<std::int64_t> loads(L);
    std::vector<int> resources(R);
    for (std::size_t i = 0; i < L; ++i) loads[i] = 100 * static_cast<std::int64_t>(i + 1);
    for (std::size_t i = 0; i < R; ++i) resources[i] = static_cast<int>(i + 1);
    // per-load first-passing index, non-decreasing in load (monotone SUT);
    // may run off the grid (exceeded rows)
    std::vector<std::size_t> first_pass(L);
    std::size_t cur = rng() % (R + 1);
    for (std::size_t li = 0; li < L; ++li) {
      cur = std::min(R, cur + rng() % 3);
      first_pass[li] = cur;
    }
    std::vector<std::vector<bool>> m(L, std::vector<bool>(R));
    for (std::size_t li = 0; li < L; ++li)
      for (std::size_t ri = 0; ri < R; ++ri) m[li][ri] = ri >= first_pass[li];

    std::int64_t linear_calls = 0, full_calls = 0;
    DemandCurve linear =
        linear_search_demand(loads, resources, matrix_evaluator(m, &linear_calls), true);
    FullSearchResult full =
        full_search_demand(loads, resources, matrix_evaluator(m, &full_calls));
    CHECK(demands_of(linear) == demands_of(full.curve));
    CHECK(linear_calls == linear.cells_executed);
    bool any_above_min = false;
    for (const auto& row : full.curve.rows)
      any_above_min = any_above_min || !row.demand || *row.demand > resources.front();
    if (any_above_min) CHECK(linear.cells_executed < full.curve.cells_executed);
  }
}

TEST_CASE("non-monotone verdicts: linear search returns the first passing amount") {
  // pass at 2, dip at 3, pass again later
  const std::vector<std::vector<bool>> m{{false, true, false, true, true}};
  const std::vector<std::int64_t> loads{100};
  const std::vector<int> resources{1, 2, 3, 4, 5};
  DemandCurve linear = linear_search_demand(loads, resources, matrix_evaluator(m), true);
  CHECK(linear.rows[0].demand == 2);
  FullSearchResult full = full_search_demand(loads, resources, matrix_evaluator(m));
  CHECK(full.curve.rows[0].demand == 2);  // least passing, same answer here
}

TEST_CASE("parallel full search matches the sequential result") {
  auto base = quick_spec(UseCaseId::UC1, 300, 1, 300.0);
  const std::vector<std::int64_t> loads{300, 600};
  const std::vector<int> resources{1, 2, 3};
  auto evaluate = make_engine_evaluator(base, loads, resources);
  FullSearchResult seq = full_search_demand(loads, resources, evaluate, false);
  FullSearchResult par = full_search_demand(loads, resources, evaluate, true);
  CHECK(seq.matrix == par.matrix);
  CHECK(demands_of(seq.curve) == demands_of(par.curve));
}

TEST_CASE("wall-clock mode completes and keeps up given surplus capacity") {
  ExperimentSpec spec = quick_spec(UseCaseId::UC1, 200, 2, 500.0);
  spec.virtual_time = false;
  spec.wallclock_time_scale = 20.0;  // 3 s of virtual time in ~150 ms
  spec.duration_seconds = 3.0;
  spec.warmup_seconds = 1.0;
  spec.profile.commit_interval_seconds = 0.5;
  const CellOutcome cell = run_experiment(spec);
  REQUIRE(cell.repetitions.size() == 1);
  CHECK(std::isfinite(cell.repetitions[0].lag_slope));
  // statistical, but a surplus run should not fall behind persistently
  CHECK(cell.repetitions[0].lag_slope < 100.0);
}

TEST_CASE("experiment spec validation") {
  auto spec = quick_spec(UseCaseId::UC1, 100, 1, 100.0);
  CHECK_NOTHROW(spec.validate());
  spec.warmup_seconds = 59.9999;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);  // tick alignment
  spec.warmup_seconds = 70.0;
  spec.duration_seconds = 70.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);  // warmup < duration
  spec = quick_spec(UseCaseId::UC1, 100, 1, 100.0);
  spec.tick.tick_ms = 300;  // does not divide 1 s
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("dropped-records SLO is attached to UC2 and UC4 only") {
  for (UseCaseId id : {UseCaseId::UC1, UseCaseId::UC2, UseCaseId::UC3, UseCaseId::UC4}) {
    auto spec = quick_spec(id, id == UseCaseId::UC4 ? 2 : 240, 1, 1e6);
    const CellOutcome cell = run_experiment(spec);
    const std::size_t want =
        (id == UseCaseId::UC2 || id == UseCaseId::UC4) ? 2u : 1u;
    CHECK(cell.repetitions[0].verdicts.size() == want);
    CHECK(cell.repetitions[0].verdicts[0].slo_id == SloId::lag_trend);
    if (want == 2) CHECK(cell.repetitions[0].verdicts[1].slo_id == SloId::dropped_ratio);
  }
}
