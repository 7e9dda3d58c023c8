#include <catch2/catch_amalgamated.hpp>

#include "scalebench/windowing.hpp"

using namespace scalebench;

namespace {
constexpr std::int64_t kDay = 86'400'000;
}

TEST_CASE("tumbling window assignment") {
  const auto w = tumbling_window(60'000);
  CHECK(windows_for(61'000, w) == std::vector<std::int64_t>{60'000});
  CHECK(windows_for(0, w) == std::vector<std::int64_t>{0});
  CHECK(windows_for(59'999, w) == std::vector<std::int64_t>{0});
  CHECK(windows_for(60'000, w) == std::vector<std::int64_t>{60'000});
}

TEST_CASE("hopping window assignment: 3 days size, 1 day slide") {
  const auto w = hopping_window(3 * kDay, kDay);

  SECTION("day 5 + 1 hour falls into three windows") {
    const std::int64_t ts = 5 * kDay + 3'600'000;
    CHECK(windows_for(ts, w) ==
          std::vector<std::int64_t>{3 * kDay, 4 * kDay, 5 * kDay});
  }

  SECTION("early timestamps are clipped at the start of time") {
    CHECK(windows_for(30'000, w) == std::vector<std::int64_t>{0});
    CHECK(windows_for(kDay + 5, w) == std::vector<std::int64_t>{0, kDay});
  }

  SECTION("past the ramp-up every record touches size/slide windows") {
    CHECK(w.windows_per_record() == 3);
    for (std::int64_t ts : {2 * kDay, 3 * kDay + 123, 17 * kDay + 999}) {
      const auto starts = windows_for(ts, w);
      CHECK(starts.size() == 3);
      for (const auto s : starts) {
        CHECK(s <= ts);
        CHECK(ts < s + w.size_ms);
        CHECK(s % w.slide_ms == 0);
      }
    }
  }
}

TEST_CASE("window spec validation") {
  CHECK_THROWS_AS(hopping_window(100, 100), std::invalid_argument);  // slide == size
  CHECK_THROWS_AS(hopping_window(100, 33), std::invalid_argument);   // size % slide != 0
  WindowSpec w;
  w.kind = WindowSpec::Kind::tumbling;
  w.size_ms = 100;
  w.slide_ms = 50;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  CHECK_THROWS_AS(windows_for(-1, tumbling_window(100)), std::invalid_argument);
}

TEST_CASE("aggregate add and merge") {
  Aggregate a;
  a.add(3.0);
  a.add(1.0);
  a.add(2.0);
  CHECK(a.sum == 6.0);
  CHECK(a.count == 3);
  CHECK(a.min == 1.0);
  CHECK(a.max == 3.0);
  CHECK(a.avg() == 2.0);

  Aggregate b;
  b.add(10.0);
  a.merge(b);
  CHECK(a.sum == 16.0);
  CHECK(a.count == 4);
  CHECK(a.max == 10.0);
  CHECK(a.min == 1.0);
}

TEST_CASE("hour_of_day") {
  CHECK(hour_of_day((13 * 3600 + 45 * 60 + 12) * 1000) == 13);  // 13:45:12
  CHECK(hour_of_day(0) == 0);
  CHECK(hour_of_day(24 * 3600 * 1000LL) == 0);      // next midnight
  CHECK(hour_of_day(25 * 3600 * 1000LL + 1) == 1);  // day wraps
}
