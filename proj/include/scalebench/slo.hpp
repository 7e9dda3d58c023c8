#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace scalebench {

/// Consumer-lag samples over virtual time for one consumer group.
/// t is strictly increasing; samples before `warmup_seconds` are ignored by
/// the trend fit.
struct LagSample {
  double t_seconds = 0.0;
  double lag = 0.0;
};

struct LagSeries {
  std::vector<LagSample> samples;
  double warmup_seconds = 0.0;
};

struct NoSamplesAfterWarmup : std::runtime_error {
  NoSamplesAfterWarmup()
      : std::runtime_error("fewer than 2 lag samples after the warm-up period") {}
};

/// Ordinary least-squares slope of lag over time, messages/second, fitted to
/// the samples with t >= warmup. Both axes are shifted by the first
/// qualifying sample before fitting, so the result is exactly invariant
/// under adding a constant to every lag value.
inline double lag_trend(const LagSeries& series) {
  double t0 = 0.0, y0 = 0.0;
  bool have_first = false;
  std::size_t n = 0;
  double sum_t = 0.0, sum_y = 0.0;
  for (const LagSample& s : series.samples) {
    if (s.t_seconds < series.warmup_seconds) continue;
    if (!have_first) {
      t0 = s.t_seconds;
      y0 = s.lag;
      have_first = true;
    }
    sum_t += s.t_seconds - t0;
    sum_y += s.lag - y0;
    ++n;
  }
  if (n < 2) throw NoSamplesAfterWarmup();
  const double mean_t = sum_t / static_cast<double>(n);
  const double mean_y = sum_y / static_cast<double>(n);
  double stt = 0.0, sty = 0.0;
  for (const LagSample& s : series.samples) {
    if (s.t_seconds < series.warmup_seconds) continue;
    const double dt = (s.t_seconds - t0) - mean_t;
    const double dy = (s.lag - y0) - mean_y;
    stt += dt * dt;
    sty += dt * dy;
  }
  if (stt == 0.0) throw std::invalid_argument("lag_trend: degenerate time axis");
  return sty / stt;
}

enum class SloId { lag_trend, dropped_ratio };

inline std::string to_string(SloId id) {
  return id == SloId::lag_trend ? "lag_trend" : "dropped_ratio";
}

/// Pass/fail with the measured statistic and the threshold it was held
/// against. passed <=> measured <= threshold (boundaries inclusive).
struct SloVerdict {
  SloId slo_id;
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Lag-trend SLO: the slope must not exceed `ratio` of the generated message
/// volume. Negative slopes always pass.
inline SloVerdict check_lag_slo(double slope, double load_msgs_per_sec, double ratio) {
  if (load_msgs_per_sec <= 0) throw std::invalid_argument("check_lag_slo: load must be > 0");
  if (ratio <= 0 || ratio >= 1) throw std::invalid_argument("check_lag_slo: ratio must be in (0,1)");
  const double threshold = ratio * load_msgs_per_sec;
  return SloVerdict{SloId::lag_trend, slope, threshold, slope <= threshold};
}

/// Dropped-records SLO: at most `max_ratio` of the generated messages may be
/// discarded for lateness.
inline SloVerdict check_dropped_slo(std::int64_t dropped_count,
                                    std::int64_t generated_count,
                                    double max_ratio = 0.01) {
  if (generated_count <= 0)
    throw std::invalid_argument("check_dropped_slo: generated_count must be > 0");
  const double measured =
      static_cast<double>(dropped_count) / static_cast<double>(generated_count);
  return SloVerdict{SloId::dropped_ratio, measured, max_ratio, measured <= max_ratio};
}

enum class RepetitionRule { majority, all };

/// A repetition passes iff all its SLO verdicts pass; the cell passes per the
/// aggregation rule (strict majority by default).
inline bool aggregate_repetitions(const std::vector<std::vector<SloVerdict>>& repetitions,
                                  RepetitionRule rule = RepetitionRule::majority) {
  if (repetitions.empty())
    throw std::invalid_argument("aggregate_repetitions: need >= 1 repetition");
  std::size_t passing = 0;
  for (const auto& verdicts : repetitions) {
    bool all_pass = true;
    for (const SloVerdict& v : verdicts) all_pass = all_pass && v.passed;
    if (all_pass) ++passing;
  }
  if (rule == RepetitionRule::all) return passing == repetitions.size();
  return 2 * passing > repetitions.size();
}

}  // namespace scalebench
