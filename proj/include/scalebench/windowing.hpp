#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace scalebench {

/// Event-time window shape. Tumbling windows have slide == size; hopping
/// windows advance by a smaller slide that divides the size, so each event
/// falls into size/slide windows.
struct WindowSpec {
  enum class Kind { tumbling, hopping };
  Kind kind = Kind::tumbling;
  std::int64_t size_ms = 60'000;
  std::int64_t slide_ms = 60'000;
  std::int64_t grace_ms = 0;
  std::int64_t early_emit_interval_ms = 0;  // 0: final emission only

  void validate() const {
    if (size_ms <= 0 || slide_ms <= 0) throw std::invalid_argument("window size/slide must be > 0");
    if (grace_ms < 0) throw std::invalid_argument("window grace must be >= 0");
    if (kind == Kind::tumbling && slide_ms != size_ms)
      throw std::invalid_argument("tumbling window requires slide == size");
    if (kind == Kind::hopping && (slide_ms >= size_ms || size_ms % slide_ms != 0))
      throw std::invalid_argument("hopping window requires slide < size and size % slide == 0");
  }

  /// Windows per record once past the clipped start-of-time region.
  std::int64_t windows_per_record() const { return size_ms / slide_ms; }

  std::int64_t window_end(std::int64_t start_ms) const { return start_ms + size_ms; }
};

inline WindowSpec tumbling_window(std::int64_t size_ms, std::int64_t grace_ms = 0) {
  WindowSpec w;
  w.kind = WindowSpec::Kind::tumbling;
  w.size_ms = size_ms;
  w.slide_ms = size_ms;
  w.grace_ms = grace_ms;
  w.validate();
  return w;
}

inline WindowSpec hopping_window(std::int64_t size_ms, std::int64_t slide_ms,
                                 std::int64_t grace_ms = 0,
                                 std::int64_t early_emit_interval_ms = 0) {
  WindowSpec w;
  w.kind = WindowSpec::Kind::hopping;
  w.size_ms = size_ms;
  w.slide_ms = slide_ms;
  w.grace_ms = grace_ms;
  w.early_emit_interval_ms = early_emit_interval_ms;
  w.validate();
  return w;
}

/// Calls fn(window_start) for every window containing ts, ascending. Starts
/// are the multiples s of slide with s <= ts < s + size and s >= 0 (windows
/// are clipped at the start of time).
template <typename Fn>
inline void for_each_window(std::int64_t ts_ms, const WindowSpec& w, Fn&& fn) {
  if (ts_ms < 0) throw std::invalid_argument("event time must be >= 0");
  const std::int64_t last = (ts_ms / w.slide_ms) * w.slide_ms;  // latest start <= ts
  std::int64_t first = last - (w.size_ms - w.slide_ms);
  if (first < 0) first = 0;
  for (std::int64_t s = first; s <= last; s += w.slide_ms) fn(s);
}

inline std::vector<std::int64_t> windows_for(std::int64_t ts_ms, const WindowSpec& w) {
  std::vector<std::int64_t> starts;
  for_each_window(ts_ms, w, [&](std::int64_t s) { starts.push_back(s); });
  return starts;
}

/// Running (sum, count, min, max); average is derivable without a second pass.
struct Aggregate {
  double sum = 0.0;
  std::int64_t count = 0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void add(double v) {
    sum += v;
    ++count;
    if (v < min) min = v;
    if (v > max) max = v;
  }
  void merge(const Aggregate& o) {
    sum += o.sum;
    count += o.count;
    if (o.min < min) min = o.min;
    if (o.max > max) max = o.max;
  }
  double avg() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
};

inline std::int64_t hour_of_day(std::int64_t event_time_ms) {
  return (event_time_ms / 3'600'000) % 24;
}

}  // namespace scalebench
