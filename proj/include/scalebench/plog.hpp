#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scalebench {

/// One message flowing through a topic. Plain sensor readings carry a single
/// measurement in `value` (agg_count == 0). Records produced by window
/// aggregation and shipped through repartition topics carry the full
/// (sum, count, min, max) payload plus the window they belong to; for those,
/// `value` holds the sum.
struct Record {
  std::string key;
  std::int64_t event_time_ms = 0;
  double value = 0.0;
  std::int64_t ingest_seq = -1;  // assigned on append, per partition

  // Aggregate transport (repartition/output topics only).
  std::int64_t window_start_ms = -1;  // -1: plain measurement
  std::int64_t agg_count = 0;         // 0: plain measurement
  double agg_min = 0.0;
  double agg_max = 0.0;
  bool final_result = false;  // window-close emission vs. early emission
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Stable hash partitioning: same (key, n) maps to the same partition on
/// every run and platform.
inline std::uint32_t partition_for_key(std::string_view key, std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("partition_for_key: n must be >= 1");
  return static_cast<std::uint32_t>(fnv1a64(key) % n);
}

/// In-process append-only partitioned log with consumer groups and committed
/// offsets. Appends are routed by partition_for_key. Per partition:
/// committed_offset <= read_position <= partition length.
///
/// All public methods are safe for concurrent use (one broker-wide mutex);
/// in virtual-time mode everything runs on one scheduler thread anyway.
class Broker {
 public:
  void create_topic(const std::string& name, std::uint32_t partitions) {
    if (partitions == 0) throw std::invalid_argument("topic needs >= 1 partition");
    std::lock_guard lock(mu_);
    if (topics_.count(name)) throw std::invalid_argument("topic exists: " + name);
    topics_[name].partitions.resize(partitions);
  }

  bool has_topic(const std::string& name) const {
    std::lock_guard lock(mu_);
    return topics_.count(name) != 0;
  }

  std::uint32_t partition_count(const std::string& topic) const {
    std::lock_guard lock(mu_);
    return static_cast<std::uint32_t>(find_topic(topic).partitions.size());
  }

  /// Appends one record, routed by its key. Returns the per-partition
  /// ingest sequence number (== position in the partition).
  std::int64_t append(const std::string& topic, Record rec) {
    std::lock_guard lock(mu_);
    return append_locked(find_topic(topic), std::move(rec));
  }

  std::size_t append_batch(const std::string& topic, std::vector<Record>&& recs) {
    std::lock_guard lock(mu_);
    Topic& t = find_topic(topic);
    for (Record& r : recs) append_locked(t, std::move(r));
    std::size_t n = recs.size();
    recs.clear();
    return n;
  }

  /// Registers a consumer group on a topic with all offsets at zero.
  /// Registering twice is a no-op (offsets are kept).
  void register_group(const std::string& group, const std::string& topic) {
    std::lock_guard lock(mu_);
    const Topic& t = find_topic(topic);
    GroupState& gs = groups_[group][topic];
    if (gs.read_pos.empty()) {
      gs.read_pos.assign(t.partitions.size(), 0);
      gs.committed.assign(t.partitions.size(), 0);
    }
  }

  /// Copies up to `max` records from the group's read position in one
  /// partition into `out` (appended) and advances the read position.
  /// Returns the number of records delivered.
  std::size_t poll(const std::string& topic, const std::string& group,
                   std::uint32_t partition, std::size_t max,
                   std::vector<Record>& out) {
    std::lock_guard lock(mu_);
    const Topic& t = find_topic(topic);
    GroupState& gs = find_group(group, topic);
    const auto& part = t.partitions.at(partition);
    std::int64_t& pos = gs.read_pos.at(partition);
    std::size_t n = 0;
    while (n < max && pos < static_cast<std::int64_t>(part.size())) {
      out.push_back(part[static_cast<std::size_t>(pos)]);
      ++pos;
      ++n;
    }
    return n;
  }

  /// Records available to the group in one partition (from read position).
  std::int64_t available(const std::string& topic, const std::string& group,
                         std::uint32_t partition) const {
    std::lock_guard lock(mu_);
    const Topic& t = find_topic(topic);
    const GroupState& gs = find_group(group, topic);
    return static_cast<std::int64_t>(t.partitions.at(partition).size()) -
           gs.read_pos.at(partition);
  }

  /// committed_offsets := snapshot of read positions.
  void commit(const std::string& group, const std::string& topic) {
    std::lock_guard lock(mu_);
    GroupState& gs = find_group(group, topic);
    gs.committed = gs.read_pos;
  }

  /// Commits every topic the group is registered on.
  void commit_all(const std::string& group) {
    std::lock_guard lock(mu_);
    auto it = groups_.find(group);
    if (it == groups_.end()) throw std::out_of_range("unknown group: " + group);
    for (auto& [topic, gs] : it->second) gs.committed = gs.read_pos;
  }

  /// Sum over partitions of (partition length - committed offset).
  std::int64_t total_lag(const std::string& topic, const std::string& group) const {
    std::lock_guard lock(mu_);
    return lag_locked(topic, find_group(group, topic));
  }

  /// Total lag across every topic the group is registered on.
  std::int64_t group_lag(const std::string& group) const {
    std::lock_guard lock(mu_);
    auto it = groups_.find(group);
    if (it == groups_.end()) throw std::out_of_range("unknown group: " + group);
    std::int64_t lag = 0;
    for (const auto& [topic, gs] : it->second) lag += lag_locked(topic, gs);
    return lag;
  }

  std::int64_t appended_count(const std::string& topic) const {
    std::lock_guard lock(mu_);
    const Topic& t = find_topic(topic);
    std::int64_t n = 0;
    for (const auto& p : t.partitions) n += static_cast<std::int64_t>(p.size());
    return n;
  }

  std::int64_t committed_count(const std::string& topic, const std::string& group) const {
    std::lock_guard lock(mu_);
    const GroupState& gs = find_group(group, topic);
    std::int64_t n = 0;
    for (std::int64_t c : gs.committed) n += c;
    return n;
  }

  std::int64_t partition_size(const std::string& topic, std::uint32_t partition) const {
    std::lock_guard lock(mu_);
    return static_cast<std::int64_t>(find_topic(topic).partitions.at(partition).size());
  }

  /// Snapshot of a whole topic in (partition, position) order. Test helper.
  std::vector<Record> dump_topic(const std::string& topic) const {
    std::lock_guard lock(mu_);
    const Topic& t = find_topic(topic);
    std::vector<Record> all;
    for (const auto& p : t.partitions) all.insert(all.end(), p.begin(), p.end());
    return all;
  }

  std::vector<std::string> topics_of_group(const std::string& group) const {
    std::lock_guard lock(mu_);
    auto it = groups_.find(group);
    if (it == groups_.end()) throw std::out_of_range("unknown group: " + group);
    std::vector<std::string> names;
    for (const auto& [topic, gs] : it->second) names.push_back(topic);
    return names;
  }

 private:
  struct Topic {
    // deque: references stay valid while another stage appends mid-tick
    std::vector<std::deque<Record>> partitions;
  };
  struct GroupState {
    std::vector<std::int64_t> committed;
    std::vector<std::int64_t> read_pos;
  };

  std::int64_t append_locked(Topic& t, Record&& rec) {
    auto& part = t.partitions[partition_for_key(
        rec.key, static_cast<std::uint32_t>(t.partitions.size()))];
    rec.ingest_seq = static_cast<std::int64_t>(part.size());
    part.push_back(std::move(rec));
    return part.back().ingest_seq;
  }

  Topic& find_topic(const std::string& name) {
    auto it = topics_.find(name);
    if (it == topics_.end()) throw std::out_of_range("unknown topic: " + name);
    return it->second;
  }
  const Topic& find_topic(const std::string& name) const {
    auto it = topics_.find(name);
    if (it == topics_.end()) throw std::out_of_range("unknown topic: " + name);
    return it->second;
  }
  GroupState& find_group(const std::string& group, const std::string& topic) {
    auto git = groups_.find(group);
    if (git == groups_.end() || !git->second.count(topic))
      throw std::out_of_range("group " + group + " not registered on " + topic);
    return git->second[topic];
  }
  const GroupState& find_group(const std::string& group, const std::string& topic) const {
    auto git = groups_.find(group);
    if (git == groups_.end()) throw std::out_of_range("unknown group: " + group);
    auto tit = git->second.find(topic);
    if (tit == git->second.end())
      throw std::out_of_range("group " + group + " not registered on " + topic);
    return tit->second;
  }

  std::int64_t lag_locked(const std::string& topic, const GroupState& gs) const {
    const Topic& t = find_topic(topic);
    std::int64_t lag = 0;
    for (std::size_t p = 0; p < t.partitions.size(); ++p)
      lag += static_cast<std::int64_t>(t.partitions[p].size()) - gs.committed[p];
    return lag;
  }

  mutable std::mutex mu_;
  std::map<std::string, Topic> topics_;
  // group -> topic -> offsets
  std::map<std::string, std::map<std::string, GroupState>> groups_;
};

}  // namespace scalebench
