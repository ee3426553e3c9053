#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "datapop/features.hpp"

namespace datapop {

// Replica-count ceiling used by fill_space unless configured otherwise.
inline constexpr int kDefaultMaxReplicas = 4;

// Expected next-week accesses per disk replica. Low M loses a replica first,
// high M gains one first.
double metric_m(double forecast, int n_replicas);

struct DatasetSlot {
  std::string dataset_id;
  std::int64_t size_bytes = 1;
  int n_replicas = 1;     // disk replicas; 0 only after a purge (the tape copy remains)
  double forecast = 0.0;  // predicted next-week accesses, >= 0
  double m = 0.0;         // metric_m(forecast, n_replicas), 0 when n_replicas == 0

  friend bool operator==(const DatasetSlot&, const DatasetSlot&) = default;
};

// Disk occupancy of a set of datasets. Slots are kept in dataset_id order and
// used_bytes always equals sum(n_replicas * size_bytes).
class StorageState {
 public:
  StorageState() = default;
  StorageState(std::int64_t capacity_bytes, std::vector<DatasetSlot> slots);

  const std::vector<DatasetSlot>& slots() const noexcept { return slots_; }
  const DatasetSlot& slot(std::size_t i) const { return slots_[i]; }
  std::optional<std::size_t> index_of(std::string_view dataset_id) const;
  std::size_t size() const noexcept { return slots_.size(); }

  std::int64_t capacity_bytes() const noexcept { return capacity_; }
  std::int64_t used_bytes() const noexcept { return used_; }
  std::int64_t free_bytes() const noexcept { return capacity_ - used_; }

  void set_forecast(std::size_t i, double forecast);
  void add_replica(std::size_t i);
  void remove_replica(std::size_t i);
  // Drops every disk replica; returns the number of bytes released.
  std::int64_t purge(std::size_t i);

  friend bool operator==(const StorageState&, const StorageState&) = default;

 private:
  void refresh_metric(std::size_t i);

  std::vector<DatasetSlot> slots_;
  std::int64_t capacity_ = 0;
  std::int64_t used_ = 0;
};

enum class Action { remove_replica, add_replica, purge, restore };

std::string_view to_string(Action action);
Action parse_action(std::string_view text);

struct ActionRecord {
  int week = 0;
  std::string dataset_id;
  Action action = Action::remove_replica;
  std::int64_t bytes_delta = 0;  // change of used_bytes

  friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
};

using ActionLog = std::vector<ActionRecord>;

struct StrategyOutcome {
  StorageState state;
  ActionLog log;
  std::int64_t bytes = 0;  // freed by free_space/purge, added by fill_space
};

// Applies one logged action to `state`; throws if it does not fit the state.
void apply(StorageState& state, const ActionRecord& record);
StorageState replay(StorageState initial, std::span<const ActionRecord> log);

// Removes replicas one at a time from the dataset with the lowest M among
// those holding at least two, until target_bytes are freed or nothing is
// removable. Ties: lower M, then larger size, then smaller dataset_id.
StrategyOutcome free_space(StorageState state, std::int64_t target_bytes, int week = 0);

// Adds replicas one at a time to the dataset with the highest M among those
// with 1 <= n_replicas < max_replicas whose size fits in the free space.
// Ties: higher M, then larger forecast, then smaller size, then smaller dataset_id.
StrategyOutcome fill_space(StorageState state, int max_replicas, int week = 0);

// Baseline removal orders over the datasets in `state`: largest recency
// first (LRU) or smallest frequency first (LFU); ties by dataset_id.
std::vector<std::string> rank_lru(const StorageState& state, std::span<const FeatureVector> features);
std::vector<std::string> rank_lfu(const StorageState& state, std::span<const FeatureVector> features);

// Order-driven counterparts of free_space/fill_space for the baselines:
// replicas are taken from the earliest dataset in `removal_order` that still
// holds two or more, and added to the latest one below max_replicas that fits.
StrategyOutcome free_space_by_order(StorageState state, std::span<const std::string> removal_order,
                                    std::int64_t target_bytes, int week = 0);
StrategyOutcome fill_space_by_order(StorageState state, std::span<const std::string> removal_order,
                                    int max_replicas, int week = 0);

// Purges every stored dataset whose long-term access probability is below
// `threshold`.
StrategyOutcome long_term_purge(StorageState state, const std::map<std::string, double>& probabilities,
                                double threshold, int week = 0);

}  // namespace datapop
