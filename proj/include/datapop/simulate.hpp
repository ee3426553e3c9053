#pragma once

#include <cstdint>
#include <string_view>

#include "datapop/forest.hpp"
#include "datapop/smoothing.hpp"
#include "datapop/strategy.hpp"
#include "datapop/trace.hpp"

namespace datapop {

enum class Policy { metric_m, lru, lfu };

std::string_view to_string(Policy policy);
Policy parse_policy(std::string_view text);

struct SimulationConfig {
  int start_week = 0;
  int end_week = 0;                 // 0 = trace horizon
  std::int64_t capacity_bytes = 0;  // 0 = capacity_fraction * bytes stored at start_week
  double capacity_fraction = 0.9;
  int max_replicas = kDefaultMaxReplicas;
  double purge_threshold = 0.0;  // 0 disables the long-term purge
  int purge_cadence = 26;        // weeks between purges
  Policy policy = Policy::metric_m;
  double alpha_step = kDefaultAlphaStep;
};

struct SimulationResult {
  StorageState initial;
  StorageState final_state;
  ActionLog log;
  int restores = 0;  // accesses to a dataset with no disk replica
  std::int64_t restored_bytes = 0;
  int purged = 0;
  int weeks = 0;
};

// Replays weeks [start_week, end_week) of the trace against a storage of
// fixed capacity. Every dataset of the trace has a slot in the state; those
// created later start with zero replicas and receive their initial replicas
// (logged as add_replica) in their creation week. Each week, in order:
//   1. newly created datasets are stored;
//   2. an access to a dataset without disk replicas restores one (a mistake);
//   3. forecasts (metric_m) or recency/frequency rankings (lru, lfu) are
//      computed from history up to and including this week;
//   4. on purge weeks, datasets below purge_threshold are purged (needs model);
//   5. if over capacity, replicas are freed; then free space is filled.
// replay(result.initial, result.log) == result.final_state.
SimulationResult simulate(const Trace& trace, const SimulationConfig& config, const ForestModel* model = nullptr);

}  // namespace datapop
