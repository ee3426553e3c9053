#pragma once

// Seeded random instances for property tests.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "datapop/strategy.hpp"
#include "oracles.hpp"

namespace gen {

// Small storage state: ids "d0".."d{n-1}", a handful of distinct sizes and
// forecasts so ties actually occur.
inline datapop::StorageState storage(std::mt19937& rng, int max_datasets, int max_replicas) {
  std::uniform_int_distribution<int> count(1, max_datasets), replicas(1, max_replicas), size(1, 4), forecast(0, 6);
  const int n = count(rng);
  std::vector<datapop::DatasetSlot> slots;
  std::int64_t used = 0;
  for (int i = 0; i < n; ++i) {
    datapop::DatasetSlot s;
    s.dataset_id = "d" + std::to_string(i);
    s.size_bytes = size(rng) * 10;
    s.n_replicas = replicas(rng);
    s.forecast = forecast(rng) * 0.5;
    used += s.size_bytes * s.n_replicas;
    slots.push_back(s);
  }
  std::uniform_int_distribution<std::int64_t> headroom(0, 60);
  return datapop::StorageState(used + headroom(rng), std::move(slots));
}

inline std::vector<oracle::Item> items(const datapop::StorageState& state) {
  std::vector<oracle::Item> out;
  for (const auto& s : state.slots()) out.push_back({s.dataset_id, s.size_bytes, s.n_replicas, s.forecast});
  return out;
}

inline std::map<std::string, double> probabilities(std::mt19937& rng, const datapop::StorageState& state) {
  std::uniform_int_distribution<int> p(0, 10);
  std::map<std::string, double> out;
  for (const auto& s : state.slots()) out[s.dataset_id] = p(rng) / 10.0;
  return out;
}

}  // namespace gen
