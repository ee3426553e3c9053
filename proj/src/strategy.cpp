#include "datapop/strategy.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "datapop/error.hpp"

namespace datapop {

double metric_m(double forecast, int n_replicas) {
  if (n_replicas < 1) throw ValidationError("metric_m needs at least one replica");
  return forecast / n_replicas;
}

StorageState::StorageState(std::int64_t capacity_bytes, std::vector<DatasetSlot> slots)
    : slots_(std::move(slots)), capacity_(capacity_bytes) {
  if (capacity_ < 0) throw ValidationError("capacity_bytes must be >= 0");
  std::ranges::sort(slots_, {}, &DatasetSlot::dataset_id);
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const auto& s = slots_[i];
    if (i > 0 && slots_[i - 1].dataset_id == s.dataset_id) {
      throw ValidationError("duplicate dataset_id '" + s.dataset_id + "' in storage state");
    }
    if (s.size_bytes <= 0) throw ValidationError("dataset '" + s.dataset_id + "': size_bytes must be > 0");
    if (s.n_replicas < 0) throw ValidationError("dataset '" + s.dataset_id + "': negative replica count");
    if (!(s.forecast >= 0.0)) throw ValidationError("dataset '" + s.dataset_id + "': forecast must be >= 0");
    used_ += s.n_replicas * s.size_bytes;
    refresh_metric(i);
  }
}

std::optional<std::size_t> StorageState::index_of(std::string_view dataset_id) const {
  const auto it = std::ranges::lower_bound(slots_, dataset_id, {}, &DatasetSlot::dataset_id);
  if (it == slots_.end() || it->dataset_id != dataset_id) return std::nullopt;
  return static_cast<std::size_t>(it - slots_.begin());
}

void StorageState::refresh_metric(std::size_t i) {
  auto& s = slots_[i];
  s.m = s.n_replicas >= 1 ? metric_m(s.forecast, s.n_replicas) : 0.0;
}

void StorageState::set_forecast(std::size_t i, double forecast) {
  if (!(forecast >= 0.0)) throw ValidationError("forecast must be >= 0");
  slots_[i].forecast = forecast;
  refresh_metric(i);
}

void StorageState::add_replica(std::size_t i) {
  ++slots_[i].n_replicas;
  used_ += slots_[i].size_bytes;
  refresh_metric(i);
}

void StorageState::remove_replica(std::size_t i) {
  if (slots_[i].n_replicas < 1) throw ValidationError("dataset '" + slots_[i].dataset_id + "' has no replica");
  --slots_[i].n_replicas;
  used_ -= slots_[i].size_bytes;
  refresh_metric(i);
}

std::int64_t StorageState::purge(std::size_t i) {
  const std::int64_t released = slots_[i].n_replicas * slots_[i].size_bytes;
  slots_[i].n_replicas = 0;
  used_ -= released;
  refresh_metric(i);
  return released;
}

std::string_view to_string(Action action) {
  switch (action) {
    case Action::remove_replica: return "remove_replica";
    case Action::add_replica: return "add_replica";
    case Action::purge: return "purge";
    case Action::restore: return "restore";
  }
  return "unknown";
}

Action parse_action(std::string_view text) {
  for (auto a : {Action::remove_replica, Action::add_replica, Action::purge, Action::restore}) {
    if (to_string(a) == text) return a;
  }
  throw ValidationError("unknown action '" + std::string(text) + "'");
}

void apply(StorageState& state, const ActionRecord& record) {
  const auto i = state.index_of(record.dataset_id);
  if (!i) throw ValidationError("action for unknown dataset '" + record.dataset_id + "'");
  const auto& slot = state.slot(*i);
  std::int64_t expected = 0;
  switch (record.action) {
    case Action::remove_replica:
      expected = -slot.size_bytes;
      if (slot.n_replicas < 1) throw ValidationError("replay: remove from empty dataset '" + record.dataset_id + "'");
      break;
    case Action::add_replica: expected = slot.size_bytes; break;
    case Action::purge: expected = -slot.n_replicas * slot.size_bytes; break;
    case Action::restore:
      expected = slot.size_bytes;
      if (slot.n_replicas != 0) throw ValidationError("replay: restore of stored dataset '" + record.dataset_id + "'");
      break;
  }
  if (expected != record.bytes_delta) {
    throw ValidationError("replay: bytes_delta mismatch for '" + record.dataset_id + "'");
  }
  switch (record.action) {
    case Action::remove_replica: state.remove_replica(*i); break;
    case Action::add_replica:
    case Action::restore: state.add_replica(*i); break;
    case Action::purge: state.purge(*i); break;
  }
}

StorageState replay(StorageState initial, std::span<const ActionRecord> log) {
  for (const auto& record : log) apply(initial, record);
  return initial;
}

StrategyOutcome free_space(StorageState state, std::int64_t target_bytes, int week) {
  if (target_bytes < 0) throw ValidationError("target_bytes must be >= 0");
  auto before = [&state](std::size_t a, std::size_t b) {
    const auto& x = state.slot(a);
    const auto& y = state.slot(b);
    if (x.m != y.m) return x.m < y.m;
    if (x.size_bytes != y.size_bytes) return x.size_bytes > y.size_bytes;
    return x.dataset_id < y.dataset_id;
  };
  std::set<std::size_t, decltype(before)> removable(before);
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.slot(i).n_replicas >= 2) removable.insert(i);
  }

  StrategyOutcome out;
  while (out.bytes < target_bytes && !removable.empty()) {
    const std::size_t i = *removable.begin();
    removable.erase(removable.begin());
    state.remove_replica(i);
    const auto& slot = state.slot(i);
    out.bytes += slot.size_bytes;
    out.log.push_back({week, slot.dataset_id, Action::remove_replica, -slot.size_bytes});
    if (slot.n_replicas >= 2) removable.insert(i);
  }
  out.state = std::move(state);
  return out;
}

StrategyOutcome fill_space(StorageState state, int max_replicas, int week) {
  if (max_replicas < 1) throw ValidationError("max_replicas must be >= 1");
  auto before = [&state](std::size_t a, std::size_t b) {
    const auto& x = state.slot(a);
    const auto& y = state.slot(b);
    if (x.m != y.m) return x.m > y.m;
    if (x.forecast != y.forecast) return x.forecast > y.forecast;
    if (x.size_bytes != y.size_bytes) return x.size_bytes < y.size_bytes;
    return x.dataset_id < y.dataset_id;
  };
  std::set<std::size_t, decltype(before)> candidates(before);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& s = state.slot(i);
    if (s.n_replicas >= 1 && s.n_replicas < max_replicas) candidates.insert(i);
  }

  StrategyOutcome out;
  while (!candidates.empty()) {
    const std::size_t i = *candidates.begin();
    candidates.erase(candidates.begin());
    // Free space never grows inside this loop, so a dataset that does not fit
    // now never will.
    if (state.slot(i).size_bytes > state.free_bytes()) continue;
    state.add_replica(i);
    const auto& slot = state.slot(i);
    out.bytes += slot.size_bytes;
    out.log.push_back({week, slot.dataset_id, Action::add_replica, slot.size_bytes});
    if (slot.n_replicas < max_replicas) candidates.insert(i);
  }
  out.state = std::move(state);
  return out;
}

namespace {

template <typename Less>
std::vector<std::string> rank_by(const StorageState& state, std::span<const FeatureVector> features, Less less) {
  std::unordered_map<std::string_view, const FeatureVector*> by_id;
  by_id.reserve(features.size());
  for (const auto& f : features) by_id.emplace(f.dataset_id, &f);
  std::vector<const FeatureVector*> rows;
  rows.reserve(state.size());
  for (const auto& slot : state.slots()) {
    const auto it = by_id.find(slot.dataset_id);
    if (it == by_id.end()) throw ValidationError("no features for dataset '" + slot.dataset_id + "'");
    rows.push_back(it->second);
  }
  std::ranges::sort(rows, [&](const FeatureVector* a, const FeatureVector* b) {
    if (less(*a, *b)) return true;
    if (less(*b, *a)) return false;
    return a->dataset_id < b->dataset_id;
  });
  std::vector<std::string> order;
  order.reserve(rows.size());
  for (const auto* r : rows) order.push_back(r->dataset_id);
  return order;
}

std::vector<std::size_t> resolve(const StorageState& state, std::span<const std::string> order) {
  std::vector<std::size_t> idx;
  idx.reserve(order.size());
  for (const auto& id : order) {
    const auto i = state.index_of(id);
    if (!i) throw ValidationError("ordering names unknown dataset '" + id + "'");
    idx.push_back(*i);
  }
  return idx;
}

}  // namespace

std::vector<std::string> rank_lru(const StorageState& state, std::span<const FeatureVector> features) {
  return rank_by(state, features, [](const FeatureVector& a, const FeatureVector& b) { return a.recency > b.recency; });
}

std::vector<std::string> rank_lfu(const StorageState& state, std::span<const FeatureVector> features) {
  return rank_by(state, features,
                 [](const FeatureVector& a, const FeatureVector& b) { return a.frequency < b.frequency; });
}

StrategyOutcome free_space_by_order(StorageState state, std::span<const std::string> removal_order,
                                    std::int64_t target_bytes, int week) {
  if (target_bytes < 0) throw ValidationError("target_bytes must be >= 0");
  StrategyOutcome out;
  for (std::size_t i : resolve(state, removal_order)) {
    while (out.bytes < target_bytes && state.slot(i).n_replicas >= 2) {
      state.remove_replica(i);
      const auto& slot = state.slot(i);
      out.bytes += slot.size_bytes;
      out.log.push_back({week, slot.dataset_id, Action::remove_replica, -slot.size_bytes});
    }
    if (out.bytes >= target_bytes) break;
  }
  out.state = std::move(state);
  return out;
}

StrategyOutcome fill_space_by_order(StorageState state, std::span<const std::string> removal_order,
                                    int max_replicas, int week) {
  if (max_replicas < 1) throw ValidationError("max_replicas must be >= 1");
  StrategyOutcome out;
  const auto idx = resolve(state, removal_order);
  for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
    const std::size_t i = *it;
    while (state.slot(i).n_replicas >= 1 && state.slot(i).n_replicas < max_replicas &&
           state.slot(i).size_bytes <= state.free_bytes()) {
      state.add_replica(i);
      const auto& slot = state.slot(i);
      out.bytes += slot.size_bytes;
      out.log.push_back({week, slot.dataset_id, Action::add_replica, slot.size_bytes});
    }
  }
  out.state = std::move(state);
  return out;
}

StrategyOutcome long_term_purge(StorageState state, const std::map<std::string, double>& probabilities,
                                double threshold, int week) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("purge threshold must be in [0, 1]");
  StrategyOutcome out;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& slot = state.slot(i);
    if (slot.n_replicas == 0) continue;
    const auto it = probabilities.find(slot.dataset_id);
    if (it == probabilities.end()) {
      throw ValidationError("no access probability for stored dataset '" + slot.dataset_id + "'");
    }
    if (it->second < threshold) {
      const std::int64_t released = state.purge(i);
      out.bytes += released;
      out.log.push_back({week, slot.dataset_id, Action::purge, -released});
    }
  }
  out.state = std::move(state);
  return out;
}

}  // namespace datapop
