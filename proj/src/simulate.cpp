#include "datapop/simulate.hpp"

#include <cmath>

#include "datapop/error.hpp"
#include "datapop/parallel.hpp"

namespace datapop {

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::metric_m: return "metric_m";
    case Policy::lru: return "lru";
    case Policy::lfu: return "lfu";
  }
  return "unknown";
}

Policy parse_policy(std::string_view text) {
  for (auto p : {Policy::metric_m, Policy::lru, Policy::lfu}) {
    if (to_string(p) == text) return p;
  }
  throw ValidationError("unknown policy '" + std::string(text) + "' (expected metric_m, lru or lfu)");
}

namespace {

void append(ActionLog& log, ActionLog&& more) {
  log.insert(log.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

// Features for every dataset of the trace at window_end; datasets not yet
// created get sentinel rows so rankings can cover the whole state.
std::vector<FeatureVector> features_for_all(const Trace& trace, int window_end) {
  auto features = extract_features(trace, window_end);
  if (features.size() == trace.dataset_count()) return features;
  for (const auto& meta : trace.metas()) {
    if (meta.creation_week >= window_end) {
      FeatureVector fv;
      fv.dataset_id = meta.dataset_id;
      fv.recency = fv.reuse_distance = fv.first_access_age = window_end;
      features.push_back(std::move(fv));
    }
  }
  return features;
}

}  // namespace

SimulationResult simulate(const Trace& trace, const SimulationConfig& config, const ForestModel* model) {
  const int end = config.end_week == 0 ? trace.horizon_weeks() : config.end_week;
  if (config.start_week < 0 || config.start_week >= end || end > trace.horizon_weeks()) {
    throw ValidationError("simulation weeks [" + std::to_string(config.start_week) + ", " + std::to_string(end) +
                          ") outside the trace horizon " + std::to_string(trace.horizon_weeks()));
  }
  if (config.max_replicas < 1) throw ValidationError("max_replicas must be >= 1");
  if (config.purge_cadence < 1) throw ValidationError("purge_cadence must be >= 1");
  if (!(config.purge_threshold >= 0.0 && config.purge_threshold <= 1.0)) {
    throw ValidationError("purge_threshold must be in [0, 1]");
  }
  if (config.purge_threshold > 0.0 && model == nullptr) {
    throw ValidationError("model not found: the long-term purge needs a trained model");
  }
  if (config.capacity_bytes < 0 || !(config.capacity_fraction > 0.0)) {
    throw ValidationError("capacity must be positive");
  }

  const auto& metas = trace.metas();
  std::vector<DatasetSlot> slots;
  slots.reserve(metas.size());
  std::int64_t stored = 0;
  for (const auto& meta : metas) {
    const int n = meta.creation_week < config.start_week ? meta.initial_replicas : 0;
    slots.push_back({meta.dataset_id, meta.size_bytes, n, 0.0, 0.0});
    stored += n * meta.size_bytes;
  }
  const std::int64_t capacity =
      config.capacity_bytes > 0 ? config.capacity_bytes
                                : static_cast<std::int64_t>(std::llround(config.capacity_fraction * stored));

  SimulationResult result;
  result.initial = StorageState(capacity, std::move(slots));
  StorageState state = result.initial;

  // Slot index i and trace dataset index i coincide: both are in dataset_id order.
  std::vector<std::vector<double>> series(metas.size());
  for (std::size_t d = 0; d < metas.size(); ++d) {
    series[d] = trace.weekly_counts(d, metas[d].creation_week, end);
  }
  std::vector<double> forecasts(metas.size(), 0.0);

  for (int week = config.start_week; week < end; ++week) {
    for (std::size_t d = 0; d < metas.size(); ++d) {
      if (metas[d].creation_week != week) continue;
      for (int r = 0; r < metas[d].initial_replicas; ++r) {
        state.add_replica(d);
        result.log.push_back({week, metas[d].dataset_id, Action::add_replica, metas[d].size_bytes});
      }
    }
    for (std::size_t d = 0; d < metas.size(); ++d) {
      const auto events = trace.events_of(d);
      const bool accessed = std::ranges::any_of(events, [week](const AccessEvent& e) { return e.week == week; });
      if (accessed && state.slot(d).n_replicas == 0) {
        state.add_replica(d);
        result.log.push_back({week, metas[d].dataset_id, Action::restore, metas[d].size_bytes});
        ++result.restores;
        result.restored_bytes += metas[d].size_bytes;
      }
    }

    std::vector<std::string> order;
    if (config.policy == Policy::metric_m) {
      parallel_for(metas.size(), [&](std::size_t d) {
        if (metas[d].creation_week > week) return;
        const auto history =
            std::span<const double>(series[d]).first(static_cast<std::size_t>(week - metas[d].creation_week + 1));
        forecasts[d] = short_term_forecast(history, config.alpha_step);
      });
      for (std::size_t d = 0; d < metas.size(); ++d) {
        if (metas[d].creation_week <= week) state.set_forecast(d, std::max(0.0, forecasts[d]));
      }
    } else {
      const auto features = features_for_all(trace, week + 1);
      order = config.policy == Policy::lru ? rank_lru(state, features) : rank_lfu(state, features);
    }

    if (config.purge_threshold > 0.0 && (week - config.start_week + 1) % config.purge_cadence == 0) {
      std::map<std::string, double> probabilities;
      for (const auto& fv : extract_features(trace, week + 1)) probabilities[fv.dataset_id] = model->predict_proba(fv);
      auto purged = long_term_purge(std::move(state), probabilities, config.purge_threshold, week);
      result.purged += static_cast<int>(purged.log.size());
      state = std::move(purged.state);
      append(result.log, std::move(purged.log));
    }

    if (state.used_bytes() > state.capacity_bytes()) {
      const std::int64_t target = state.used_bytes() - state.capacity_bytes();
      auto freed = config.policy == Policy::metric_m ? free_space(std::move(state), target, week)
                                                     : free_space_by_order(std::move(state), order, target, week);
      state = std::move(freed.state);
      append(result.log, std::move(freed.log));
    }
    auto filled = config.policy == Policy::metric_m
                      ? fill_space(std::move(state), config.max_replicas, week)
                      : fill_space_by_order(std::move(state), order, config.max_replicas, week);
    state = std::move(filled.state);
    append(result.log, std::move(filled.log));
    ++result.weeks;
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace datapop
