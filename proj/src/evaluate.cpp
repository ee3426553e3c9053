#include "datapop/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "datapop/error.hpp"
#include "datapop/forest.hpp"
#include "datapop/parallel.hpp"

namespace datapop {

WindowSplit rolling_windows(const Trace& trace, int train_end, int valid_end, int label_weeks) {
  if (label_weeks < 1) throw ValidationError("label_weeks must be >= 1");
  if (train_end < 1) throw ValidationError("train_end must be >= 1");
  if (train_end + label_weeks > valid_end) {
    throw ValidationError("training label window [" + std::to_string(train_end) + ", " +
                          std::to_string(train_end + label_weeks) + ") runs past valid_end " +
                          std::to_string(valid_end));
  }
  if (valid_end + label_weeks > trace.horizon_weeks()) {
    throw ValidationError("validation label window [" + std::to_string(valid_end) + ", " +
                          std::to_string(valid_end + label_weeks) + ") overruns horizon " +
                          std::to_string(trace.horizon_weeks()));
  }
  WindowSplit split;
  split.train = label_examples(extract_features(trace, train_end), trace, train_end, label_weeks);
  split.validation = label_examples(extract_features(trace, valid_end), trace, valid_end, label_weeks);
  return split;
}

std::vector<CurvePoint> removal_curve(std::span<const std::string> order, const std::map<std::string, int>& truth,
                                      const std::map<std::string, std::int64_t>& sizes, std::string_view policy) {
  if (truth.size() != sizes.size() || order.size() != truth.size()) {
    throw ValidationError("removal curve inputs do not share one key set");
  }
  double total = 0.0;
  for (const auto& [id, size] : sizes) {
    if (!truth.contains(id)) throw ValidationError("dataset '" + id + "' has a size but no label");
    if (size <= 0) throw ValidationError("dataset '" + id + "' has a non-positive size");
    total += static_cast<double>(size);
  }
  std::vector<CurvePoint> curve;
  curve.reserve(order.size());
  double removed_bytes = 0.0;
  std::size_t mistakes = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto t = truth.find(order[k]);
    if (t == truth.end()) throw ValidationError("ordering names unknown dataset '" + order[k] + "'");
    removed_bytes += static_cast<double>(sizes.at(order[k]));
    mistakes += t->second == 1 ? 1 : 0;
    curve.push_back({std::min(1.0, removed_bytes / total),
                     static_cast<double>(mistakes) / static_cast<double>(k + 1), std::string(policy)});
  }
  return curve;
}

std::vector<CurvePoint> saved_space_curve(const std::map<std::string, double>& probabilities,
                                          const std::map<std::string, int>& truth,
                                          const std::map<std::string, std::int64_t>& sizes,
                                          std::string_view policy) {
  if (probabilities.size() != truth.size()) throw ValidationError("probabilities and labels differ in key set");
  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(probabilities.size());
  for (const auto& [id, p] : probabilities) ranked.emplace_back(p, id);
  std::ranges::sort(ranked);
  std::vector<std::string> order;
  order.reserve(ranked.size());
  for (auto& [p, id] : ranked) order.push_back(std::move(id));
  return removal_curve(order, truth, sizes, policy);
}

double mistake_rate_at(std::span<const CurvePoint> curve, double fraction) {
  if (curve.empty()) throw ValidationError("empty curve");
  for (const auto& p : curve) {
    if (p.saved_space_fraction >= fraction) return p.mistake_rate;
  }
  return curve.back().mistake_rate;
}

std::vector<CurvePoint> curve_of(std::span<const CurvePoint> points, std::string_view policy) {
  std::vector<CurvePoint> out;
  std::ranges::copy_if(points, std::back_inserter(out), [&](const CurvePoint& p) { return p.policy == policy; });
  return out;
}

std::string_view to_string(ForecastModel model) {
  switch (model) {
    case ForecastModel::brown: return "brown";
    case ForecastModel::static_last: return "static";
    case ForecastModel::average: return "average";
  }
  return "unknown";
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: fewer than 2 pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (syy == 0.0) throw ValidationError("pearson: truth has zero variance");
  if (sxx == 0.0) throw ValidationError("pearson: predictions have zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationResult forecast_correlation(const Trace& trace, ForecastModel model, int eval_begin, int eval_end,
                                       double alpha_step) {
  if (eval_begin < 2 || eval_begin >= eval_end || eval_end > trace.horizon_weeks()) {
    throw ValidationError("evaluation weeks [" + std::to_string(eval_begin) + ", " + std::to_string(eval_end) +
                          ") invalid for horizon " + std::to_string(trace.horizon_weeks()));
  }
  const auto& metas = trace.metas();
  std::vector<std::vector<double>> predicted(metas.size()), actual(metas.size());
  parallel_for(metas.size(), [&](std::size_t d) {
    const int created = metas[d].creation_week;
    const int first = std::max(eval_begin, created + 2);
    if (first >= eval_end) return;
    const auto series = trace.weekly_counts(d, created, eval_end);
    for (int week = first; week < eval_end; ++week) {
      const auto history = std::span<const double>(series).first(static_cast<std::size_t>(week - created));
      double forecast = 0.0;
      switch (model) {
        case ForecastModel::brown: forecast = fit_alpha(history, alpha_step).next_forecast; break;
        case ForecastModel::static_last: forecast = static_forecast(history); break;
        case ForecastModel::average: forecast = average_forecast(history); break;
      }
      predicted[d].push_back(forecast);
      actual[d].push_back(series[static_cast<std::size_t>(week - created)]);
    }
  });
  std::vector<double> x, y;
  for (std::size_t d = 0; d < metas.size(); ++d) {
    x.insert(x.end(), predicted[d].begin(), predicted[d].end());
    y.insert(y.end(), actual[d].begin(), actual[d].end());
  }
  return {pearson(x, y), x.size()};
}

std::vector<CdfPoint> occupancy_cdf(const StorageState& state) {
  if (state.size() == 0) throw ValidationError("occupancy of an empty storage state");
  if (state.used_bytes() <= 0) throw ValidationError("occupancy of a storage state holding no bytes");
  int max_replicas = 0;
  for (const auto& s : state.slots()) max_replicas = std::max(max_replicas, s.n_replicas);
  std::vector<std::int64_t> bytes(static_cast<std::size_t>(max_replicas) + 1, 0);
  for (const auto& s : state.slots()) bytes[static_cast<std::size_t>(s.n_replicas)] += s.n_replicas * s.size_bytes;
  std::vector<CdfPoint> cdf;
  std::int64_t cumulative = 0;
  for (int k = 1; k <= max_replicas; ++k) {
    cumulative += bytes[static_cast<std::size_t>(k)];
    cdf.push_back({k, static_cast<double>(cumulative) / static_cast<double>(state.used_bytes())});
  }
  return cdf;
}

StorageState initial_storage(const Trace& trace, int week) {
  std::vector<DatasetSlot> slots;
  std::int64_t used = 0;
  for (const auto& meta : trace.metas()) {
    if (meta.creation_week >= week) continue;
    slots.push_back({meta.dataset_id, meta.size_bytes, meta.initial_replicas, 0.0, 0.0});
    used += meta.size_bytes * meta.initial_replicas;
  }
  return StorageState(used, std::move(slots));
}

EvaluationReport evaluate(const Trace& trace, const ForestModel& model, const EvaluationParams& params) {
  EvaluationReport report;
  report.params = params;
  auto& p = report.params;
  if (p.eval_begin == 0) p.eval_begin = p.valid_end;
  if (p.eval_end == 0) p.eval_end = trace.horizon_weeks();

  const auto split = rolling_windows(trace, p.train_end, p.valid_end, p.label_weeks);
  std::map<std::string, double> probabilities;
  std::map<std::string, int> truth;
  std::map<std::string, std::int64_t> sizes;
  std::vector<FeatureVector> features;
  for (const auto& ex : split.validation) {
    probabilities[ex.features.dataset_id] = model.predict_proba(ex.features);
    truth[ex.features.dataset_id] = ex.label;
    sizes[ex.features.dataset_id] = ex.features.size_bytes;
    features.push_back(ex.features);
  }
  report.curve_points = saved_space_curve(probabilities, truth, sizes, "forest");

  const StorageState storage = initial_storage(trace, p.valid_end);
  for (const auto& [name, order] : {std::pair{"lru", rank_lru(storage, features)},
                                    std::pair{"lfu", rank_lfu(storage, features)}}) {
    auto curve = removal_curve(order, truth, sizes, name);
    report.curve_points.insert(report.curve_points.end(), curve.begin(), curve.end());
  }

  for (auto m : {ForecastModel::brown, ForecastModel::static_last, ForecastModel::average}) {
    report.correlations[std::string(to_string(m))] =
        forecast_correlation(trace, m, p.eval_begin, p.eval_end, p.alpha_step);
  }
  report.cdf_points = occupancy_cdf(storage);
  return report;
}

}  // namespace datapop
