#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "datapop/features.hpp"
#include "datapop/smoothing.hpp"
#include "datapop/strategy.hpp"
#include "datapop/trace.hpp"

namespace datapop {

inline constexpr int kDefaultTrainEnd = 78;
inline constexpr int kDefaultValidEnd = 104;

struct WindowSplit {
  std::vector<LabeledExample> train;       // features at train_end, labels over [train_end, +label_weeks)
  std::vector<LabeledExample> validation;  // features at valid_end, labels over [valid_end, +label_weeks)
};

WindowSplit rolling_windows(const Trace& trace, int train_end = kDefaultTrainEnd,
                            int valid_end = kDefaultValidEnd, int label_weeks = kDefaultLabelWeeks);

// One step of a removal sweep: fraction of all bytes removed so far, and the
// share of removed datasets that are accessed later.
struct CurvePoint {
  double saved_space_fraction = 0.0;
  double mistake_rate = 0.0;
  std::string policy;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

// Sweep that removes datasets in `order`, one point per removal. `order` must
// be a permutation of the keys of truth and sizes.
std::vector<CurvePoint> removal_curve(std::span<const std::string> order, const std::map<std::string, int>& truth,
                                      const std::map<std::string, std::int64_t>& sizes, std::string_view policy);

// Removal sweep in ascending probability order, ties by dataset_id.
std::vector<CurvePoint> saved_space_curve(const std::map<std::string, double>& probabilities,
                                          const std::map<std::string, int>& truth,
                                          const std::map<std::string, std::int64_t>& sizes,
                                          std::string_view policy = "forest");

// Mistake rate of the first point whose saved fraction reaches `fraction`;
// the last point's rate if the curve never gets there.
double mistake_rate_at(std::span<const CurvePoint> curve, double fraction);

enum class ForecastModel { brown, static_last, average };

std::string_view to_string(ForecastModel model);

// Pearson correlation; throws on fewer than 2 pairs or a zero-variance side.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationResult {
  double correlation = 0.0;
  std::size_t pairs = 0;
};

// Walk-forward one-step-ahead evaluation over weeks [eval_begin, eval_end):
// for every dataset with at least two weeks of history (creation_week <=
// week - 2), the model is refit on weeks [creation_week, week) and its
// forecast is paired with the true count of `week`. Pearson is pooled over
// all pairs.
CorrelationResult forecast_correlation(const Trace& trace, ForecastModel model, int eval_begin, int eval_end,
                                       double alpha_step = kDefaultAlphaStep);

struct CdfPoint {
  int n_replicas = 0;
  double cumulative_space_fraction = 0.0;

  friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

// For k = 1..max replicas: share of used bytes held by datasets with at most
// k replicas.
std::vector<CdfPoint> occupancy_cdf(const StorageState& state);

// Storage state built from the trace metadata: every dataset created before
// `week` at its initial replica count; capacity equals the used bytes.
StorageState initial_storage(const Trace& trace, int week);

struct EvaluationParams {
  int train_end = kDefaultTrainEnd;
  int valid_end = kDefaultValidEnd;
  int label_weeks = kDefaultLabelWeeks;
  int eval_begin = 0;  // 0 = valid_end
  int eval_end = 0;    // 0 = trace horizon
  double alpha_step = kDefaultAlphaStep;
};

struct EvaluationReport {
  std::vector<CurvePoint> curve_points;  // policies "forest", "lru", "lfu", each sorted by saved fraction
  std::map<std::string, CorrelationResult> correlations;  // keyed by ForecastModel name
  std::vector<CdfPoint> cdf_points;
  EvaluationParams params;
};

class ForestModel;

// Scores the validation window of `trace` with the model and the LRU/LFU
// baselines, the three forecast models walk-forward, and the occupancy CDF
// of the storage at valid_end.
EvaluationReport evaluate(const Trace& trace, const ForestModel& model, const EvaluationParams& params);

// Curve points of one policy.
std::vector<CurvePoint> curve_of(std::span<const CurvePoint> points, std::string_view policy);

}  // namespace datapop
