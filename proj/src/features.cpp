#include "datapop/features.hpp"

#include "datapop/error.hpp"

namespace datapop {

std::array<double, kFeatureCount> FeatureVector::row() const {
  return {static_cast<double>(recency),          static_cast<double>(reuse_distance),
          static_cast<double>(first_access_age), static_cast<double>(creation_age),
          frequency,                             static_cast<double>(dtype),
          static_cast<double>(extension),        static_cast<double>(size_bytes)};
}

std::vector<FeatureVector> extract_features(const Trace& trace, int window_end) {
  if (window_end <= 0 || window_end > trace.horizon_weeks()) {
    throw ValidationError("window_end " + std::to_string(window_end) + " outside (0, " +
                          std::to_string(trace.horizon_weeks()) + "]");
  }
  std::vector<FeatureVector> out;
  out.reserve(trace.dataset_count());
  for (std::size_t d = 0; d < trace.dataset_count(); ++d) {
    const auto& meta = trace.metas()[d];
    if (meta.creation_week >= window_end) continue;

    FeatureVector fv;
    fv.dataset_id = meta.dataset_id;
    fv.recency = fv.reuse_distance = fv.first_access_age = window_end;
    fv.creation_age = window_end - meta.creation_week;
    fv.dtype = meta.dtype;
    fv.extension = meta.extension;
    fv.size_bytes = meta.size_bytes;

    int first = -1, last = -1, second_last = -1;
    std::int64_t total = 0;
    for (const auto& e : trace.events_of(d)) {
      if (e.week >= window_end) break;
      if (first < 0) first = e.week;
      second_last = last;
      last = e.week;
      total += e.count;
    }
    if (last >= 0) {
      fv.recency = window_end - last;
      fv.first_access_age = window_end - first;
    }
    if (second_last >= 0) fv.reuse_distance = last - second_last;
    fv.frequency = static_cast<double>(total) / window_end;
    out.push_back(std::move(fv));
  }
  return out;
}

std::vector<LabeledExample> label_examples(std::span<const FeatureVector> features, const Trace& trace,
                                           int label_start, int label_weeks) {
  if (label_weeks < 1) throw ValidationError("label_weeks must be >= 1");
  if (label_start < 0 || label_start + label_weeks > trace.horizon_weeks()) {
    throw ValidationError("label window [" + std::to_string(label_start) + ", " +
                          std::to_string(label_start + label_weeks) + ") overruns horizon " +
                          std::to_string(trace.horizon_weeks()));
  }
  const int label_end = label_start + label_weeks;
  std::vector<LabeledExample> out;
  out.reserve(features.size());
  for (const auto& fv : features) {
    const auto d = trace.index_of(fv.dataset_id);
    if (!d) throw ValidationError("features for unknown dataset '" + fv.dataset_id + "'");
    int label = 0;
    for (const auto& e : trace.events_of(*d)) {
      if (e.week >= label_end) break;
      if (e.week >= label_start) {
        label = 1;
        break;
      }
    }
    out.push_back({fv, label});
  }
  return out;
}

}  // namespace datapop
