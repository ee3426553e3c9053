#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "datapop/trace.hpp"

namespace datapop {

inline constexpr std::size_t kFeatureCount = 8;

// Column order of FeatureVector::row() and of the features CSV.
enum class Feature : std::size_t {
  recency = 0,
  reuse_distance,
  first_access_age,
  creation_age,
  frequency,
  dtype,
  extension,
  size_bytes,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "recency", "reuse_distance", "first_access_age", "creation_age",
    "frequency", "dtype", "extension", "size_bytes"};

inline constexpr int kDefaultLabelWeeks = 26;

// Per-dataset features over the window [0, window_end). Temporal features are
// in weeks measured back from window_end; a temporal feature that is
// undefined (no access, or fewer than two accesses for reuse_distance) takes
// the window length as its value.
struct FeatureVector {
  std::string dataset_id;
  int recency = 0;           // window_end - last access week
  int reuse_distance = 0;    // last access week - second-last access week
  int first_access_age = 0;  // window_end - first access week
  int creation_age = 0;      // window_end - creation_week
  double frequency = 0.0;    // accesses per week over the window
  int dtype = 0;
  int extension = 0;
  std::int64_t size_bytes = 0;

  std::array<double, kFeatureCount> row() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct LabeledExample {
  FeatureVector features;
  int label = 0;  // 1 = popular

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

// One vector per dataset created before window_end, in dataset_id order.
// Only events with week < window_end are read.
std::vector<FeatureVector> extract_features(const Trace& trace, int window_end);

// label = 1 iff the dataset has an access in [label_start, label_start + label_weeks).
std::vector<LabeledExample> label_examples(std::span<const FeatureVector> features, const Trace& trace,
                                           int label_start, int label_weeks = kDefaultLabelWeeks);

}  // namespace datapop
