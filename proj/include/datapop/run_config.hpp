#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "datapop/evaluate.hpp"
#include "datapop/forest.hpp"
#include "datapop/simulate.hpp"
#include "datapop/trace.hpp"

namespace datapop {

// Every tunable of a run. Values resolve as defaults, then config file, then
// command-line flags. Keys are the field names below; see README for the table.
struct RunConfig {
  // Paths. Empty input paths resolve inside `out`. Paths are not part of the digest.
  std::string out = "out";
  std::string events;
  std::string metas;
  std::string model;

  std::uint64_t seed = 42;
  SynthConfig synth;

  int train_end = kDefaultTrainEnd;
  int valid_end = kDefaultValidEnd;
  int label_weeks = kDefaultLabelWeeks;
  int window_end = 0;  // features / predict; 0 = train_end / horizon
  int eval_begin = 0;  // 0 = valid_end
  int eval_end = 0;    // 0 = horizon
  double alpha_step = kDefaultAlphaStep;

  ForestParams forest;

  std::int64_t capacity_bytes = 0;
  double capacity_fraction = 0.9;
  int max_replicas = kDefaultMaxReplicas;
  double purge_threshold = 0.0;
  int purge_cadence = 26;
  Policy policy = Policy::metric_m;
  int sim_start = 0;  // 0 = valid_end

  // Throws ValidationError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  void apply(const std::map<std::string, std::string>& values);

  // Resolved non-path values as (key, canonical text), in a fixed order.
  std::vector<std::pair<std::string, std::string>> parameters() const;
  // 16 hex digits of FNV-1a over "key=value\n" of parameters().
  std::string digest() const;
  // "# datapop config_digest=<hex> seed=<n>", the first line of every output file.
  std::string header_comment() const;

  std::filesystem::path events_path() const;
  std::filesystem::path metas_path() const;
  std::filesystem::path model_path() const;
  std::filesystem::path out_dir() const { return out; }
};

// Every accepted key, path keys included.
const std::vector<std::string_view>& run_config_keys();

// Substream seeds derived from RunConfig::seed.
std::uint64_t generator_seed(std::uint64_t seed);
std::uint64_t forest_seed(std::uint64_t seed);

}  // namespace datapop
