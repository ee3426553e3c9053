#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace datapop {

// Accesses of one dataset during one week. Weeks are the simulation time step.
struct AccessEvent {
  std::string dataset_id;
  int week = 0;
  std::int64_t count = 1;

  friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
};

// Static metadata. The tape archive copy every dataset has is implicit and
// never counted in initial_replicas.
struct DatasetMeta {
  std::string dataset_id;
  int creation_week = 0;
  int dtype = 0;       // categorical code, e.g. 0 = real data, 1 = simulation
  int extension = 0;   // categorical code
  std::int64_t size_bytes = 1;
  int initial_replicas = 1;

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

inline constexpr int kDefaultHorizonWeeks = 130;

// Validated, normalized access history. Immutable after construction.
//
// Normalization: metas are sorted by dataset_id, events are sorted by
// (dataset_id, week) and duplicate (dataset_id, week) rows are merged by
// summing their counts. Dataset indices used throughout the library refer to
// positions in metas().
class Trace {
 public:
  Trace() = default;

  // Throws ValidationError when any invariant does not hold: unique ids,
  // size_bytes > 0, initial_replicas >= 1, count >= 1, events reference a
  // known dataset, creation_week <= week < horizon_weeks.
  Trace(std::vector<AccessEvent> events, std::vector<DatasetMeta> metas, int horizon_weeks);

  const std::vector<AccessEvent>& events() const noexcept { return events_; }
  const std::vector<DatasetMeta>& metas() const noexcept { return metas_; }
  int horizon_weeks() const noexcept { return horizon_; }
  std::size_t dataset_count() const noexcept { return metas_.size(); }

  std::optional<std::size_t> index_of(std::string_view dataset_id) const;

  // Events of one dataset, ascending by week.
  std::span<const AccessEvent> events_of(std::size_t dataset) const;

  // Weekly counts for weeks [begin, end), zeros where nothing happened.
  std::vector<double> weekly_counts(std::size_t dataset, int begin, int end) const;

  friend bool operator==(const Trace& a, const Trace& b) {
    return a.horizon_ == b.horizon_ && a.metas_ == b.metas_ && a.events_ == b.events_;
  }

 private:
  std::vector<AccessEvent> events_;
  std::vector<DatasetMeta> metas_;
  std::vector<std::size_t> offsets_;  // events of dataset i: [offsets_[i], offsets_[i+1])
  int horizon_ = 0;
};

inline constexpr std::string_view kEventsHeader = "dataset_id,week,count";
inline constexpr std::string_view kMetasHeader =
    "dataset_id,creation_week,dtype,extension,size_bytes,initial_replicas";

// Reads the events and metas CSV formats. The horizon is taken from a
// "horizon_weeks=N" token in a leading comment of the events file when
// present, otherwise it is max(week) + 1.
Trace read_trace(std::istream& events, std::istream& metas,
                 const std::string& events_source = "events",
                 const std::string& metas_source = "metas");
Trace import_trace(const std::filesystem::path& events_path,
                   const std::filesystem::path& metas_path);

// Writers emit `comment` (if non-empty) as the first line, then the header.
// write_events appends horizon_weeks=N to the comment so that a re-import
// recovers the exact horizon.
void write_events(const Trace& trace, std::ostream& out, const std::string& comment = {});
void write_metas(const Trace& trace, std::ostream& out, const std::string& comment = {});

// ---------------------------------------------------------------------------
// Synthetic traces

enum class LatentClass { hot = 0, decaying = 1, cold = 2, bursty = 3 };
inline constexpr std::size_t kLatentClassCount = 4;

std::string_view to_string(LatentClass c);

// Generator knobs. Config-file keys: n_datasets, horizon_weeks, mix_hot,
// mix_decaying, mix_cold, mix_bursty.
struct SynthConfig {
  int n_datasets = 10000;
  int horizon_weeks = kDefaultHorizonWeeks;
  // Mixture weights indexed by LatentClass; must sum to 1.
  std::array<double, kLatentClassCount> mixture{0.25, 0.30, 0.25, 0.20};

  void validate() const;
};

// Unknown keys are rejected.
SynthConfig synth_config_from(const std::map<std::string, std::string>& values);
SynthConfig load_synth_config(const std::filesystem::path& path);

struct SyntheticTrace {
  Trace trace;
  std::vector<LatentClass> classes;  // by dataset index
};

SyntheticTrace generate_synthetic_labeled(const SynthConfig& config, std::uint64_t seed);
Trace generate_synthetic(const SynthConfig& config, std::uint64_t seed);

}  // namespace datapop
