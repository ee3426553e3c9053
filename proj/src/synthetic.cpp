#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "datapop/error.hpp"
#include "datapop/kvconfig.hpp"
#include "datapop/rng.hpp"
#include "datapop/trace.hpp"

namespace datapop {
namespace {

// Per-class generation parameters. Metadata distributions differ by class so
// a classifier can learn popularity from more than recency:
//   hot      - accessed nearly every week, Poisson around a slowly drifting level
//   decaying - strong start, rate decays exponentially with age, then silence
//   cold     - accessed only in the creation week and the one after
//   bursty   - long idle gaps broken by short bursts of activity
struct ClassProfile {
  double p_real_data;        // P(dtype == 0)
  int dominant_extension;    // drawn with p = 0.6, otherwise uniform over the rest
  double median_size_gb;
  int min_replicas;          // initial replicas uniform in [min, min + 1]
};

constexpr std::array<ClassProfile, kLatentClassCount> kProfiles{{
    {0.70, 0, 20.0, 3},
    {0.35, 2, 40.0, 2},
    {0.20, 4, 30.0, 1},
    {0.85, 1, 20.0, 2},
}};

constexpr int kExtensionCount = 6;
constexpr double kGigabyte = 1e9;

std::int64_t poisson(Rng& rng, double mean) {
  if (!(mean > 1e-12)) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(rng);
}

void emit(std::vector<AccessEvent>& out, const std::string& id, int week, std::int64_t count) {
  if (count > 0) out.push_back({id, week, count});
}

void hot_events(Rng& rng, const std::string& id, int from, int horizon, std::vector<AccessEvent>& out) {
  const double mean_log = std::normal_distribution<double>(1.3, 0.6)(rng);
  std::normal_distribution<double> shock(0.0, 0.15);
  double log_level = mean_log;
  for (int w = from; w < horizon; ++w) {
    emit(out, id, w, poisson(rng, std::exp(log_level)));
    log_level = mean_log + 0.95 * (log_level - mean_log) + shock(rng);
  }
}

void decaying_events(Rng& rng, const std::string& id, int from, int horizon,
                     std::vector<AccessEvent>& out) {
  const double start = std::lognormal_distribution<double>(std::log(8.0), 0.5)(rng);
  const double tau = std::uniform_real_distribution<double>(2.0, 16.0)(rng);
  for (int w = from; w < horizon; ++w) {
    const double rate = start * std::exp(-(w - from) / tau);
    if (rate < 1e-4) break;
    emit(out, id, w, poisson(rng, rate));
  }
}

void cold_events(Rng& rng, const std::string& id, int from, int horizon, std::vector<AccessEvent>& out) {
  emit(out, id, from, 1 + poisson(rng, 1.0));
  if (from + 1 < horizon) emit(out, id, from + 1, poisson(rng, 0.7));
}

void bursty_events(Rng& rng, const std::string& id, int from, int horizon,
                   std::vector<AccessEvent>& out) {
  const double burst_rate = std::lognormal_distribution<double>(std::log(6.0), 0.4)(rng);
  std::bernoulli_distribution starts(1.0 / 18.0);
  std::uniform_int_distribution<int> length(1, 3);
  int remaining = length(rng);  // a dataset is in demand right after creation
  for (int w = from; w < horizon; ++w) {
    if (remaining == 0 && starts(rng)) remaining = length(rng);
    if (remaining > 0) {
      emit(out, id, w, poisson(rng, burst_rate));
      --remaining;
    }
  }
}

std::string make_id(int index, int width) {
  std::string digits = std::to_string(index);
  return "ds" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') +
         digits;
}

}  // namespace

std::string_view to_string(LatentClass c) {
  switch (c) {
    case LatentClass::hot: return "hot";
    case LatentClass::decaying: return "decaying";
    case LatentClass::cold: return "cold";
    case LatentClass::bursty: return "bursty";
  }
  return "unknown";
}

void SynthConfig::validate() const {
  if (n_datasets < 1) throw ValidationError("n_datasets must be >= 1");
  if (horizon_weeks < 8) throw ValidationError("horizon_weeks must be >= 8");
  double total = 0;
  for (double w : mixture) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("mixture weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("mixture weights must sum to 1");
}

SynthConfig synth_config_from(const std::map<std::string, std::string>& values) {
  SynthConfig config;
  for (const auto& [key, value] : values) {
    try {
      if (key == "n_datasets") config.n_datasets = std::stoi(value);
      else if (key == "horizon_weeks") config.horizon_weeks = std::stoi(value);
      else if (key == "mix_hot") config.mixture[0] = std::stod(value);
      else if (key == "mix_decaying") config.mixture[1] = std::stod(value);
      else if (key == "mix_cold") config.mixture[2] = std::stod(value);
      else if (key == "mix_bursty") config.mixture[3] = std::stod(value);
      else throw ValidationError("unknown synthetic config key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ValidationError("bad value '" + value + "' for synthetic config key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  return synth_config_from(load_key_values(path));
}

SyntheticTrace generate_synthetic_labeled(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  const std::uint64_t base = derive_seed(seed, "synthetic");
  const int width = std::max(5, static_cast<int>(std::to_string(config.n_datasets - 1).size()));

  std::array<double, kLatentClassCount> cumulative{};
  std::partial_sum(config.mixture.begin(), config.mixture.end(), cumulative.begin());

  std::vector<AccessEvent> events;
  std::vector<DatasetMeta> metas;
  std::vector<LatentClass> classes;
  metas.reserve(static_cast<std::size_t>(config.n_datasets));
  classes.reserve(metas.capacity());

  for (int i = 0; i < config.n_datasets; ++i) {
    Rng rng(derive_seed(base, static_cast<std::uint64_t>(i)));
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::size_t cls = 0;
    while (cls + 1 < kLatentClassCount && (u >= cumulative[cls] || config.mixture[cls] == 0.0)) ++cls;
    const auto& profile = kProfiles[cls];

    DatasetMeta meta;
    meta.dataset_id = make_id(i, width);
    meta.creation_week = std::uniform_int_distribution<int>(0, config.horizon_weeks - 1)(rng);
    meta.dtype = std::bernoulli_distribution(profile.p_real_data)(rng) ? 0 : 1;
    if (std::bernoulli_distribution(0.6)(rng)) {
      meta.extension = profile.dominant_extension;
    } else {
      const int other = std::uniform_int_distribution<int>(0, kExtensionCount - 2)(rng);
      meta.extension = other >= profile.dominant_extension ? other + 1 : other;
    }
    const double size_gb =
        std::lognormal_distribution<double>(std::log(profile.median_size_gb), 0.8)(rng);
    meta.size_bytes = std::max<std::int64_t>(1, std::llround(size_gb * kGigabyte));
    meta.initial_replicas = profile.min_replicas + std::uniform_int_distribution<int>(0, 1)(rng);

    const auto c = static_cast<LatentClass>(cls);
    switch (c) {
      case LatentClass::hot: hot_events(rng, meta.dataset_id, meta.creation_week, config.horizon_weeks, events); break;
      case LatentClass::decaying:
        decaying_events(rng, meta.dataset_id, meta.creation_week, config.horizon_weeks, events);
        break;
      case LatentClass::cold: cold_events(rng, meta.dataset_id, meta.creation_week, config.horizon_weeks, events); break;
      case LatentClass::bursty:
        bursty_events(rng, meta.dataset_id, meta.creation_week, config.horizon_weeks, events);
        break;
    }
    metas.push_back(std::move(meta));
    classes.push_back(c);
  }

  // Ids are zero-padded, so generation order is already dataset_id order and
  // classes line up with the Trace's dataset indices.
  return {Trace(std::move(events), std::move(metas), config.horizon_weeks), std::move(classes)};
}

Trace generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  return generate_synthetic_labeled(config, seed).trace;
}

}  // namespace datapop
