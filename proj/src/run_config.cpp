#include "datapop/run_config.hpp"

#include <charconv>
#include <cstdio>

#include "datapop/csv.hpp"
#include "datapop/error.hpp"
#include "datapop/rng.hpp"

namespace datapop {
namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
    throw ValidationError("bad value '" + value + "' for '" + key + "'");
  }
  return out;
}

}  // namespace

const std::vector<std::string_view>& run_config_keys() {
  static const std::vector<std::string_view> keys{
      "out", "events", "metas", "model", "seed", "n_datasets", "horizon_weeks", "mix_hot", "mix_decaying",
      "mix_cold", "mix_bursty", "train_end", "valid_end", "label_weeks", "window_end", "eval_begin", "eval_end",
      "alpha_step", "n_trees", "max_depth", "min_samples_leaf", "features_per_split", "bootstrap", "capacity_bytes",
      "capacity_fraction", "max_replicas", "purge_threshold", "purge_cadence", "policy", "sim_start"};
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto as_int = [&] { return parse_number<int>(key, value); };
  auto as_double = [&] { return parse_number<double>(key, value); };
  if (key == "out") out = value;
  else if (key == "events") events = value;
  else if (key == "metas") metas = value;
  else if (key == "model") model = value;
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "n_datasets") synth.n_datasets = as_int();
  else if (key == "horizon_weeks") synth.horizon_weeks = as_int();
  else if (key == "mix_hot") synth.mixture[0] = as_double();
  else if (key == "mix_decaying") synth.mixture[1] = as_double();
  else if (key == "mix_cold") synth.mixture[2] = as_double();
  else if (key == "mix_bursty") synth.mixture[3] = as_double();
  else if (key == "train_end") train_end = as_int();
  else if (key == "valid_end") valid_end = as_int();
  else if (key == "label_weeks") label_weeks = as_int();
  else if (key == "window_end") window_end = as_int();
  else if (key == "eval_begin") eval_begin = as_int();
  else if (key == "eval_end") eval_end = as_int();
  else if (key == "alpha_step") alpha_step = as_double();
  else if (key == "n_trees") forest.n_trees = as_int();
  else if (key == "max_depth") forest.max_depth = as_int();
  else if (key == "min_samples_leaf") forest.min_samples_leaf = as_int();
  else if (key == "features_per_split") forest.features_per_split = as_int();
  else if (key == "bootstrap") {
    if (value == "true" || value == "1") forest.bootstrap = true;
    else if (value == "false" || value == "0") forest.bootstrap = false;
    else throw ValidationError("bootstrap: expected true or false, got '" + value + "'");
  }
  else if (key == "capacity_bytes") capacity_bytes = parse_number<std::int64_t>(key, value);
  else if (key == "capacity_fraction") capacity_fraction = as_double();
  else if (key == "max_replicas") max_replicas = as_int();
  else if (key == "purge_threshold") purge_threshold = as_double();
  else if (key == "purge_cadence") purge_cadence = as_int();
  else if (key == "policy") policy = parse_policy(value);
  else if (key == "sim_start") sim_start = as_int();
  else throw ValidationError("unknown config key '" + key + "'");
}

void RunConfig::apply(const std::map<std::string, std::string>& values) {
  for (const auto& [k, v] : values) set(k, v);
}

std::vector<std::pair<std::string, std::string>> RunConfig::parameters() const {
  auto i = [](auto v) { return std::to_string(v); };
  auto d = [](double v) { return csv::format_double(v); };
  return {
      {"seed", i(seed)},
      {"n_datasets", i(synth.n_datasets)},
      {"horizon_weeks", i(synth.horizon_weeks)},
      {"mix_hot", d(synth.mixture[0])},
      {"mix_decaying", d(synth.mixture[1])},
      {"mix_cold", d(synth.mixture[2])},
      {"mix_bursty", d(synth.mixture[3])},
      {"train_end", i(train_end)},
      {"valid_end", i(valid_end)},
      {"label_weeks", i(label_weeks)},
      {"window_end", i(window_end)},
      {"eval_begin", i(eval_begin)},
      {"eval_end", i(eval_end)},
      {"alpha_step", d(alpha_step)},
      {"n_trees", i(forest.n_trees)},
      {"max_depth", i(forest.max_depth)},
      {"min_samples_leaf", i(forest.min_samples_leaf)},
      {"features_per_split", i(forest.features_per_split)},
      {"bootstrap", forest.bootstrap ? "true" : "false"},
      {"capacity_bytes", i(capacity_bytes)},
      {"capacity_fraction", d(capacity_fraction)},
      {"max_replicas", i(max_replicas)},
      {"purge_threshold", d(purge_threshold)},
      {"purge_cadence", i(purge_cadence)},
      {"policy", std::string(to_string(policy))},
      {"sim_start", i(sim_start)},
  };
}

std::string RunConfig::digest() const {
  std::string text;
  for (const auto& [k, v] : parameters()) text += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

std::string RunConfig::header_comment() const {
  return "# datapop config_digest=" + digest() + " seed=" + std::to_string(seed);
}

std::filesystem::path RunConfig::events_path() const {
  return events.empty() ? std::filesystem::path(out) / "events.csv" : std::filesystem::path(events);
}
std::filesystem::path RunConfig::metas_path() const {
  return metas.empty() ? std::filesystem::path(out) / "metas.csv" : std::filesystem::path(metas);
}
std::filesystem::path RunConfig::model_path() const {
  return model.empty() ? std::filesystem::path(out) / "model.txt" : std::filesystem::path(model);
}

std::uint64_t generator_seed(std::uint64_t seed) { return derive_seed(seed, "generate"); }
std::uint64_t forest_seed(std::uint64_t seed) { return derive_seed(seed, "forest"); }

}  // namespace datapop
