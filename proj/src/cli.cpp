#include "datapop/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "datapop/csv.hpp"
#include "datapop/error.hpp"
#include "datapop/evaluate.hpp"
#include "datapop/features.hpp"
#include "datapop/forest.hpp"
#include "datapop/kvconfig.hpp"
#include "datapop/run_config.hpp"
#include "datapop/simulate.hpp"
#include "datapop/smoothing.hpp"
#include "datapop/trace.hpp"

namespace datapop::cli {
namespace {

namespace fs = std::filesystem;

// Fractions at which report.txt tabulates the removal curves.
constexpr std::array<double, 9> kReportFractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

struct Command {
  CLI::App* app = nullptr;
  std::vector<std::string> keys;
  std::map<std::string, std::string> flags;
  std::string config_file;
};

std::string flag_name(std::string_view key) {
  std::string name(key);
  std::ranges::replace(name, '_', '-');
  return "--" + name;
}

std::ofstream open_output(const fs::path& path, const std::string& header) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << header << '\n';
  return out;
}

std::ofstream open_output(const fs::path& path, const RunConfig& cfg) { return open_output(path, cfg.header_comment()); }

Trace load_trace(const RunConfig& cfg) { return import_trace(cfg.events_path(), cfg.metas_path()); }

ForestModel load_model_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("model not found: " + path.string() + " (run `datapop train` first)");
  return load_model(in, path.string());
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void cmd_generate(const RunConfig& cfg, std::ostream& out) {
  const auto synthetic = generate_synthetic_labeled(cfg.synth, generator_seed(cfg.seed));
  const auto dir = cfg.out_dir();
  fs::create_directories(dir);
  {
    // write_events extends the header comment with horizon_weeks=N.
    std::ofstream f(dir / "events.csv", std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / "events.csv").string());
    write_events(synthetic.trace, f, cfg.header_comment());
  }
  {
    std::ofstream f(dir / "metas.csv", std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / "metas.csv").string());
    write_metas(synthetic.trace, f, cfg.header_comment());
  }
  {
    auto f = open_output(dir / "classes.csv", cfg);
    f << "dataset_id,class\n";
    for (std::size_t i = 0; i < synthetic.classes.size(); ++i) {
      f << synthetic.trace.metas()[i].dataset_id << ',' << to_string(synthetic.classes[i]) << '\n';
    }
  }
  out << "generated " << synthetic.trace.dataset_count() << " datasets, " << synthetic.trace.events().size()
      << " events, " << synthetic.trace.horizon_weeks() << " weeks into " << dir.string() << '\n';
}

void cmd_features(const RunConfig& cfg, bool with_labels, std::ostream& out) {
  const auto trace = load_trace(cfg);
  const int window_end = cfg.window_end > 0 ? cfg.window_end : cfg.train_end;
  const auto features = extract_features(trace, window_end);
  std::vector<LabeledExample> labeled;
  if (with_labels) labeled = label_examples(features, trace, window_end, cfg.label_weeks);

  auto f = open_output(cfg.out_dir() / "features.csv", cfg);
  f << "dataset_id";
  for (auto name : kFeatureNames) f << ',' << name;
  if (with_labels) f << ",label";
  f << '\n';
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& fv = features[i];
    f << fv.dataset_id << ',' << fv.recency << ',' << fv.reuse_distance << ',' << fv.first_access_age << ','
      << fv.creation_age << ',' << csv::format_double(fv.frequency) << ',' << fv.dtype << ',' << fv.extension
      << ',' << fv.size_bytes;
    if (with_labels) f << ',' << labeled[i].label;
    f << '\n';
  }
  out << "wrote features of " << features.size() << " datasets at window_end " << window_end << '\n';
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  const auto trace = load_trace(cfg);
  const auto examples =
      label_examples(extract_features(trace, cfg.train_end), trace, cfg.train_end, cfg.label_weeks);
  const auto model = train(examples, cfg.forest, forest_seed(cfg.seed));
  {
    auto f = open_output(cfg.model_path(), cfg);
    save_model(model, f);
  }
  {
    auto f = open_output(cfg.out_dir() / "importances.csv", cfg);
    f << "feature,importance\n";
    const auto imp = feature_importances(model);
    for (std::size_t i = 0; i < imp.size(); ++i) f << kFeatureNames[i] << ',' << csv::format_double(imp[i]) << '\n';
  }
  out << "trained " << model.trees().size() << " trees on " << examples.size() << " examples -> "
      << cfg.model_path().string() << '\n';
}

void cmd_predict(const RunConfig& cfg, std::ostream& out) {
  const auto model = load_model_file(cfg.model_path());
  const auto trace = load_trace(cfg);
  const int window_end = cfg.window_end > 0 ? cfg.window_end : trace.horizon_weeks();
  const auto features = extract_features(trace, window_end);
  auto f = open_output(cfg.out_dir() / "predictions.csv", cfg);
  f << "dataset_id,probability\n";
  for (const auto& fv : features) f << fv.dataset_id << ',' << csv::format_double(model.predict_proba(fv)) << '\n';
  out << "wrote " << features.size() << " predictions at window_end " << window_end << '\n';
}

void cmd_forecast(const RunConfig& cfg, std::ostream& out) {
  const auto trace = load_trace(cfg);
  auto f = open_output(cfg.out_dir() / "forecast.csv", cfg);
  f << "dataset_id,alpha,next_week_forecast,four_week_forecast\n";
  for (std::size_t d = 0; d < trace.dataset_count(); ++d) {
    const auto series = trace.weekly_counts(d, trace.metas()[d].creation_week, trace.horizon_weeks());
    // Single-week histories fall back to the mean, which is the alpha = 0 fit.
    const auto fit = series.size() >= 2 ? fit_alpha(series, cfg.alpha_step) : brown_forecast(series, 0.0);
    f << trace.metas()[d].dataset_id << ',' << csv::format_double(fit.alpha) << ','
      << csv::format_double(fit.next_forecast) << ',' << csv::format_double(forecast_horizon(fit, 4)) << '\n';
  }
  out << "wrote forecasts for " << trace.dataset_count() << " datasets\n";
}

void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto trace = load_trace(cfg);
  std::optional<ForestModel> model;
  if (cfg.purge_threshold > 0.0) model = load_model_file(cfg.model_path());

  SimulationConfig sim;
  sim.start_week = cfg.sim_start > 0 ? cfg.sim_start : cfg.valid_end;
  sim.capacity_bytes = cfg.capacity_bytes;
  sim.capacity_fraction = cfg.capacity_fraction;
  sim.max_replicas = cfg.max_replicas;
  sim.purge_threshold = cfg.purge_threshold;
  sim.purge_cadence = cfg.purge_cadence;
  sim.policy = cfg.policy;
  sim.alpha_step = cfg.alpha_step;
  const auto result = simulate(trace, sim, model ? &*model : nullptr);

  {
    auto f = open_output(cfg.out_dir() / "actions.csv", cfg);
    f << "week,dataset_id,action,bytes_delta\n";
    for (const auto& r : result.log) {
      f << r.week << ',' << r.dataset_id << ',' << to_string(r.action) << ',' << r.bytes_delta << '\n';
    }
  }
  {
    auto f = open_output(cfg.out_dir() / "final_state.csv", cfg);
    f << "dataset_id,size_bytes,n_replicas,forecast,m\n";
    for (const auto& s : result.final_state.slots()) {
      f << s.dataset_id << ',' << s.size_bytes << ',' << s.n_replicas << ',' << csv::format_double(s.forecast)
        << ',' << csv::format_double(s.m) << '\n';
    }
  }
  {
    auto f = open_output(cfg.out_dir() / "simulation.txt", cfg);
    f << "policy=" << to_string(cfg.policy) << '\n'
      << "weeks=" << result.weeks << '\n'
      << "capacity_bytes=" << result.final_state.capacity_bytes() << '\n'
      << "initial_used_bytes=" << result.initial.used_bytes() << '\n'
      << "final_used_bytes=" << result.final_state.used_bytes() << '\n'
      << "actions=" << result.log.size() << '\n'
      << "restores=" << result.restores << '\n'
      << "restored_bytes=" << result.restored_bytes << '\n'
      << "purged=" << result.purged << '\n';
  }
  out << "simulated " << result.weeks << " weeks with policy " << to_string(cfg.policy) << ": "
      << result.log.size() << " actions, " << result.restores << " restores\n";
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const auto model = load_model_file(cfg.model_path());
  const auto trace = load_trace(cfg);
  EvaluationParams params;
  params.train_end = cfg.train_end;
  params.valid_end = cfg.valid_end;
  params.label_weeks = cfg.label_weeks;
  params.eval_begin = cfg.eval_begin;
  params.eval_end = cfg.eval_end;
  params.alpha_step = cfg.alpha_step;
  const auto report = evaluate(trace, model, params);

  {
    auto f = open_output(cfg.out_dir() / "curve.csv", cfg);
    f << "policy,saved_space_fraction,mistake_rate\n";
    for (const auto& p : report.curve_points) {
      f << p.policy << ',' << csv::format_double(p.saved_space_fraction) << ','
        << csv::format_double(p.mistake_rate) << '\n';
    }
  }
  {
    auto f = open_output(cfg.out_dir() / "correlation.csv", cfg);
    f << "model,correlation,pairs\n";
    for (auto m : {ForecastModel::brown, ForecastModel::static_last, ForecastModel::average}) {
      const auto& c = report.correlations.at(std::string(to_string(m)));
      f << to_string(m) << ',' << csv::format_double(c.correlation) << ',' << c.pairs << '\n';
    }
  }
  {
    auto f = open_output(cfg.out_dir() / "cdf.csv", cfg);
    f << "n_replicas,cumulative_space_fraction\n";
    for (const auto& p : report.cdf_points) {
      f << p.n_replicas << ',' << csv::format_double(p.cumulative_space_fraction) << '\n';
    }
  }
  out << "evaluated windows " << cfg.train_end << "/" << cfg.valid_end << "/" << cfg.label_weeks << " -> "
      << cfg.out_dir().string() << '\n';
}


std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string() + " (run `datapop evaluate` first)");
  return in;
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
  const auto dir = cfg.out_dir();

  // The report carries the digest of the evaluate run that produced its inputs.
  std::string header = cfg.header_comment();
  std::map<std::string, std::vector<CurvePoint>> curves;
  {
    auto in = open_input(dir / "curve.csv");
    csv::Reader reader(in, (dir / "curve.csv").string());
    reader.expect_header("policy,saved_space_fraction,mistake_rate");
    if (!reader.comments().empty() && reader.comments().front().starts_with("# datapop config_digest=")) {
      header = reader.comments().front();
    }
    while (auto row = reader.next()) {
      if (row->size() != 3) reader.fail("expected 3 fields");
      const std::string policy((*row)[0]);
      curves[policy].push_back(
          {reader.to_double((*row)[1], "saved_space_fraction"), reader.to_double((*row)[2], "mistake_rate"), policy});
    }
  }
  std::vector<std::array<std::string, 3>> correlations;
  {
    auto in = open_input(dir / "correlation.csv");
    csv::Reader reader(in, (dir / "correlation.csv").string());
    reader.expect_header("model,correlation,pairs");
    while (auto row = reader.next()) {
      if (row->size() != 3) reader.fail("expected 3 fields");
      correlations.push_back({std::string((*row)[0]), fixed(reader.to_double((*row)[1], "correlation")),
                              std::to_string(reader.to_int((*row)[2], "pairs"))});
    }
  }
  std::vector<CdfPoint> cdf;
  {
    auto in = open_input(dir / "cdf.csv");
    csv::Reader reader(in, (dir / "cdf.csv").string());
    reader.expect_header("n_replicas,cumulative_space_fraction");
    while (auto row = reader.next()) {
      if (row->size() != 2) reader.fail("expected 2 fields");
      cdf.push_back({static_cast<int>(reader.to_int((*row)[0], "n_replicas")),
                     reader.to_double((*row)[1], "cumulative_space_fraction")});
    }
  }

  auto f = open_output(dir / "report.txt", header);
  f << "datapop report\n\n";
  f << "[saved space vs mistakes]\n";
  f << "saved_fraction";
  for (const auto& [policy, points] : curves) f << ' ' << policy;
  f << '\n';
  for (double fraction : kReportFractions) {
    f << fixed(fraction, 2);
    for (const auto& [policy, points] : curves) f << ' ' << fixed(mistake_rate_at(points, fraction));
    f << '\n';
  }
  f << "\n[forecast correlation]\n";
  f << "model correlation pairs\n";
  for (const auto& [model, corr, pairs] : correlations) f << model << ' ' << corr << ' ' << pairs << '\n';
  f << "\n[occupancy cdf]\n";
  f << "n_replicas cumulative_space_fraction\n";
  for (const auto& p : cdf) f << p.n_replicas << ' ' << fixed(p.cumulative_space_fraction) << '\n';
  out << "wrote " << (dir / "report.txt").string() << '\n';
}

const std::vector<std::string> kCommonKeys{"out", "seed"};
const std::vector<std::string> kTraceKeys{"events", "metas"};

Command add_command(CLI::App& app, const std::string& name, const std::string& description,
                    std::vector<std::string> keys) {
  Command cmd;
  cmd.app = app.add_subcommand(name, description);
  keys.insert(keys.begin(), kCommonKeys.begin(), kCommonKeys.end());
  cmd.keys = std::move(keys);
  return cmd;
}

void bind(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_file, "Key-value config file");
  for (const auto& key : cmd.keys) {
    cmd.app->add_option(flag_name(key), cmd.flags[key], key);
  }
}

RunConfig resolve(const Command& cmd) {
  RunConfig cfg;
  if (!cmd.config_file.empty()) cfg.apply(load_key_values(cmd.config_file));
  for (const auto& key : cmd.keys) {
    if (cmd.app->count(flag_name(key)) > 0) cfg.set(key, cmd.flags.at(key));
  }
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"datapop: dataset popularity prediction and replica strategy simulator", "datapop"};
  app.require_subcommand(1);

  const std::vector<std::string> synth{"n_datasets", "horizon_weeks", "mix_hot", "mix_decaying", "mix_cold", "mix_bursty"};
  const std::vector<std::string> forest{"n_trees", "max_depth", "min_samples_leaf", "features_per_split", "bootstrap"};
  auto join = [](std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> all;
    for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return all;
  };

  std::vector<Command> commands;
  commands.push_back(add_command(app, "generate", "Write a seeded synthetic trace", synth));
  commands.push_back(add_command(app, "features", "Write per-dataset features",
                                 join({kTraceKeys, {"window_end", "train_end", "label_weeks"}})));
  commands.push_back(add_command(app, "train", "Train the popularity forest",
                                 join({kTraceKeys, {"model", "train_end", "label_weeks"}, forest})));
  commands.push_back(add_command(app, "predict", "Predict long-term access probabilities",
                                 join({kTraceKeys, {"model", "window_end"}})));
  commands.push_back(add_command(app, "forecast", "Short-term forecasts by exponential smoothing",
                                 join({kTraceKeys, {"alpha_step"}})));
  commands.push_back(add_command(app, "simulate", "Run the replica strategy over the trace",
                                 join({kTraceKeys,
                                       {"model", "valid_end", "sim_start", "capacity_bytes", "capacity_fraction",
                                        "max_replicas", "purge_threshold", "purge_cadence", "policy", "alpha_step"}})));
  commands.push_back(add_command(
      app, "evaluate", "Removal curves, forecast correlation and occupancy CDF",
      join({kTraceKeys, {"model", "train_end", "valid_end", "label_weeks", "eval_begin", "eval_end", "alpha_step"}})));
  commands.push_back(add_command(app, "report", "Summarize evaluate outputs into report.txt", {}));
  for (auto& c : commands) bind(c);
  bool with_labels = false;
  commands[1].app->add_flag("--with-labels", with_labels, "Add a label column (label window starts at window_end)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto& c : commands) {
      if (!c.app->parsed()) continue;
      const RunConfig cfg = resolve(c);
      const auto& name = c.app->get_name();
      if (name == "generate") cmd_generate(cfg, out);
      else if (name == "features") cmd_features(cfg, with_labels, out);
      else if (name == "train") cmd_train(cfg, out);
      else if (name == "predict") cmd_predict(cfg, out);
      else if (name == "forecast") cmd_forecast(cfg, out);
      else if (name == "simulate") cmd_simulate(cfg, out);
      else if (name == "evaluate") cmd_evaluate(cfg, out);
      else if (name == "report") cmd_report(cfg, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"datapop"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace datapop::cli
