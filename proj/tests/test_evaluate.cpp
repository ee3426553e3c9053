#include <doctest.h>

#include <algorithm>
#include <random>

#include "datapop/error.hpp"
#include "datapop/evaluate.hpp"
#include "datapop/forest.hpp"

using namespace datapop;

namespace {

Trace tiny() {
  return import_trace(DATAPOP_FIXTURE_DIR "/tiny_events.csv", DATAPOP_FIXTURE_DIR "/tiny_metas.csv");
}

DatasetSlot slot(std::string id, std::int64_t size, int n) { return {std::move(id), size, n, 0.0, 0.0}; }

StorageState scaled(std::int64_t k) {
  std::vector<DatasetSlot> s{slot("a", 10 * k, 1), slot("b", 10 * k, 3)};
  return StorageState(40 * k, s);
}

}  // namespace

TEST_CASE("rolling windows on a generated trace") {
  SynthConfig synth;
  synth.n_datasets = 300;
  const auto trace = generate_synthetic(synth, 5);
  const auto w = rolling_windows(trace);
  const auto before = [&](int week) {
    return std::ranges::count_if(trace.metas(), [&](const DatasetMeta& m) { return m.creation_week < week; });
  };
  CHECK(static_cast<long>(w.train.size()) == before(kDefaultTrainEnd));
  CHECK(static_cast<long>(w.validation.size()) == before(kDefaultValidEnd));
  for (const auto& ex : w.train) CHECK(ex.features.creation_age <= kDefaultTrainEnd);

  auto events = trace.events();
  std::mt19937 rng(9);
  std::shuffle(events.begin(), events.end(), rng);
  const Trace shuffled(events, trace.metas(), trace.horizon_weeks());
  const auto again = rolling_windows(shuffled);
  CHECK(again.train == w.train);
  CHECK(again.validation == w.validation);

  CHECK_THROWS_AS(rolling_windows(trace, 78, 104, 0), ValidationError);
  CHECK_THROWS_AS(rolling_windows(trace, 90, 104, 26), ValidationError);
  CHECK_THROWS_AS(rolling_windows(trace, 78, 110, 26), ValidationError);
}

TEST_CASE("removal curve on a hand-computed fixture") {
  const std::map<std::string, double> p{{"a", 0.1}, {"b", 0.2}, {"c", 0.3}, {"d", 0.9}};
  const std::map<std::string, int> truth{{"a", 0}, {"b", 1}, {"c", 0}, {"d", 1}};
  const std::map<std::string, std::int64_t> sizes{{"a", 10}, {"b", 20}, {"c", 30}, {"d", 40}};
  const auto curve = saved_space_curve(p, truth, sizes);
  REQUIRE(curve.size() == 4);
  CHECK(curve[0] == CurvePoint{0.1, 0.0, "forest"});
  CHECK(curve[1] == CurvePoint{0.3, 0.5, "forest"});
  CHECK(curve[2].saved_space_fraction == 0.6);
  CHECK(curve[2].mistake_rate == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(curve[3] == CurvePoint{1.0, 0.5, "forest"});
  CHECK(mistake_rate_at(curve, 0.05) == 0.0);
  CHECK(mistake_rate_at(curve, 0.25) == 0.5);
  CHECK(mistake_rate_at(curve, 2.0) == 0.5);
  CHECK_THROWS_AS(mistake_rate_at(std::vector<CurvePoint>{}, 0.1), ValidationError);
}

TEST_CASE("perfect and reversed rankings") {
  std::map<std::string, int> truth;
  std::map<std::string, std::int64_t> sizes;
  std::map<std::string, double> good, bad;
  for (int i = 0; i < 10; ++i) {
    const auto id = "d" + std::to_string(i);
    truth[id] = i % 2;
    sizes[id] = 1 + i;
    good[id] = i % 2 ? 0.9 : 0.1;
    bad[id] = 1.0 - good[id];
  }
  const auto best = saved_space_curve(good, truth, sizes);
  for (std::size_t k = 0; k < 5; ++k) CHECK(best[k].mistake_rate == 0.0);
  const auto worst = saved_space_curve(bad, truth, sizes);
  for (std::size_t k = 0; k < 5; ++k) CHECK(worst[k].mistake_rate == 1.0);
  CHECK(best.back().saved_space_fraction == 1.0);
  truth.erase("d0");
  CHECK_THROWS_AS(saved_space_curve(good, truth, sizes), ValidationError);
}

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1}, flat{1, 1, 1, 1};
  CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(x, z) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(pearson(x, flat), ValidationError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), ValidationError);
}

TEST_CASE("forecast correlation under perfect persistence") {
  std::vector<AccessEvent> events;
  std::vector<DatasetMeta> metas;
  for (int d = 0; d < 3; ++d) {
    const auto id = "p" + std::to_string(d);
    metas.push_back({id, 0, 0, 0, 100, 1});
    for (int w = 0; w < 10; ++w) events.push_back({id, w, 1 + 2 * d});
  }
  const Trace trace(events, metas, 10);
  const auto st = forecast_correlation(trace, ForecastModel::static_last, 2, 10);
  CHECK(st.correlation == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.pairs == 24);
  const auto br = forecast_correlation(trace, ForecastModel::brown, 2, 10);
  CHECK(br.correlation == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(forecast_correlation(trace, ForecastModel::brown, 1, 10), ValidationError);
  CHECK(to_string(ForecastModel::static_last) == "static");
}

TEST_CASE("occupancy cdf") {
  const StorageState s(40, {slot("a", 10, 1), slot("c", 10, 3)});
  CHECK(occupancy_cdf(s) == std::vector<CdfPoint>{{1, 0.25}, {2, 0.25}, {3, 1.0}});
  const StorageState ones(100, {slot("a", 10, 1), slot("b", 30, 1)});
  CHECK(occupancy_cdf(ones) == std::vector<CdfPoint>{{1, 1.0}});
  const auto base = occupancy_cdf(scaled(1));
  for (std::int64_t k : {7, 1000, 123457}) {
    const auto other = occupancy_cdf(scaled(k));
    REQUIRE(other.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(other[i].cumulative_space_fraction == doctest::Approx(base[i].cumulative_space_fraction).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(occupancy_cdf(StorageState{}), ValidationError);
}

TEST_CASE("initial storage and full evaluation on the tiny fixture") {
  const auto trace = tiny();
  const auto s = initial_storage(trace, 2);
  CHECK(s.used_bytes() == 8000);
  CHECK(s.capacity_bytes() == 8000);

  EvaluationParams params;
  params.train_end = 4;
  params.valid_end = 8;
  params.label_weeks = 4;
  const auto w = rolling_windows(trace, 4, 8, 4);
  ForestParams fp;
  fp.n_trees = 10;
  const auto model = train(w.train, fp, 1);
  const auto report = evaluate(trace, model, params);
  for (auto policy : {"forest", "lru", "lfu"}) CHECK(curve_of(report.curve_points, policy).size() == 3);
  CHECK(report.cdf_points.back().cumulative_space_fraction == 1.0);
}
