#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "datapop/error.hpp"
#include "datapop/forest.hpp"
#include "oracles.hpp"

using namespace datapop;

namespace {

// x < 0 -> 0, x > 0 -> 1, 200 points.
TrainingSet separable() {
  TrainingSet set;
  for (int i = 1; i <= 100; ++i) {
    const double x = i * 0.25;
    set.add(std::vector<double>{-x}, 0);
    set.add(std::vector<double>{x}, 1);
  }
  return set;
}

double auc(const ForestModel& model, const TrainingSet& data) {
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (data.labels[i] ? pos : neg).push_back(model.predict_proba(data.row(i)));
  }
  double wins = 0;
  for (double p : pos) {
    for (double q : neg) wins += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  }
  return wins / static_cast<double>(pos.size() * neg.size());
}

TrainingSet random_set(std::mt19937& rng, std::size_t n, std::size_t f, int levels) {
  std::uniform_int_distribution<int> value(0, levels - 1), label(0, 1);
  TrainingSet set;
  set.n_features = f;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(f);
    for (auto& v : row) v = value(rng);
    set.add(row, label(rng));
  }
  return set;
}

DecisionTree leaf(double fraction) { return DecisionTree{{TreeNode{-1, 0.0, -1, -1, fraction, 1}}}; }

}  // namespace

TEST_CASE("gini impurity") {
  CHECK(gini(10, 0) == 0.0);
  CHECK(gini(5, 5) == 0.5);
  CHECK(gini(1, 3) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK_THROWS_AS(gini(0, 0), ValidationError);
}

TEST_CASE("single-label training yields pure leaves and zero importances") {
  for (int label : {0, 1}) {
    TrainingSet set;
    for (int i = 0; i < 30; ++i) set.add(std::vector<double>{double(i), double(i % 3)}, label);
    const auto model = train(set, {.n_trees = 5}, 1);
    for (const auto& t : model.trees()) {
      for (const auto& n : t.nodes) {
        CHECK(n.is_leaf());
        CHECK(n.positive_fraction == label);
      }
    }
    CHECK(feature_importances(model) == std::vector<double>{0.0, 0.0});
  }
}

TEST_CASE("separable 1-D data") {
  const auto data = separable();
  const auto model = train(data, {}, 7);
  CHECK(model.trees().size() == 100);
  const double at_plus = model.predict_proba(std::vector<double>{5.0});
  const double at_minus = model.predict_proba(std::vector<double>{-5.0});
  CHECK(at_plus > 0.9);
  CHECK(at_plus <= 1.0);
  CHECK(at_minus < 0.1);
  CHECK(feature_importances(model) == std::vector<double>{1.0});
  CHECK(auc(model, data) == 1.0);

  // The exhaustive oracle splits at the gap around zero.
  const auto split = oracle::best_split(data);
  REQUIRE(split);
  CHECK(split->feature == 0);
  CHECK(split->threshold == 0.0);
}

TEST_CASE("predict_proba averages reached leaves") {
  const ForestModel one(3, {.n_trees = 1}, 0, {leaf(0.7)}, {});
  CHECK(one.predict_proba(std::vector<double>{1, 2, 3}) == 0.7);
  CHECK(one.predict_proba(std::vector<double>{-9, 0, 9}) == 0.7);
  const ForestModel two(1, {.n_trees = 2}, 0, {leaf(0.2), leaf(0.6)}, {});
  CHECK(two.predict_proba(std::vector<double>{0}) == doctest::Approx(0.4));
  CHECK_THROWS_AS(two.predict_proba(std::vector<double>{0, 1}), ValidationError);
}

TEST_CASE("malformed models are rejected") {
  CHECK_THROWS_AS(ForestModel(1, {}, 0, {leaf(1.5)}, {}), ValidationError);
  CHECK_THROWS_AS(ForestModel(1, {}, 0, {DecisionTree{{TreeNode{3, 0.0, 1, 2, 0.5, 2}, TreeNode{}, TreeNode{}}}}, {}),
                  ValidationError);
  CHECK_THROWS_AS(ForestModel(1, {}, 0, {DecisionTree{{TreeNode{0, 0.0, 0, 0, 0.5, 2}}}}, {}), ValidationError);
}

TEST_CASE("training is deterministic and independent of row order") {
  std::mt19937 rng(99);
  auto data = random_set(rng, 120, 4, 6);
  const ForestParams params{.n_trees = 20};
  const auto a = train(data, params, 5);
  CHECK(a == train(data, params, 5));

  // Shuffle rows.
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  TrainingSet shuffled;
  for (auto i : perm) shuffled.add(data.row(i), data.labels[i]);
  const auto b = train(shuffled, params, 5);
  auto probe = random_set(rng, 50, 4, 8);
  for (std::size_t i = 0; i < probe.size(); ++i) CHECK(a.predict_proba(probe.row(i)) == b.predict_proba(probe.row(i)));
  CHECK(a == b);
}

TEST_CASE("each tree depends only on the seed and its index") {
  std::mt19937 rng(3);
  const auto data = random_set(rng, 80, 3, 5);
  const auto small = train(data, {.n_trees = 4}, 11);
  const auto large = train(data, {.n_trees = 9}, 11);
  for (std::size_t t = 0; t < 4; ++t) CHECK(small.trees()[t] == large.trees()[t]);
}

TEST_CASE("root split matches the exhaustive oracle") {
  std::mt19937 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t f = 1 + trial % 4;
    const auto data = random_set(rng, 6 + static_cast<std::size_t>(trial % 15), f, 2 + trial % 5);
    const int min_leaf = 1 + trial % 3;
    const ForestParams params{.n_trees = 1, .max_depth = 1, .min_samples_leaf = min_leaf,
                              .features_per_split = static_cast<int>(f), .bootstrap = false};
    const auto model = train(data, params, static_cast<std::uint64_t>(trial));
    const auto& root = model.trees()[0].nodes[0];
    const auto expected = oracle::best_split(data, min_leaf);
    bool pure = std::ranges::all_of(data.labels, [&](int y) { return y == data.labels[0]; });
    if (!expected || pure || data.size() < static_cast<std::size_t>(2 * min_leaf)) {
      CHECK(root.is_leaf());
      continue;
    }
    REQUIRE_FALSE(root.is_leaf());
    CHECK(root.feature == expected->feature);
    CHECK(root.threshold == expected->threshold);
    ++compared;
  }
  CHECK(compared > 150);
}

TEST_CASE("probabilities stay in [0, 1]") {
  std::mt19937 rng(8);
  const auto data = random_set(rng, 200, 5, 10);
  const auto model = train(data, {.n_trees = 15, .max_depth = 6, .min_samples_leaf = 3}, 4);
  std::uniform_real_distribution<double> any(-100, 100);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = any(rng);
    const double p = model.predict_proba(x);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
  const auto imp = feature_importances(model);
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : imp) CHECK(v >= 0.0);
}

TEST_CASE("max_depth bounds tree depth") {
  std::mt19937 rng(21);
  const auto data = random_set(rng, 150, 3, 20);
  const auto model = train(data, {.n_trees = 3, .max_depth = 2}, 1);
  for (const auto& t : model.trees()) CHECK(t.split_count() <= 3);
}

TEST_CASE("recency-driven labels make recency the most important feature") {
  SynthConfig config;
  config.n_datasets = 2000;
  const auto trace = generate_synthetic(config, 77);
  auto examples = label_examples(extract_features(trace, 78), trace, 78);
  for (auto& ex : examples) ex.label = ex.features.recency <= 6 ? 1 : 0;
  const auto model = train(examples, {.n_trees = 50}, 3);
  const auto imp = feature_importances(model);
  const auto top = std::ranges::max_element(imp) - imp.begin();
  CHECK(top == static_cast<long>(Feature::recency));
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("training input errors") {
  CHECK_THROWS_AS(train(TrainingSet{}, {}, 1), ValidationError);
  TrainingSet one;
  one.add(std::vector<double>{1.0}, 1);
  CHECK_THROWS_AS(train(one, {}, 1), ValidationError);
  TrainingSet set;
  set.add(std::vector<double>{1.0, 2.0}, 1);
  CHECK_THROWS_AS(set.add(std::vector<double>{1.0}, 0), ValidationError);
  CHECK_THROWS_AS(set.add(std::vector<double>{1.0, 2.0}, 2), ValidationError);
  CHECK_THROWS_AS(train(std::span<const LabeledExample>{}, {}, 1), ValidationError);
  CHECK_THROWS_AS(train(separable(), {.n_trees = 0}, 1), ValidationError);
}

TEST_CASE("model text format round-trips") {
  std::mt19937 rng(12);
  const auto data = random_set(rng, 90, 3, 7);
  const auto model = train(data, {.n_trees = 6, .min_samples_leaf = 2, .bootstrap = true}, 31);
  std::stringstream text;
  text << "# comment line\n";
  save_model(model, text);
  CHECK(load_model(text) == model);

  std::istringstream broken("datapop-forest 1\nn_features 2\nparams n_trees=1\nseed 1\nimportances 0 0\ntree 0 1\nX\nend\n");
  CHECK_THROWS_AS(load_model(broken), ParseError);
  std::istringstream wrong_version("datapop-forest 9\n");
  CHECK_THROWS_AS(load_model(wrong_version), ParseError);
}
