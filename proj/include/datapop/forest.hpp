#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "datapop/features.hpp"

namespace datapop {

// Hyperparameters. max_depth = 0 means unlimited; features_per_split = 0
// means ceil(sqrt(n_features)). With bootstrap off every tree sees the
// training set as is.
struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;
  int min_samples_leaf = 1;
  int features_per_split = 0;
  bool bootstrap = true;

  void validate() const;
  int resolved_features_per_split(std::size_t n_features) const;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// Split nodes send x[feature] <= threshold to the left child.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double positive_fraction = 0.0;
  int n_samples = 0;

  bool is_leaf() const noexcept { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Nodes stored flat; nodes[0] is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t split_count() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

// Row-major numeric design matrix with binary labels.
struct TrainingSet {
  std::size_t n_features = 0;
  std::vector<double> values;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span(values).subspan(i * n_features, n_features);
  }
  void add(std::span<const double> x, int label);
};

TrainingSet to_training_set(std::span<const LabeledExample> examples);

class ForestModel {
 public:
  ForestModel() = default;
  // Checks tree structure, leaf fractions and feature indices against n_features.
  ForestModel(std::size_t n_features, ForestParams params, std::uint64_t seed,
              std::vector<DecisionTree> trees, std::vector<double> importances);

  // Mean over trees of the reached leaf's positive fraction.
  double predict_proba(std::span<const double> x) const;
  double predict_proba(const FeatureVector& features) const;

  std::size_t n_features() const noexcept { return n_features_; }
  const ForestParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  const std::vector<double>& importances() const noexcept { return importances_; }

  friend bool operator==(const ForestModel&, const ForestModel&) = default;

 private:
  std::size_t n_features_ = 0;
  ForestParams params_;
  std::uint64_t seed_ = 0;
  std::vector<DecisionTree> trees_;
  std::vector<double> importances_;
};

// Gini impurity 1 - p^2 - (1-p)^2 of a node with the given class counts.
double gini(std::int64_t n_pos, std::int64_t n_neg);

// Bagged Gini trees. Tree t uses its own generator seeded from (seed, t), and
// training rows are put in a canonical order first, so the result depends
// only on the multiset of rows, the params and the seed.
ForestModel train(const TrainingSet& data, const ForestParams& params, std::uint64_t seed);
ForestModel train(std::span<const LabeledExample> examples, const ForestParams& params,
                  std::uint64_t seed);

// Mean decrease in impurity per feature, normalized to sum 1; all zeros when
// the forest has no split.
std::vector<double> feature_importances(const ForestModel& model);

// Text model format "datapop-forest 1"; see docs/formats.md. Leading '#'
// comment lines are written by the caller and skipped on load.
void save_model(const ForestModel& model, std::ostream& out);
ForestModel load_model(std::istream& in, const std::string& source = "model");

}  // namespace datapop
