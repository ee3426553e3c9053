#include "datapop/forest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "datapop/csv.hpp"
#include "datapop/error.hpp"
#include "datapop/parallel.hpp"
#include "datapop/rng.hpp"

namespace datapop {
namespace {

// Gains closer than this are treated as ties.
constexpr double kGainEpsilon = 1e-12;

struct Pending {
  int node;
  int depth;
  std::vector<int> samples;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const ForestParams& params, std::uint64_t seed)
      : data_(data),
        params_(params),
        k_(params.resolved_features_per_split(data.n_features)),
        rng_(seed),
        importance_(data.n_features, 0.0),
        order_(data.n_features) {
    std::iota(order_.begin(), order_.end(), 0);
  }

  DecisionTree grow() {
    const auto n = static_cast<int>(data_.size());
    std::vector<int> bootstrap(data_.size());
    if (params_.bootstrap) {
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (auto& s : bootstrap) s = pick(rng_);
    } else {
      std::iota(bootstrap.begin(), bootstrap.end(), 0);
    }
    root_size_ = static_cast<double>(bootstrap.size());

    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, 0, std::move(bootstrap)});
    while (!stack.empty()) {
      Pending p = std::move(stack.back());
      stack.pop_back();
      auto [left, right] = split_node(tree, p);
      // Right is pushed first so the left subtree is expanded (and draws from
      // the generator) first.
      if (!right.samples.empty()) stack.push_back(std::move(right));
      if (!left.samples.empty()) stack.push_back(std::move(left));
    }
    return tree;
  }

  const std::vector<double>& importance() const noexcept { return importance_; }

 private:
  std::pair<Pending, Pending> split_node(DecisionTree& tree, const Pending& p) {
    const auto n = static_cast<std::int64_t>(p.samples.size());
    std::int64_t pos = 0;
    for (int s : p.samples) pos += data_.labels[static_cast<std::size_t>(s)];

    auto& node = tree.nodes[static_cast<std::size_t>(p.node)];
    node.n_samples = static_cast<int>(n);
    node.positive_fraction = static_cast<double>(pos) / static_cast<double>(n);

    const bool depth_exhausted = params_.max_depth > 0 && p.depth >= params_.max_depth;
    if (pos == 0 || pos == n || depth_exhausted || n < 2 * params_.min_samples_leaf) return {};

    // Uniform subset of k features, scanned in ascending index order.
    for (int j = 0; j < k_; ++j) {
      const int r = std::uniform_int_distribution<int>(j, static_cast<int>(order_.size()) - 1)(rng_);
      std::swap(order_[static_cast<std::size_t>(j)], order_[static_cast<std::size_t>(r)]);
    }
    std::vector<std::size_t> candidates(order_.begin(), order_.begin() + k_);
    std::ranges::sort(candidates);

    const double parent = gini(pos, n - pos);
    double best_gain = kGainEpsilon;
    int best_feature = -1;
    double best_threshold = 0.0;
    const std::int64_t min_leaf = params_.min_samples_leaf;

    for (std::size_t f : candidates) {
      column_.clear();
      for (int s : p.samples) {
        const auto i = static_cast<std::size_t>(s);
        column_.emplace_back(data_.values[i * data_.n_features + f], data_.labels[i]);
      }
      std::ranges::sort(column_, {}, &std::pair<double, int>::first);
      std::int64_t n_left = 0, pos_left = 0;
      for (std::size_t i = 0; i + 1 < column_.size(); ++i) {
        ++n_left;
        pos_left += column_[i].second;
        const double lo = column_[i].first, hi = column_[i + 1].first;
        if (lo == hi) continue;
        const std::int64_t n_right = n - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        const double child = (static_cast<double>(n_left) * gini(pos_left, n_left - pos_left) +
                              static_cast<double>(n_right) * gini(pos - pos_left, n_right - (pos - pos_left))) /
                             static_cast<double>(n);
        const double gain = parent - child;
        if (gain > best_gain + (best_feature < 0 ? 0.0 : kGainEpsilon)) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return {};

    importance_[static_cast<std::size_t>(best_feature)] += static_cast<double>(n) / root_size_ * best_gain;

    Pending left{static_cast<int>(tree.nodes.size()), p.depth + 1, {}};
    Pending right{static_cast<int>(tree.nodes.size() + 1), p.depth + 1, {}};
    for (int s : p.samples) {
      const double v = data_.values[static_cast<std::size_t>(s) * data_.n_features +
                                    static_cast<std::size_t>(best_feature)];
      (v <= best_threshold ? left : right).samples.push_back(s);
    }
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& split = tree.nodes[static_cast<std::size_t>(p.node)];
    split.feature = best_feature;
    split.threshold = best_threshold;
    split.left = left.node;
    split.right = right.node;
    return {std::move(left), std::move(right)};
  }

  const TrainingSet& data_;
  const ForestParams& params_;
  int k_;
  Rng rng_;
  std::vector<double> importance_;
  std::vector<std::size_t> order_;
  std::vector<std::pair<double, int>> column_;
  double root_size_ = 1.0;
};

TrainingSet canonical_order(const TrainingSet& data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::ranges::stable_sort(idx, [&](std::size_t a, std::size_t b) {
    const auto ra = data.row(a), rb = data.row(b);
    const auto cmp = std::lexicographical_compare_three_way(ra.begin(), ra.end(), rb.begin(), rb.end());
    if (cmp != 0) return cmp < 0;
    return data.labels[a] < data.labels[b];
  });
  TrainingSet out;
  out.n_features = data.n_features;
  out.values.reserve(data.values.size());
  out.labels.reserve(data.size());
  for (auto i : idx) out.add(data.row(i), data.labels[i]);
  return out;
}

void check_tree(const DecisionTree& tree, std::size_t n_features) {
  if (tree.nodes.empty()) throw ValidationError("tree without nodes");
  const auto count = static_cast<int>(tree.nodes.size());
  // Children always follow their parent, which rules out cycles.
  for (int i = 0; i < count; ++i) {
    const auto& node = tree.nodes[static_cast<std::size_t>(i)];
    if (node.is_leaf()) {
      if (!(node.positive_fraction >= 0.0 && node.positive_fraction <= 1.0)) {
        throw ValidationError("leaf positive_fraction outside [0, 1]");
      }
      continue;
    }
    if (static_cast<std::size_t>(node.feature) >= n_features) throw ValidationError("split feature out of range");
    if (node.left <= i || node.right <= i || node.left >= count || node.right >= count) {
      throw ValidationError("malformed split children");
    }
  }
}

}  // namespace

void ForestParams::validate() const {
  if (n_trees < 1) throw ValidationError("n_trees must be >= 1");
  if (max_depth < 0) throw ValidationError("max_depth must be >= 0 (0 = unlimited)");
  if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
  if (features_per_split < 0) throw ValidationError("features_per_split must be >= 0 (0 = sqrt)");
}

int ForestParams::resolved_features_per_split(std::size_t n_features) const {
  const int f = static_cast<int>(n_features);
  const int k = features_per_split > 0 ? features_per_split
                                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(f))));
  return std::clamp(k, 1, std::max(1, f));
}

double DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].positive_fraction;
}

std::size_t DecisionTree::split_count() const {
  return static_cast<std::size_t>(std::ranges::count_if(nodes, [](const TreeNode& n) { return !n.is_leaf(); }));
}

void TrainingSet::add(std::span<const double> x, int label) {
  if (labels.empty() && n_features == 0) n_features = x.size();
  if (x.size() != n_features) {
    throw ValidationError("feature arity " + std::to_string(x.size()) + " does not match " +
                          std::to_string(n_features));
  }
  if (label != 0 && label != 1) throw ValidationError("labels must be 0 or 1");
  values.insert(values.end(), x.begin(), x.end());
  labels.push_back(label);
}

TrainingSet to_training_set(std::span<const LabeledExample> examples) {
  TrainingSet set;
  set.n_features = kFeatureCount;
  for (const auto& ex : examples) set.add(ex.features.row(), ex.label);
  return set;
}

ForestModel::ForestModel(std::size_t n_features, ForestParams params, std::uint64_t seed,
                         std::vector<DecisionTree> trees, std::vector<double> importances)
    : n_features_(n_features),
      params_(params),
      seed_(seed),
      trees_(std::move(trees)),
      importances_(std::move(importances)) {
  if (n_features_ == 0) throw ValidationError("model needs at least one feature");
  if (trees_.empty()) throw ValidationError("model needs at least one tree");
  for (const auto& t : trees_) check_tree(t, n_features_);
  if (importances_.empty()) importances_.assign(n_features_, 0.0);
  if (importances_.size() != n_features_) throw ValidationError("importances arity mismatch");
}

double ForestModel::predict_proba(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw ValidationError("feature arity " + std::to_string(x.size()) + " does not match model arity " +
                          std::to_string(n_features_));
  }
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return std::clamp(sum / static_cast<double>(trees_.size()), 0.0, 1.0);
}

double ForestModel::predict_proba(const FeatureVector& features) const {
  const auto row = features.row();
  return predict_proba(std::span<const double>(row));
}

double gini(std::int64_t n_pos, std::int64_t n_neg) {
  if (n_pos < 0 || n_neg < 0 || n_pos + n_neg < 1) throw ValidationError("gini of an empty node");
  const double p = static_cast<double>(n_pos) / static_cast<double>(n_pos + n_neg);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

ForestModel train(const TrainingSet& data, const ForestParams& params, std::uint64_t seed) {
  params.validate();
  if (data.size() == 0) throw ValidationError("cannot train on an empty example set");
  if (data.size() < 2) throw ValidationError("training needs at least 2 examples");
  if (data.n_features == 0 || data.values.size() != data.size() * data.n_features) {
    throw ValidationError("inconsistent feature arity in training set");
  }
  const TrainingSet canonical = canonical_order(data);

  const auto n_trees = static_cast<std::size_t>(params.n_trees);
  std::vector<DecisionTree> trees(n_trees);
  std::vector<std::vector<double>> per_tree(n_trees);
  parallel_for(n_trees, [&](std::size_t t) {
    TreeBuilder builder(canonical, params, derive_seed(seed, static_cast<std::uint64_t>(t)));
    trees[t] = builder.grow();
    per_tree[t] = builder.importance();
  });

  std::vector<double> importances(data.n_features, 0.0);
  for (const auto& imp : per_tree) {
    for (std::size_t f = 0; f < imp.size(); ++f) importances[f] += imp[f];
  }
  const double total = std::accumulate(importances.begin(), importances.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : importances) v /= total;
  }
  return ForestModel(data.n_features, params, seed, std::move(trees), std::move(importances));
}

ForestModel train(std::span<const LabeledExample> examples, const ForestParams& params, std::uint64_t seed) {
  if (examples.empty()) throw ValidationError("cannot train on an empty example set");
  return train(to_training_set(examples), params, seed);
}

std::vector<double> feature_importances(const ForestModel& model) {
  const bool any_split = std::ranges::any_of(model.trees(), [](const DecisionTree& t) { return t.split_count() > 0; });
  if (!any_split) return std::vector<double>(model.n_features(), 0.0);
  return model.importances();
}

void save_model(const ForestModel& model, std::ostream& out) {
  const auto& p = model.params();
  out << "datapop-forest 1\n";
  out << "n_features " << model.n_features() << '\n';
  out << "params n_trees=" << p.n_trees << " max_depth=" << p.max_depth
      << " min_samples_leaf=" << p.min_samples_leaf << " features_per_split=" << p.features_per_split
      << " bootstrap=" << (p.bootstrap ? 1 : 0) << '\n';
  out << "seed " << model.seed() << '\n';
  out << "importances";
  for (double v : model.importances()) out << ' ' << csv::format_double(v);
  out << '\n';
  for (std::size_t t = 0; t < model.trees().size(); ++t) {
    const auto& nodes = model.trees()[t].nodes;
    out << "tree " << t << ' ' << nodes.size() << '\n';
    for (const auto& n : nodes) {
      if (n.is_leaf()) {
        out << "L " << csv::format_double(n.positive_fraction) << ' ' << n.n_samples << '\n';
      } else {
        out << "S " << n.feature << ' ' << csv::format_double(n.threshold) << ' ' << n.left << ' ' << n.right
            << ' ' << csv::format_double(n.positive_fraction) << ' ' << n.n_samples << '\n';
      }
    }
  }
  out << "end\n";
}

ForestModel load_model(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::istringstream {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.front() != '#') return std::istringstream(line);
    }
    throw ParseError(source, line_no, "unexpected end of model file");
  };
  auto fail = [&](const std::string& what) { throw ParseError(source, line_no, what); };
  auto expect = [&](std::istringstream& s, const std::string& keyword) {
    std::string word;
    if (!(s >> word) || word != keyword) fail("expected '" + keyword + "'");
  };

  {
    auto s = next_line();
    std::string magic;
    int version = 0;
    if (!(s >> magic >> version) || magic != "datapop-forest") fail("not a datapop-forest model");
    if (version != 1) fail("unsupported model version " + std::to_string(version));
  }
  std::size_t n_features = 0;
  {
    auto s = next_line();
    expect(s, "n_features");
    if (!(s >> n_features)) fail("bad n_features");
  }
  ForestParams params;
  {
    auto s = next_line();
    expect(s, "params");
    std::string token;
    while (s >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) fail("bad params token '" + token + "'");
      const auto key = token.substr(0, eq);
      int value = 0;
      try {
        value = std::stoi(token.substr(eq + 1));
      } catch (const std::logic_error&) {
        fail("bad params value '" + token + "'");
      }
      if (key == "n_trees") params.n_trees = value;
      else if (key == "max_depth") params.max_depth = value;
      else if (key == "min_samples_leaf") params.min_samples_leaf = value;
      else if (key == "features_per_split") params.features_per_split = value;
      else if (key == "bootstrap") params.bootstrap = value != 0;
      else fail("unknown param '" + key + "'");
    }
  }
  std::uint64_t seed = 0;
  {
    auto s = next_line();
    expect(s, "seed");
    if (!(s >> seed)) fail("bad seed");
  }
  std::vector<double> importances;
  {
    auto s = next_line();
    expect(s, "importances");
    double v = 0;
    while (s >> v) importances.push_back(v);
  }
  std::vector<DecisionTree> trees;
  while (true) {
    auto s = next_line();
    std::string word;
    s >> word;
    if (word == "end") break;
    if (word != "tree") fail("expected 'tree' or 'end'");
    std::size_t index = 0, count = 0;
    if (!(s >> index >> count) || index != trees.size() || count == 0) fail("bad tree header");
    DecisionTree tree;
    tree.nodes.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      auto ns = next_line();
      std::string kind;
      ns >> kind;
      TreeNode node;
      if (kind == "L") {
        if (!(ns >> node.positive_fraction >> node.n_samples)) fail("bad leaf");
      } else if (kind == "S") {
        if (!(ns >> node.feature >> node.threshold >> node.left >> node.right >> node.positive_fraction >>
              node.n_samples) ||
            node.feature < 0) {
          fail("bad split");
        }
      } else {
        fail("expected node line");
      }
      tree.nodes.push_back(node);
    }
    trees.push_back(std::move(tree));
  }
  if (static_cast<int>(trees.size()) != params.n_trees) fail("tree count does not match n_trees");
  try {
    return ForestModel(n_features, params, seed, std::move(trees), std::move(importances));
  } catch (const ValidationError& e) {
    throw ParseError(source, line_no, e.what());
  }
}

}  // namespace datapop
