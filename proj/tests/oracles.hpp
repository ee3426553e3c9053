#pragma once

// Independent brute-force re-derivations used as test oracles. Nothing here
// calls into the code paths it checks.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "datapop/forest.hpp"

namespace oracle {

inline double gini_of(double pos, double neg) {
  const double n = pos + neg;
  const double p = pos / n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Exhaustive search over every feature and every midpoint between
// consecutive distinct values; each candidate is scored by recounting all
// rows. Same acceptance rule as the trainer: gain must beat the incumbent by
// more than 1e-12, scanning features then thresholds in ascending order.
inline std::optional<Split> best_split(const datapop::TrainingSet& data, int min_leaf = 1) {
  const std::size_t n = data.size();
  double pos = 0;
  for (int y : data.labels) pos += y;
  const double parent = gini_of(pos, static_cast<double>(n) - pos);
  std::optional<Split> best;
  for (std::size_t f = 0; f < data.n_features; ++f) {
    std::set<double> distinct;
    for (std::size_t i = 0; i < n; ++i) distinct.insert(data.row(i)[f]);
    std::vector<double> v(distinct.begin(), distinct.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      double t = v[k] + (v[k + 1] - v[k]) / 2.0;
      if (!(t < v[k + 1])) t = v[k];
      double nl = 0, pl = 0, nr = 0, pr = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool left = data.row(i)[f] <= t;
        (left ? nl : nr) += 1;
        (left ? pl : pr) += data.labels[i];
      }
      if (nl < min_leaf || nr < min_leaf) continue;
      const double gain = parent - (nl * gini_of(pl, nl - pl) + nr * gini_of(pr, nr - pr)) / static_cast<double>(n);
      const double bar = best ? best->gain + 1e-12 : 1e-12;
      if (gain > bar) best = Split{static_cast<int>(f), t, gain};
    }
  }
  return best;
}

struct AlphaFit {
  double alpha = 0.0;
  double sse = 0.0;
  double next = 0.0;
};

// Evaluates all 101 grid points one at a time; smallest alpha wins ties.
inline AlphaFit grid_alpha(const std::vector<double>& series) {
  double sum = 0;
  for (double y : series) sum += y;
  const double mean = sum / static_cast<double>(series.size());
  AlphaFit best{};
  for (int k = 0; k <= 100; ++k) {
    const double a = k / 100.0;
    double level = mean, sse = 0;
    for (double y : series) {
      sse += (level - y) * (level - y);
      level = (1.0 - a) * level + a * y;
    }
    if (k == 0 || sse < best.sse) best = {a, sse, level};
  }
  return best;
}

struct Item {
  std::string id;
  std::int64_t size = 1;
  int n = 1;
  double forecast = 0.0;
};

// Greedy removal re-derived from scratch: every step rescans all items for
// the lowest forecast/n among those with n >= 2 (ties: larger size, then
// smaller id). Returns the ids in removal order.
inline std::vector<std::string> greedy_removals(std::vector<Item> items, std::int64_t target) {
  std::vector<std::string> removed;
  std::int64_t freed = 0;
  while (freed < target) {
    int pick = -1;
    for (int i = 0; i < static_cast<int>(items.size()); ++i) {
      const auto& c = items[static_cast<std::size_t>(i)];
      if (c.n < 2) continue;
      if (pick < 0) {
        pick = i;
        continue;
      }
      const auto& b = items[static_cast<std::size_t>(pick)];
      const double mc = c.forecast / c.n, mb = b.forecast / b.n;
      if (mc < mb || (mc == mb && (c.size > b.size || (c.size == b.size && c.id < b.id)))) pick = i;
    }
    if (pick < 0) break;
    auto& chosen = items[static_cast<std::size_t>(pick)];
    --chosen.n;
    freed += chosen.size;
    removed.push_back(chosen.id);
  }
  return removed;
}

}  // namespace oracle
