#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/core/random.hpp"
#include "techval/models/tree.hpp"

namespace techval {

struct ForestParams {
  int n_trees = 50;
  int max_depth = 20;
  int min_leaf = 1;
  int features_per_split = 0;  // 0 = round(sqrt(n_features))
  bool bootstrap = true;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

inline void validate(const ForestParams& p) {
  if (p.n_trees < 1) throw ConfigError("random forest n_trees must be >= 1");
  if (p.max_depth < 1) throw ConfigError("random forest max_depth must be >= 1");
  if (p.min_leaf < 1) throw ConfigError("random forest min_leaf must be >= 1");
  if (p.features_per_split < 0) throw ConfigError("random forest features_per_split must be >= 0");
}

struct ForestModel {
  ForestParams params;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;
  std::vector<Tree> trees;  // leaf value = fraction of VP rows in the leaf

  double predict_one(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

namespace forest {

struct GiniStats {
  double n0 = 0.0, n1 = 0.0;

  GiniStats& operator+=(const GiniStats& o) {
    n0 += o.n0;
    n1 += o.n1;
    return *this;
  }
  friend GiniStats operator-(const GiniStats& a, const GiniStats& b) { return {a.n0 - b.n0, a.n1 - b.n1}; }
  double total() const { return n0 + n1; }
};

/// Weighted Gini impurity, n * (1 - p0^2 - p1^2).
inline double weighted_gini(const GiniStats& s) {
  const double n = s.total();
  return n <= 0.0 ? 0.0 : n - (s.n0 * s.n0 + s.n1 * s.n1) / n;
}

struct GiniPolicy {
  using Stats = GiniStats;
  const Targets* y;
  const std::vector<double>* weight;  // bootstrap multiplicity per row
  int min_leaf;
  std::size_t features_per_split;

  Stats stats(std::size_t r) const {
    const double w = (*weight)[r];
    return (*y)[r] ? Stats{0.0, w} : Stats{w, 0.0};
  }
  bool splittable(const Stats& s) const { return s.n0 > 0.0 && s.n1 > 0.0; }
  std::optional<double> gain(const Stats& l, const Stats& r, const Stats& parent) const {
    if (l.total() < min_leaf || r.total() < min_leaf) return std::nullopt;
    return weighted_gini(parent) - weighted_gini(l) - weighted_gini(r);
  }
  double leaf_value(const Stats& s) const { return s.total() > 0.0 ? s.n1 / s.total() : 0.0; }
  std::vector<std::size_t> candidate_features(std::size_t n, Rng& rng) const {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto k = std::min(n, features_per_split);
    if (k == n) return all;
    // Partial Fisher-Yates: the first k entries become the sample.
    for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.index(n - i)]);
    all.resize(k);
    return all;
  }
};

}  // namespace forest

inline ForestModel train_forest(const Matrix& X, const Targets& y, const ForestParams& params, std::uint64_t seed) {
  validate(params);
  if (X.empty() || X.rows() != y.size()) throw DataError("random forest: empty or misaligned training data");
  ForestModel m;
  m.params = params;
  m.seed = seed;
  m.n_features = X.cols();
  const auto sorted = presort_columns(X);
  const std::size_t fps =
      params.features_per_split > 0
          ? static_cast<std::size_t>(params.features_per_split)
          : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(X.cols())))));
  Rng rng(seed);
  std::vector<double> weight(X.rows());
  for (int t = 0; t < params.n_trees; ++t) {
    if (params.bootstrap) {
      std::fill(weight.begin(), weight.end(), 0.0);
      for (std::size_t i = 0; i < X.rows(); ++i) weight[rng.index(X.rows())] += 1.0;
    } else {
      std::fill(weight.begin(), weight.end(), 1.0);
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      if (weight[i] > 0.0) rows.push_back(i);
    }
    forest::GiniPolicy policy{&y, &weight, params.min_leaf, fps};
    m.trees.push_back(grow_tree(X, sorted, rows, params.max_depth, policy, rng));
  }
  return m;
}

}  // namespace techval
