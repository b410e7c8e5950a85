#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/core/random.hpp"
#include "techval/models/tree.hpp"

namespace techval {

struct BoostingParams {
  int n_estimators = 90;
  int max_depth = 6;
  double learning_rate = 0.3;
  double l1 = 0.0;  // lambda_1, soft threshold on the leaf gradient sum
  double l2 = 1.0;  // lambda_2, added to the leaf hessian sum
  double min_split_gain = 0.0;
  double min_child_weight = 1.0;

  friend bool operator==(const BoostingParams&, const BoostingParams&) = default;
};

inline void validate(const BoostingParams& p) {
  if (p.n_estimators < 1) throw ConfigError("gradient boosting n_estimators must be >= 1");
  if (p.max_depth < 0) throw ConfigError("gradient boosting max_depth must be >= 0");
  if (!(p.learning_rate > 0.0)) throw ConfigError("gradient boosting learning_rate must be > 0");
  if (!(p.l1 >= 0.0) || !(p.l2 >= 0.0)) throw ConfigError("gradient boosting l1/l2 must be >= 0");
  if (!(p.min_child_weight >= 0.0)) throw ConfigError("gradient boosting min_child_weight must be >= 0");
}

struct BoostingModel {
  BoostingParams params;
  std::size_t n_features = 0;
  double base_score = 0.0;  // initial raw score (log-odds of the training base rate)
  std::vector<Tree> trees;  // leaf values already include the learning rate
  std::vector<double> loss_trace;  // mean training loss after each stage

  double raw_score(std::span<const double> x) const {
    double s = base_score;
    for (const auto& t : trees) s += t.predict(x);
    return s;
  }
  double predict_one(std::span<const double> x) const { return sigmoid(raw_score(x)); }

  friend bool operator==(const BoostingModel&, const BoostingModel&) = default;
};

namespace boosting {

struct GradStats {
  double g = 0.0, h = 0.0;

  GradStats& operator+=(const GradStats& o) {
    g += o.g;
    h += o.h;
    return *this;
  }
  friend GradStats operator-(const GradStats& a, const GradStats& b) { return {a.g - b.g, a.h - b.h}; }
};

inline double soft_threshold(double g, double t) {
  if (g > t) return g - t;
  if (g < -t) return g + t;
  return 0.0;
}

struct NewtonPolicy {
  using Stats = GradStats;
  const std::vector<double>* grad;
  const std::vector<double>* hess;
  const BoostingParams* p;

  Stats stats(std::size_t r) const { return {(*grad)[r], (*hess)[r]}; }
  bool splittable(const Stats&) const { return true; }
  double score(const Stats& s) const {
    const double t = soft_threshold(s.g, p->l1);
    return t * t / (s.h + p->l2);
  }
  std::optional<double> gain(const Stats& l, const Stats& r, const Stats& parent) const {
    if (l.h < p->min_child_weight || r.h < p->min_child_weight) return std::nullopt;
    const double g = 0.5 * (score(l) + score(r) - score(parent));
    if (!(g > p->min_split_gain)) return std::nullopt;
    return g;
  }
  double leaf_value(const Stats& s) const {
    const double denom = s.h + p->l2;
    return denom > 0.0 ? -soft_threshold(s.g, p->l1) / denom * p->learning_rate : 0.0;
  }
  std::vector<std::size_t> candidate_features(std::size_t n, Rng&) const {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
};

inline double mean_loss(const std::vector<double>& score, const Targets& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += logistic_loss(score[i], y[i]);
  return s / static_cast<double>(y.size());
}

}  // namespace boosting

/// Second-order gradient boosting on the logistic loss. If a stage would
/// raise the training loss its leaf values are halved until it does not
/// (dropped entirely after 30 halvings), so the loss trace never increases.
inline BoostingModel train_boosting(const Matrix& X, const Targets& y, const BoostingParams& params) {
  validate(params);
  if (X.empty() || X.rows() != y.size()) throw DataError("gradient boosting: empty or misaligned training data");
  BoostingModel m;
  m.params = params;
  m.n_features = X.cols();
  const auto n = X.rows();
  double pos = 0.0;
  for (int v : y) pos += v;
  const double base = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
  m.base_score = std::log(base / (1.0 - base));

  const auto sorted = presort_columns(X);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<double> score(n, m.base_score), grad(n), hess(n), candidate(n);
  double loss = boosting::mean_loss(score, y);
  Rng unused(0);
  boosting::NewtonPolicy policy{&grad, &hess, &params};
  for (int stage = 1; stage <= params.n_estimators; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      grad[i] = p - y[i];
      hess[i] = p * (1.0 - p);
    }
    Tree tree = grow_tree(X, sorted, rows, params.max_depth, policy, unused);
    std::vector<int> leaf(n);
    for (std::size_t i = 0; i < n; ++i) leaf[i] = tree.leaf_index(X.row(i));
    double new_loss = loss;
    for (int halving = 0; halving <= 30; ++halving) {
      for (std::size_t i = 0; i < n; ++i) {
        candidate[i] = score[i] + tree.nodes[static_cast<std::size_t>(leaf[i])].value;
      }
      new_loss = boosting::mean_loss(candidate, y);
      if (!std::isfinite(new_loss)) {
        throw NumericError("gradient boosting: nonfinite score at stage " + std::to_string(stage));
      }
      if (new_loss <= loss) break;
      for (auto& node : tree.nodes) node.value = halving == 30 ? 0.0 : node.value * 0.5;
    }
    if (new_loss > loss) new_loss = loss;  // all leaf values were zeroed
    else score.swap(candidate);
    loss = new_loss;
    m.trees.push_back(std::move(tree));
    m.loss_trace.push_back(loss);
  }
  return m;
}

}  // namespace techval
