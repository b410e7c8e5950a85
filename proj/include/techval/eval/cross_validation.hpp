#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/eval/metrics.hpp"
#include "techval/models/model.hpp"
#include "techval/models/scaler.hpp"
#include "techval/resampling/kfold.hpp"
#include "techval/resampling/tomek.hpp"

namespace techval {

/// Training/validation rows of every fold, after optional undersampling of
/// the training side. Independent of the model, so one plan serves a whole grid.
struct FoldPlan {
  FoldAssignment assignment;
  bool resample = false;
  std::vector<std::vector<std::size_t>> train;  // original row indices, ascending
  std::vector<std::vector<std::size_t>> test;
  std::vector<TomekReport> tomek;  // row indices refer to the fold's training split

  std::size_t k() const noexcept { return assignment.k; }
};

inline FoldPlan make_fold_plan(const Matrix& X, const Targets& y, std::size_t k, std::uint64_t seed, bool resample) {
  FoldPlan plan;
  plan.assignment = stratified_kfold(y, k, seed);
  plan.resample = resample;
  for (std::size_t f = 0; f < k; ++f) {
    auto train = plan.assignment.train_rows(f);
    plan.test.push_back(plan.assignment.test_rows(f));
    if (resample) {
      const auto X_train = X.select_rows(train);
      // Distances on features standardized with training statistics only.
      const auto scaled = Scaler::fit(X_train).transform(X_train);
      auto under = undersample(scaled, select(y, train));
      std::vector<std::size_t> kept;
      for (auto i : under.kept) kept.push_back(train[i]);
      plan.tomek.push_back(std::move(under.report));
      train = std::move(kept);
    }
    plan.train.push_back(std::move(train));
  }
  return plan;
}

struct CVResult {
  std::vector<MetricSet> folds;
  std::map<std::string, double> mean, stddev;
  std::vector<double> oof_probs;  // validation probability of every row
  std::vector<std::size_t> train_sizes;

  double summary(const std::string& metric) const { return mean.at(metric); }
  friend bool operator==(const CVResult&, const CVResult&) = default;
};

/// Called once per fold with the rows the model is fitted on and the rows it
/// is scored on.
using FoldObserver =
    std::function<void(std::size_t fold, const std::vector<std::size_t>& train, const std::vector<std::size_t>& test)>;

inline CVResult cross_validate(const ModelSpec& spec, const Matrix& X, const Targets& y, const FoldPlan& plan,
                               std::size_t m_bins = 10, const FoldObserver& observer = {}) {
  validate(spec);
  CVResult out;
  out.oof_probs.assign(y.size(), 0.0);
  for (std::size_t f = 0; f < plan.k(); ++f) {
    const auto& train = plan.train[f];
    const auto& test = plan.test[f];
    if (observer) observer(f, train, test);
    const auto model = train_model_rows(spec, X, y, train);
    const auto probs = predict_proba(model, X.select_rows(test));
    for (std::size_t i = 0; i < test.size(); ++i) out.oof_probs[test[i]] = probs[i];
    out.folds.push_back(evaluate(select(y, test), probs, m_bins));
    out.train_sizes.push_back(train.size());
  }
  const auto& names = metric_names();
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::vector<double> values;
    for (const auto& fold : out.folds) values.push_back(metric_values(fold)[m]);
    out.mean[names[m]] = mean(values);
    out.stddev[names[m]] = techval::stddev(values);
  }
  return out;
}

inline CVResult cross_validate(const ModelSpec& spec, const Matrix& X, const Targets& y, std::size_t k,
                               std::uint64_t seed, bool resample, std::size_t m_bins = 10) {
  return cross_validate(spec, X, y, make_fold_plan(X, y, k, seed, resample), m_bins);
}

}  // namespace techval
