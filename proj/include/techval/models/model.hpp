#pragma once

#include <string>
#include <variant>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/models/boosting.hpp"
#include "techval/models/forest.hpp"
#include "techval/models/logistic.hpp"
#include "techval/models/mlp.hpp"

namespace techval {

enum class Family { kLogistic, kForest, kMlp, kBoosting };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::kLogistic: return "LR";
    case Family::kForest: return "RF";
    case Family::kMlp: return "NN";
    case Family::kBoosting: return "XGB";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "LR") return Family::kLogistic;
  if (s == "RF") return Family::kForest;
  if (s == "NN") return Family::kMlp;
  if (s == "XGB") return Family::kBoosting;
  throw ConfigError("unknown model family '" + std::string(s) + "' (expected LR, RF, NN or XGB)");
}

using Hyperparams = std::variant<LogisticParams, ForestParams, MlpParams, BoostingParams>;

inline Family family_of(const Hyperparams& h) {
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParams>) return Family::kLogistic;
        if constexpr (std::is_same_v<T, ForestParams>) return Family::kForest;
        if constexpr (std::is_same_v<T, MlpParams>) return Family::kMlp;
        if constexpr (std::is_same_v<T, BoostingParams>) return Family::kBoosting;
      },
      h);
}

struct ModelSpec {
  std::string id;  // e.g. "RF #1"
  Hyperparams params;
  std::uint64_t seed = 0;

  Family family() const { return family_of(params); }
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline void validate(const ModelSpec& s) {
  std::visit([](const auto& p) { validate(p); }, s.params);
}

using TrainedModel = std::variant<LogisticModel, ForestModel, MlpModel, BoostingModel>;

inline Family family_of(const TrainedModel& m) {
  switch (m.index()) {
    case 0: return Family::kLogistic;
    case 1: return Family::kForest;
    case 2: return Family::kMlp;
    default: return Family::kBoosting;
  }
}

inline TrainedModel train(const ModelSpec& spec, const Matrix& X, const Targets& y) {
  validate(spec);
  return std::visit(
      [&](const auto& p) -> TrainedModel {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParams>) return train_logistic(X, y, p);
        if constexpr (std::is_same_v<T, ForestParams>) return train_forest(X, y, p, spec.seed);
        if constexpr (std::is_same_v<T, MlpParams>) return train_mlp(X, y, p, spec.seed);
        if constexpr (std::is_same_v<T, BoostingParams>) return train_boosting(X, y, p);
      },
      spec.params);
}

inline TrainedModel train_model_rows(const ModelSpec& spec, const Matrix& X, const Targets& y,
                                     std::span<const std::size_t> rows) {
  return train(spec, X.select_rows(rows), select(y, rows));
}

inline std::size_t input_width(const TrainedModel& m) {
  return std::visit(
      [](const auto& model) -> std::size_t {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LogisticModel> || std::is_same_v<T, MlpModel>) {
          return model.scaler.width();
        } else {
          return model.n_features;
        }
      },
      m);
}

inline double predict_one(const TrainedModel& m, std::span<const double> x) {
  return std::visit([&](const auto& model) { return model.predict_one(x); }, m);
}

/// Positive-class (VP) probabilities, one per row of X.
inline std::vector<double> predict_proba(const TrainedModel& m, const Matrix& X) {
  if (X.cols() != input_width(m)) {
    throw DataError("model expects " + std::to_string(input_width(m)) + " features, got " +
                    std::to_string(X.cols()));
  }
  std::vector<double> out(X.rows());
  std::visit(
      [&](const auto& model) {
        for (std::size_t r = 0; r < X.rows(); ++r) out[r] = std::clamp(model.predict_one(X.row(r)), 0.0, 1.0);
      },
      m);
  return out;
}

}  // namespace techval
