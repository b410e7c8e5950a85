#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "techval/models/model.hpp"

namespace techval {

using ojson = nlohmann::ordered_json;

namespace detail {

/// Reads `key` from `j` into `out` when present; rejects unknown keys.
class FieldReader {
 public:
  FieldReader(const ojson& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where_ + ": field '" + key + "' has the wrong type");
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown field '" + it.key() + "'");
    }
  }

 private:
  const ojson& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline ojson to_json(const LogisticParams& p) {
  return {{"alpha", p.alpha}, {"lambda", p.lambda}, {"epochs", p.epochs}, {"learning_rate", p.learning_rate}};
}
inline ojson to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth},
          {"min_leaf", p.min_leaf},
          {"features_per_split", p.features_per_split},
          {"bootstrap", p.bootstrap}};
}
inline ojson to_json(const MlpParams& p) {
  return {{"hidden", p.hidden},
          {"dropout", p.dropout},
          {"epochs", p.epochs},
          {"learning_rate", p.learning_rate},
          {"batch_size", p.batch_size}};
}
inline ojson to_json(const BoostingParams& p) {
  return {{"n_estimators", p.n_estimators}, {"max_depth", p.max_depth},
          {"learning_rate", p.learning_rate}, {"l1", p.l1},
          {"l2", p.l2},                     {"min_split_gain", p.min_split_gain},
          {"min_child_weight", p.min_child_weight}};
}

inline ojson hyperparams_to_json(const Hyperparams& h) {
  return std::visit([](const auto& p) { return to_json(p); }, h);
}

/// Family defaults overridden by whatever keys `j` carries.
inline Hyperparams hyperparams_from_json(Family family, const ojson& j, const std::string& where) {
  detail::FieldReader r(j, where);
  Hyperparams out;
  switch (family) {
    case Family::kLogistic: {
      LogisticParams p;
      r.get("alpha", p.alpha);
      r.get("lambda", p.lambda);
      r.get("epochs", p.epochs);
      r.get("learning_rate", p.learning_rate);
      out = p;
      break;
    }
    case Family::kForest: {
      ForestParams p;
      r.get("n_trees", p.n_trees);
      r.get("max_depth", p.max_depth);
      r.get("min_leaf", p.min_leaf);
      r.get("features_per_split", p.features_per_split);
      r.get("bootstrap", p.bootstrap);
      out = p;
      break;
    }
    case Family::kMlp: {
      MlpParams p;
      r.get("hidden", p.hidden);
      r.get("dropout", p.dropout);
      r.get("epochs", p.epochs);
      r.get("learning_rate", p.learning_rate);
      r.get("batch_size", p.batch_size);
      out = p;
      break;
    }
    case Family::kBoosting: {
      BoostingParams p;
      r.get("n_estimators", p.n_estimators);
      r.get("max_depth", p.max_depth);
      r.get("learning_rate", p.learning_rate);
      r.get("l1", p.l1);
      r.get("l2", p.l2);
      r.get("min_split_gain", p.min_split_gain);
      r.get("min_child_weight", p.min_child_weight);
      out = p;
      break;
    }
  }
  r.finish();
  return out;
}

inline ojson to_json(const ModelSpec& s) {
  return {{"id", s.id}, {"family", to_string(s.family())}, {"seed", s.seed}, {"hyperparams", hyperparams_to_json(s.params)}};
}

inline ModelSpec model_spec_from_json(const ojson& j, const std::string& where = "model spec") {
  detail::FieldReader r(j, where);
  ModelSpec s;
  std::string family;
  ojson hp = ojson::object();
  r.get("id", s.id);
  r.get("family", family);
  r.get("seed", s.seed);
  r.get("hyperparams", hp);
  r.finish();
  if (family.empty()) throw ConfigError(where + ": missing 'family'");
  s.params = hyperparams_from_json(parse_family(family), hp, where + ".hyperparams");
  return s;
}

namespace detail {

inline ojson to_json(const Scaler& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

inline Scaler scaler_from_json(const ojson& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
}

inline ojson to_json(const Tree& t) {
  ojson nodes = ojson::array();
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) {
      nodes.push_back({{"value", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return nodes;
}

inline Tree tree_from_json(const ojson& j) {
  Tree t;
  for (const auto& n : j) {
    TreeNode node;
    if (n.contains("value")) {
      node.value = n.at("value").get<double>();
    } else {
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
    }
    t.nodes.push_back(node);
  }
  const auto size = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
      throw ParseError("tree node references a missing child");
    }
  }
  return t;
}

inline ojson trees_to_json(const std::vector<Tree>& trees) {
  ojson a = ojson::array();
  for (const auto& t : trees) a.push_back(to_json(t));
  return a;
}

inline std::vector<Tree> trees_from_json(const ojson& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(tree_from_json(t));
  return out;
}

}  // namespace detail

/// Self-describing model document: family, hyperparameters and fitted state.
inline ojson to_json(const TrainedModel& model) {
  ojson j;
  j["family"] = to_string(family_of(model));
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        j["hyperparams"] = to_json(m.params);
        if constexpr (std::is_same_v<T, LogisticModel>) {
          j["scaler"] = detail::to_json(m.scaler);
          j["weights"] = m.weights;
          j["intercept"] = m.intercept;
          j["loss_trace"] = m.loss_trace;
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["seed"] = m.seed;
          j["n_features"] = m.n_features;
          j["trees"] = detail::trees_to_json(m.trees);
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          j["seed"] = m.seed;
          j["scaler"] = detail::to_json(m.scaler);
          j["inputs"] = m.weights.inputs;
          j["hidden"] = m.weights.hidden;
          j["weights"] = m.weights.v;
          j["loss_trace"] = m.loss_trace;
        } else {
          j["n_features"] = m.n_features;
          j["base_score"] = m.base_score;
          j["trees"] = detail::trees_to_json(m.trees);
          j["loss_trace"] = m.loss_trace;
        }
      },
      model);
  return j;
}

inline TrainedModel model_from_json(const ojson& j) {
  try {
    const auto family = parse_family(j.at("family").get<std::string>());
    const auto hp = hyperparams_from_json(family, j.at("hyperparams"), "model.hyperparams");
    switch (family) {
      case Family::kLogistic: {
        LogisticModel m;
        m.params = std::get<LogisticParams>(hp);
        m.scaler = detail::scaler_from_json(j.at("scaler"));
        m.weights = j.at("weights").get<std::vector<double>>();
        m.intercept = j.at("intercept").get<double>();
        m.loss_trace = j.at("loss_trace").get<std::vector<double>>();
        if (m.weights.size() != m.scaler.width()) throw ParseError("weights and scaler differ in width");
        return m;
      }
      case Family::kForest: {
        ForestModel m;
        m.params = std::get<ForestParams>(hp);
        m.seed = j.at("seed").get<std::uint64_t>();
        m.n_features = j.at("n_features").get<std::size_t>();
        m.trees = detail::trees_from_json(j.at("trees"));
        return m;
      }
      case Family::kMlp: {
        MlpModel m;
        m.params = std::get<MlpParams>(hp);
        m.seed = j.at("seed").get<std::uint64_t>();
        m.scaler = detail::scaler_from_json(j.at("scaler"));
        m.weights = MlpWeights(j.at("inputs").get<std::size_t>(), j.at("hidden").get<std::size_t>());
        const auto v = j.at("weights").get<std::vector<double>>();
        if (v.size() != m.weights.v.size()) throw ParseError("mlp weight vector has the wrong length");
        m.weights.v = v;
        m.loss_trace = j.at("loss_trace").get<std::vector<double>>();
        return m;
      }
      case Family::kBoosting: {
        BoostingModel m;
        m.params = std::get<BoostingParams>(hp);
        m.n_features = j.at("n_features").get<std::size_t>();
        m.base_score = j.at("base_score").get<double>();
        m.trees = detail::trees_from_json(j.at("trees"));
        m.loss_trace = j.at("loss_trace").get<std::vector<double>>();
        return m;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
  throw ParseError("malformed model document");
}

}  // namespace techval
