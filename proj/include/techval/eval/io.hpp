#pragma once

#include <sstream>
#include <string>

#include <json.hpp>

#include "techval/core/csv.hpp"
#include "techval/eval/cross_validation.hpp"

namespace techval {

inline nlohmann::ordered_json to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}};
}

inline nlohmann::ordered_json to_json(const ReliabilityBin& b) {
  return {{"lower", b.lower},
          {"upper", b.upper},
          {"count", b.count},
          {"mean_confidence", b.mean_confidence},
          {"positive_fraction", b.positive_fraction}};
}

inline nlohmann::ordered_json to_json(const MetricSet& m) {
  nlohmann::ordered_json j;
  const auto values = metric_values(m);
  for (std::size_t i = 0; i < values.size(); ++i) j[metric_names()[i]] = values[i];
  j["confusion"] = to_json(m.confusion);
  j["bins"] = nlohmann::ordered_json::array();
  for (const auto& b : m.bins) j["bins"].push_back(to_json(b));
  return j;
}

inline nlohmann::ordered_json to_json(const CVResult& r) {
  nlohmann::ordered_json j;
  j["mean"] = nlohmann::ordered_json::object();
  j["std"] = nlohmann::ordered_json::object();
  for (const auto& name : metric_names()) {
    j["mean"][name] = r.mean.at(name);
    j["std"][name] = r.stddev.at(name);
  }
  j["train_sizes"] = r.train_sizes;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : r.folds) j["folds"].push_back(to_json(f));
  return j;
}

/// lower, upper, count, mean_confidence, positive_fraction.
inline std::string reliability_csv(const std::vector<ReliabilityBin>& bins) {
  std::ostringstream out;
  csv::write_row(out, {"lower", "upper", "count", "mean_confidence", "positive_fraction"});
  for (const auto& b : bins) {
    csv::write_row(out, {format_double(b.lower), format_double(b.upper), std::to_string(b.count),
                         format_double(b.mean_confidence), format_double(b.positive_fraction)});
  }
  return out.str();
}

}  // namespace techval
