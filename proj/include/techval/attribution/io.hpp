#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "techval/attribution/summary.hpp"
#include "techval/core/csv.hpp"

namespace techval {

/// patent_id, confidence, phi0, phi_1..phi_M (features in matrix column order).
inline std::string attributions_csv(const std::vector<Attribution>& attrs, std::size_t n_features) {
  std::ostringstream out;
  std::vector<std::string> header{"patent_id", "confidence", "phi0"};
  for (std::size_t c = 1; c <= n_features; ++c) header.push_back("phi_" + std::to_string(c));
  csv::write_row(out, header);
  for (const auto& a : attrs) {
    std::vector<std::string> row{a.patent_id, format_double(a.confidence), format_double(a.phi0)};
    for (double p : a.phi) row.push_back(format_double(p));
    csv::write_row(out, row);
  }
  return out.str();
}

inline nlohmann::ordered_json to_json(const FeatureStats& s, const std::vector<std::string>& names) {
  auto ranked = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < s.ranking.size(); ++r) {
    const auto c = s.ranking[r];
    ranked.push_back({{"rank", r + 1},
                      {"feature", names[c]},
                      {"column", c + 1},
                      {"mean_abs_phi", s.mean_abs_phi[c]},
                      {"sign_stat", s.sign_stat[c]}});
  }
  return ranked;
}

inline nlohmann::ordered_json to_json(const BinSummary& b, const std::vector<std::string>& names) {
  nlohmann::ordered_json j;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["count"] = b.count;
  j["empty"] = b.empty;
  j["features"] = b.empty ? nlohmann::ordered_json::array() : to_json(b.stats, names);
  return j;
}

inline nlohmann::ordered_json to_json(const GlobalSummary& g, const std::vector<std::string>& names) {
  nlohmann::ordered_json j;
  j["count"] = g.count;
  j["features"] = to_json(g.stats, names);
  return j;
}

/// patent_id, feature, value_percentile, phi: one row per (instance, feature).
inline std::string summary_points_csv(const GlobalSummary& g, const std::vector<Attribution>& attrs,
                                      const std::vector<std::string>& names) {
  std::ostringstream out;
  csv::write_row(out, {"patent_id", "feature", "value_percentile", "phi"});
  for (const auto& p : g.points) {
    csv::write_row(out, {attrs[p.instance].patent_id, names[p.feature], format_double(p.value_percentile),
                         format_double(p.phi)});
  }
  return out.str();
}

}  // namespace techval
