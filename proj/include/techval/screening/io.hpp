#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "techval/core/csv.hpp"
#include "techval/eval/io.hpp"
#include "techval/models/io.hpp"
#include "techval/screening/grid.hpp"
#include "techval/screening/pareto.hpp"

namespace techval {

inline std::vector<Objectives> objectives_of(const std::vector<CandidateResult>& cands) {
  std::vector<Objectives> out;
  for (const auto& c : cands) out.push_back({c.f1, c.mcc, c.ece});
  return out;
}

/// One row per grid spec: spec_id, family, hyperparams (compact JSON), the
/// seven CV-mean metrics, status, error.
inline std::string candidates_csv(const std::vector<CandidateResult>& cands) {
  std::ostringstream out;
  std::vector<std::string> header{"spec_id", "family", "hyperparams"};
  header.insert(header.end(), metric_names().begin(), metric_names().end());
  header.insert(header.end(), {"status", "error"});
  csv::write_row(out, header);
  for (const auto& c : cands) {
    std::vector<std::string> row{c.spec.id, std::string(to_string(c.spec.family())),
                                 hyperparams_to_json(c.spec.params).dump()};
    for (const auto& name : metric_names()) row.push_back(c.ok() ? format_double(c.cv->mean.at(name)) : "");
    row.push_back(c.ok() ? "ok" : "failed");
    row.push_back(c.error);
    csv::write_row(out, row);
  }
  return out.str();
}

inline nlohmann::ordered_json candidates_json(const std::vector<CandidateResult>& cands) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& c : cands) {
    nlohmann::ordered_json j;
    j["spec"] = to_json(c.spec);
    j["status"] = c.ok() ? "ok" : "failed";
    if (c.ok()) {
      j["cv"] = to_json(*c.cv);
    } else {
      j["error"] = c.error;
    }
    a.push_back(j);
  }
  return a;
}

/// spec_id, family, f1, mcc, ece, on_front. Failed specs are omitted.
inline std::string front_csv(const std::vector<CandidateResult>& cands, const std::vector<std::size_t>& index,
                             const ParetoFront& front) {
  std::ostringstream out;
  csv::write_row(out, {"spec_id", "family", "f1", "mcc", "ece", "on_front"});
  for (std::size_t k = 0; k < index.size(); ++k) {
    const auto& c = cands[index[k]];
    csv::write_row(out, {c.spec.id, std::string(to_string(c.spec.family())), format_double(c.f1),
                         format_double(c.mcc), format_double(c.ece), front.on_front[k] ? "true" : "false"});
  }
  return out.str();
}

inline nlohmann::ordered_json front_json(const std::vector<CandidateResult>& cands,
                                         const std::vector<std::size_t>& index, const ParetoFront& front) {
  nlohmann::ordered_json j;
  j["objectives"] = {{"ece", "minimize"}, {"mcc", "maximize"}};
  j["f1_floor"] = front.f1_floor;
  j["considered"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < index.size(); ++k) {
    const auto& c = cands[index[k]];
    j["considered"].push_back({{"spec_id", c.spec.id},
                               {"f1", c.f1},
                               {"mcc", c.mcc},
                               {"ece", c.ece},
                               {"below_floor", static_cast<bool>(front.below_floor[k])},
                               {"on_front", static_cast<bool>(front.on_front[k])}});
  }
  j["front"] = nlohmann::ordered_json::array();
  for (auto k : front.members) j["front"].push_back(cands[index[k]].spec.id);
  j["warnings"] = front.warnings;
  return j;
}

}  // namespace techval
