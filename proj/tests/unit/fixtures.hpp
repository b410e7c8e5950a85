#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "techval/core/random.hpp"
#include "techval/corpus/record.hpp"

namespace techval::testing {

inline std::filesystem::path data_dir() { return TECHVAL_DATA_DIR; }

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("techval_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline PatentRecord make_record(std::string id, std::string grant, std::vector<std::string> ipcs,
                                std::vector<std::string> assignees = {}) {
  PatentRecord r;
  r.patent_id = std::move(id);
  r.grant_date = Date::parse(grant);
  r.filing_date = Date::from_ymd(r.grant_date.year() - 2, 1, 1);
  r.title = "Test patent";
  r.ipcs = std::move(ipcs);
  for (auto& a : assignees) r.assignees.push_back({canonical_name(a), "US", std::nullopt});
  r.claims.push_back({true, 10});
  r.lifetime_years = Lifetime::max();
  return r;
}

/// Small random corpus over a handful of subclasses, assignees and years.
inline std::vector<PatentRecord> random_corpus(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> ipcs = {"H01L21/02", "H01L29/78", "G06F17/50", "G11C11/40", "H01S5/00", "B82Y10/00"};
  const std::vector<std::string> names = {"Acme", "Beta", "Gamma", "Delta", "Epsilon"};
  std::vector<PatentRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> codes;
    const auto k = 1 + rng.index(3);
    for (std::size_t j = 0; j < k; ++j) codes.push_back(ipcs[rng.index(ipcs.size())]);
    std::vector<std::string> as;
    const auto m = rng.index(3);
    for (std::size_t j = 0; j < m; ++j) as.push_back(names[rng.index(names.size())]);
    const int year = 2000 + static_cast<int>(rng.index(5));
    const auto month = 1 + static_cast<unsigned>(rng.index(12));
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02u-15", year, month);
    auto r = make_record("P" + std::to_string(1000 + i), date, codes, as);
    r.inventors.push_back({canonical_name(names[rng.index(names.size())]), "JP", std::nullopt});
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace techval::testing
