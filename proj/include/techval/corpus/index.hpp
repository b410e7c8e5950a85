#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "techval/corpus/record.hpp"

namespace techval {

/// Distinct (IPC key at the index level) set of a record. Throws DataError if
/// any code is too shallow for the level.
inline std::vector<std::string> ipc_keys(const PatentRecord& r, IpcLevel level) {
  std::set<std::string> keys;
  for (const auto& code : r.ipcs) {
    auto ipc = Ipc::parse(code);
    auto key = ipc ? ipc->at(level) : std::nullopt;
    if (!key) {
      throw DataError("patent " + r.patent_id + ": IPC '" + code + "' does not resolve to " +
                      std::string(to_string(level)) + " level");
    }
    keys.insert(*key);
  }
  return {keys.begin(), keys.end()};
}

/// Distinct canonical names of a party list.
inline std::vector<std::string> distinct_names(const std::vector<Party>& parties) {
  std::set<std::string> names;
  for (const auto& p : parties) names.insert(p.name);
  return {names.begin(), names.end()};
}

/// Corpus-wide aggregates backing the technology-environment and
/// prior-knowledge indicators. Immutable after build_index.
class CorpusIndex {
 public:
  struct Cell {
    int patents = 0;
    int distinct_applicants = 0;
  };

  struct AssigneeEntry {
    Date grant_date;
    std::vector<std::string> ipcs;  // normalized full codes
  };

  IpcLevel level() const noexcept { return level_; }

  /// Patents granted in `year` carrying `ipc` (at the index level).
  int patents_in(const std::string& ipc, int year) const {
    auto it = by_ipc_year_.find({ipc, year});
    return it == by_ipc_year_.end() ? 0 : it->second.patents;
  }

  int applicants_in(const std::string& ipc, int year) const {
    auto it = by_ipc_year_.find({ipc, year});
    return it == by_ipc_year_.end() ? 0 : it->second.distinct_applicants;
  }

  /// Patents granted up to and including `year` carrying `ipc`.
  int cumulative_through(const std::string& ipc, int year) const {
    auto it = by_ipc_cumulative_.upper_bound({ipc, year});
    if (it == by_ipc_cumulative_.begin()) return 0;
    --it;
    return it->first.first == ipc ? it->second : 0;
  }

  /// Corpus patents of an assignee granted strictly before `before`.
  int assignee_prior(const std::string& name, Date before) const {
    auto it = by_assignee_.find(name);
    if (it == by_assignee_.end()) return 0;
    const auto& v = it->second;
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), before,
                                             [](const AssigneeEntry& e, Date d) { return e.grant_date < d; }) -
                            v.begin());
  }

  /// Prior assignee patents with (carrying = true) or without any IPC code
  /// starting with `prefix`.
  int assignee_prior_in_field(const std::string& name, Date before, const std::string& prefix, bool carrying) const {
    auto it = by_assignee_.find(name);
    if (it == by_assignee_.end()) return 0;
    int n = 0;
    for (const auto& e : it->second) {
      if (!(e.grant_date < before)) break;
      const bool has = std::any_of(e.ipcs.begin(), e.ipcs.end(),
                                   [&](const std::string& c) { return std::string_view(c).starts_with(prefix); });
      if (has == carrying) ++n;
    }
    return n;
  }

  int inventor_prior(const std::string& name, Date before) const {
    auto it = by_inventor_.find(name);
    if (it == by_inventor_.end()) return 0;
    const auto& v = it->second;
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), before) - v.begin());
  }

  const std::map<std::pair<std::string, int>, Cell>& by_ipc_year() const noexcept { return by_ipc_year_; }
  const std::map<std::pair<std::string, int>, int>& by_ipc_cumulative() const noexcept { return by_ipc_cumulative_; }
  const std::map<std::string, std::vector<AssigneeEntry>>& by_assignee() const noexcept { return by_assignee_; }
  const std::map<std::string, std::vector<Date>>& by_inventor() const noexcept { return by_inventor_; }

 private:
  friend CorpusIndex build_index(const std::vector<PatentRecord>&, IpcLevel);

  IpcLevel level_ = IpcLevel::kSubclass;
  std::map<std::pair<std::string, int>, Cell> by_ipc_year_;
  std::map<std::pair<std::string, int>, int> by_ipc_cumulative_;
  std::map<std::string, std::vector<AssigneeEntry>> by_assignee_;
  std::map<std::string, std::vector<Date>> by_inventor_;
};

inline CorpusIndex build_index(const std::vector<PatentRecord>& corpus, IpcLevel level = IpcLevel::kSubclass) {
  if (corpus.empty()) throw DataError("cannot index an empty corpus");
  CorpusIndex index;
  index.level_ = level;
  std::map<std::pair<std::string, int>, std::set<std::string>> applicants;
  for (const auto& r : corpus) {
    const int year = r.grant_date.year();
    const auto names = distinct_names(r.assignees);
    for (const auto& key : ipc_keys(r, level)) {
      ++index.by_ipc_year_[{key, year}].patents;
      applicants[{key, year}].insert(names.begin(), names.end());
    }
    std::vector<std::string> codes;
    for (const auto& c : r.ipcs) codes.push_back(Ipc::parse(c)->code());
    for (const auto& name : names) index.by_assignee_[name].push_back({r.grant_date, codes});
    for (const auto& name : distinct_names(r.inventors)) index.by_inventor_[name].push_back(r.grant_date);
  }
  for (auto& [key, cell] : index.by_ipc_year_) cell.distinct_applicants = static_cast<int>(applicants[key].size());

  // Map iteration is ordered by (ipc, year), so a running sum per ipc yields
  // the cumulative counts.
  std::string current;
  int running = 0;
  for (const auto& [key, cell] : index.by_ipc_year_) {
    if (key.first != current) {
      current = key.first;
      running = 0;
    }
    running += cell.patents;
    index.by_ipc_cumulative_[key] = running;
  }
  for (auto& [name, entries] : index.by_assignee_) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.grant_date < b.grant_date; });
  }
  for (auto& [name, dates] : index.by_inventor_) std::sort(dates.begin(), dates.end());
  return index;
}

}  // namespace techval
