#pragma once

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/core/date.hpp"
#include "techval/corpus/ipc.hpp"

namespace techval {

struct Claim {
  bool is_independent = false;
  int word_count = 1;

  friend bool operator==(const Claim&, const Claim&) = default;
};

struct Party {
  std::string name;     // canonicalized
  std::string country;  // upper-case, may be empty when unknown
  std::optional<int> overdue_fee_count;

  friend bool operator==(const Party&, const Party&) = default;
};

struct CitationRef {
  std::string cited_id;
  std::string cited_country;
  std::optional<Date> cited_filing_date;
  std::vector<std::string> cited_ipcs;
  std::optional<std::string> cited_title;

  friend bool operator==(const CitationRef&, const CitationRef&) = default;
};

struct PriorityRef {
  std::string priority_id;
  std::string country;

  friend bool operator==(const PriorityRef&, const PriorityRef&) = default;
};

struct MaintenanceEvent {
  int event_year_offset = 4;  // one of 4, 8, 12
  bool paid = false;
  bool surcharge = false;

  friend bool operator==(const MaintenanceEvent&, const MaintenanceEvent&) = default;
};

/// Observed patent lifetime in years, or the maximum-term sentinel. The
/// statutory maximum is only approximately 20 years, so it is not encoded
/// as a number.
struct Lifetime {
  bool is_max = false;
  int years = 0;

  static Lifetime max() { return {true, 0}; }
  static Lifetime of_years(int y) { return {false, y}; }

  friend bool operator==(const Lifetime&, const Lifetime&) = default;
};

struct PatentRecord {
  std::string patent_id;
  Date filing_date;
  Date grant_date;
  std::string title;
  int abstract_word_count = 0;
  int fulltext_word_count = 0;
  std::vector<Claim> claims;
  std::vector<std::string> ipcs;
  std::vector<Party> assignees;
  std::vector<Party> inventors;
  std::vector<CitationRef> backward_citations;
  int npl_citation_count = 0;
  std::vector<PriorityRef> priorities;
  std::vector<MaintenanceEvent> maintenance_events;
  std::optional<Lifetime> lifetime_years;  // nullopt = undetermined

  friend bool operator==(const PatentRecord&, const PatentRecord&) = default;
};

/// Case-folds, strips punctuation and collapses whitespace.
inline std::string canonical_name(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : raw) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
    } else if (std::ispunct(uc)) {
      continue;
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  return out;
}

inline std::string canonical_country(std::string_view raw) {
  std::string out;
  for (char c : trim(raw)) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

/// Throws ParseError naming the first violated record invariant.
inline void validate(const PatentRecord& r) {
  if (r.patent_id.empty()) throw ParseError("empty patent_id");
  if (r.grant_date < r.filing_date) throw ParseError("grant_date precedes filing_date");
  if (r.abstract_word_count < 0 || r.fulltext_word_count < 0 || r.npl_citation_count < 0) {
    throw ParseError("negative count field");
  }
  for (const auto& code : r.ipcs) {
    if (!Ipc::parse(code)) throw ParseError("unparseable IPC code '" + code + "'");
  }
  for (const auto& c : r.claims) {
    if (c.word_count < 1) throw ParseError("claim word_count must be >= 1");
  }
  for (const auto* parties : {&r.assignees, &r.inventors}) {
    for (const auto& p : *parties) {
      if (p.name.empty()) throw ParseError("party name empty after canonicalization");
      if (p.overdue_fee_count && *p.overdue_fee_count < 0) throw ParseError("negative overdue_fee_count");
    }
  }
  for (const auto& c : r.backward_citations) {
    if (c.cited_id.empty()) throw ParseError("citation with empty cited_id");
    for (const auto& code : c.cited_ipcs) {
      if (!Ipc::parse(code)) throw ParseError("unparseable cited IPC code '" + code + "'");
    }
  }
  for (const auto& p : r.priorities) {
    if (p.priority_id.empty()) throw ParseError("priority with empty priority_id");
  }
  std::set<int> offsets;
  for (const auto& e : r.maintenance_events) {
    if (e.event_year_offset != 4 && e.event_year_offset != 8 && e.event_year_offset != 12) {
      throw ParseError("maintenance event_year_offset must be 4, 8 or 12");
    }
    if (!offsets.insert(e.event_year_offset).second) throw ParseError("duplicate maintenance event offset");
  }
  if (r.lifetime_years && !r.lifetime_years->is_max && r.lifetime_years->years < 0) {
    throw ParseError("negative lifetime_years");
  }
}

enum class Label { kVp, kNvp, kExcluded };

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::kVp: return "VP";
    case Label::kNvp: return "NVP";
    case Label::kExcluded: return "EXCLUDED";
  }
  return "EXCLUDED";
}

/// Which observed lifetime marks a non-valuable patent. The maximum-term
/// sentinel always marks a valuable one; everything else is excluded.
struct LabelPolicy {
  int nvp_lifetime_years = 4;
};

inline Label derive_label(const PatentRecord& record, const LabelPolicy& policy = {}) {
  if (!record.lifetime_years) return Label::kExcluded;
  const auto& lt = *record.lifetime_years;
  if (lt.is_max) return Label::kVp;
  if (lt.years == policy.nvp_lifetime_years) return Label::kNvp;
  return Label::kExcluded;
}

}  // namespace techval
