#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "techval/corpus/index.hpp"
#include "techval/corpus/record.hpp"
#include "techval/indicators/similarity.hpp"

namespace techval {

inline constexpr std::size_t kIndicatorCount = 50;
inline constexpr std::array<char, 8> kSections = {'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H'};

/// Column order of the feature matrix. Section-frequency blocks are expanded
/// in place as TE_4(A)..TE_4(H) and PK_8(A)..PK_8(H).
inline const std::vector<std::string>& indicator_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (int i = 1; i <= 7; ++i) n.push_back("SC_" + std::to_string(i));
    for (int i = 1; i <= 2; ++i) n.push_back("PR_" + std::to_string(i));
    for (int i = 1; i <= 5; ++i) n.push_back("CP_" + std::to_string(i));
    for (int i = 1; i <= 7; ++i) n.push_back("DEC_" + std::to_string(i));
    for (int i = 1; i <= 3; ++i) n.push_back("TE_" + std::to_string(i));
    for (char s : kSections) n.push_back(std::string("TE_4(") + s + ")");
    n.push_back("TE_5");
    for (int i = 1; i <= 7; ++i) n.push_back("PK_" + std::to_string(i));
    for (char s : kSections) n.push_back(std::string("PK_8(") + s + ")");
    n.push_back("PK_9");
    n.push_back("PK_10");
    return n;
  }();
  return names;
}

inline std::size_t indicator_index(std::string_view name) {
  const auto& names = indicator_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw DataError("unknown indicator '" + std::string(name) + "'");
}

struct FieldConfig {
  std::string focal_field = "H01L";
  IpcLevel ipc_level = IpcLevel::kSubclass;
  EmbeddingSource embedding_source = EmbeddingSource::kLexicalFallback;
};

struct TechEnvironment {
  double te1 = 0, te2 = 0, te3 = 0;
  std::array<double, 8> te4{};
  double te5 = 0;
};

struct PriorKnowledge {
  double pk1 = 0, pk2 = 0, pk3 = 0, pk4 = 0, pk5 = 0, pk6 = 0, pk7 = 0;
  std::array<double, 8> pk8{};
  double pk9 = 0, pk10 = 0;
};

struct IndicatorVector {
  std::array<double, 7> sc{};
  std::array<double, 2> pr{};
  std::array<double, 5> cp{};
  std::array<double, 7> dec{};
  TechEnvironment te;
  PriorKnowledge pk;

  std::array<double, kIndicatorCount> flatten() const {
    std::array<double, kIndicatorCount> out{};
    std::size_t i = 0;
    for (double v : sc) out[i++] = v;
    for (double v : pr) out[i++] = v;
    for (double v : cp) out[i++] = v;
    for (double v : dec) out[i++] = v;
    out[i++] = te.te1;
    out[i++] = te.te2;
    out[i++] = te.te3;
    for (double v : te.te4) out[i++] = v;
    out[i++] = te.te5;
    for (double v : {pk.pk1, pk.pk2, pk.pk3, pk.pk4, pk.pk5, pk.pk6, pk.pk7}) out[i++] = v;
    for (double v : pk.pk8) out[i++] = v;
    out[i++] = pk.pk9;
    out[i++] = pk.pk10;
    return out;
  }
};

namespace detail {

inline int distinct_nonempty(const std::vector<std::string>& values) {
  std::set<std::string> s;
  for (const auto& v : values) {
    if (!v.empty()) s.insert(v);
  }
  return static_cast<int>(s.size());
}

inline int count_foreign(const std::vector<Party>& parties) {
  int n = 0;
  for (const auto& p : parties) {
    if (!p.country.empty() && p.country != "US") ++n;
  }
  return n;
}

inline std::vector<std::string> countries(const std::vector<Party>& parties) {
  std::vector<std::string> out;
  for (const auto& p : parties) out.push_back(p.country);
  return out;
}

inline std::array<double, 8> section_tally(const std::vector<std::string>& codes) {
  std::array<double, 8> tally{};
  for (const auto& c : codes) {
    if (auto ipc = Ipc::parse(c)) tally[static_cast<std::size_t>(ipc->section_index())] += 1.0;
  }
  return tally;
}

inline std::set<std::string> keys_at(const std::vector<std::string>& codes, IpcLevel level) {
  std::set<std::string> keys;
  for (const auto& c : codes) {
    auto ipc = Ipc::parse(c);
    if (!ipc) continue;
    if (auto k = ipc->at(level)) keys.insert(*k);
  }
  return keys;
}

}  // namespace detail

/// SC_1..SC_7.
inline std::array<double, 7> compute_scope_coverage(const PatentRecord& r) {
  int independent = 0;
  double independent_words = 0;
  for (const auto& c : r.claims) {
    if (c.is_independent) {
      ++independent;
      independent_words += c.word_count;
    }
  }
  std::vector<std::string> cited_countries;
  for (const auto& c : r.backward_citations) cited_countries.push_back(c.cited_country);
  std::set<std::string> codes;
  for (const auto& c : r.ipcs) codes.insert(Ipc::parse(c)->code());
  const auto total = static_cast<double>(r.claims.size());
  return {static_cast<double>(r.fulltext_word_count),
          static_cast<double>(detail::distinct_nonempty(cited_countries)),
          total,
          total - independent,
          static_cast<double>(independent),
          independent == 0 ? 0.0 : independent_words / independent,
          static_cast<double>(codes.size())};
}

/// PR_1, PR_2.
inline std::array<double, 2> compute_priority(const PatentRecord& r) {
  std::vector<std::string> cs;
  for (const auto& p : r.priorities) cs.push_back(p.country);
  return {static_cast<double>(r.priorities.size()), static_cast<double>(detail::distinct_nonempty(cs))};
}

/// CP_1..CP_5. Citations with unknown country count as non-US.
inline std::array<double, 5> compute_completeness(const PatentRecord& r) {
  int us = 0;
  for (const auto& c : r.backward_citations) {
    if (c.cited_country == "US") ++us;
  }
  const auto total = static_cast<double>(r.backward_citations.size());
  return {total, static_cast<double>(us), total - us, static_cast<double>(r.grant_date - r.filing_date),
          static_cast<double>(r.abstract_word_count)};
}

/// DEC_1..DEC_7.
inline std::array<double, 7> compute_dev_effort(const PatentRecord& r) {
  double overdue = 0;
  int recorded = 0;
  for (const auto& a : r.assignees) {
    if (a.overdue_fee_count) {
      overdue += *a.overdue_fee_count;
      ++recorded;
    }
  }
  return {static_cast<double>(r.assignees.size()),
          static_cast<double>(detail::count_foreign(r.assignees)),
          static_cast<double>(detail::distinct_nonempty(detail::countries(r.assignees))),
          static_cast<double>(r.inventors.size()),
          static_cast<double>(detail::count_foreign(r.inventors)),
          static_cast<double>(detail::distinct_nonempty(detail::countries(r.inventors))),
          recorded == 0 ? 0.0 : overdue / recorded};
}

/// Median filing-date gap (days) to dated prior patents; 0 without any.
inline double technology_cycle_time(const PatentRecord& r) {
  std::vector<double> gaps;
  for (const auto& c : r.backward_citations) {
    if (c.cited_filing_date) gaps.push_back(static_cast<double>(r.filing_date - *c.cited_filing_date));
  }
  return median(std::move(gaps));
}

/// TE_1..TE_5. Averages run over the record's distinct IPCs at the index
/// level, looked up in the record's grant year.
inline TechEnvironment compute_tech_environment(const PatentRecord& r, const CorpusIndex& index) {
  const auto keys = ipc_keys(r, index.level());
  if (keys.empty()) throw DataError("patent " + r.patent_id + " has no IPC codes");
  const int year = r.grant_date.year();
  TechEnvironment te;
  for (const auto& k : keys) {
    te.te1 += index.patents_in(k, year);
    te.te2 += index.cumulative_through(k, year);
    te.te3 += index.applicants_in(k, year);
  }
  const auto n = static_cast<double>(keys.size());
  te.te1 /= n;
  te.te2 /= n;
  te.te3 /= n;
  te.te4 = detail::section_tally(r.ipcs);
  te.te5 = technology_cycle_time(r);
  return te;
}

/// Originality-style breadth of the prior patents: 1 - sum_n s_n^2 where
/// s_n = P(n) / sum_m P(m) and P(n) counts cited patents carrying IPC n at
/// `level`. Equals 1 - sum (P(n)/|P|)^2 when every cited patent carries one
/// IPC; 0 without classified citations.
inline double technology_breadth(const PatentRecord& r, IpcLevel level = IpcLevel::kSubclass) {
  std::map<std::string, int> counts;
  int total = 0;
  for (const auto& c : r.backward_citations) {
    for (const auto& k : detail::keys_at(c.cited_ipcs, level)) {
      ++counts[k];
      ++total;
    }
  }
  if (total == 0) return 0.0;
  double concentration = 0.0;
  for (const auto& [k, n] : counts) {
    const double share = static_cast<double>(n) / total;
    concentration += share * share;
  }
  return std::max(0.0, 1.0 - concentration);
}

/// PK_1..PK_10.
inline PriorKnowledge compute_prior_knowledge(const PatentRecord& r, const CorpusIndex& index, const FieldConfig& cfg,
                                              const SemanticSimilarity& similarity) {
  PriorKnowledge pk;
  pk.pk1 = r.npl_citation_count;
  const auto assignees = distinct_names(r.assignees);
  const auto inventors = distinct_names(r.inventors);
  for (const auto& a : assignees) {
    pk.pk2 += index.assignee_prior(a, r.grant_date);
    pk.pk4 += index.assignee_prior_in_field(a, r.grant_date, cfg.focal_field, true);
    pk.pk5 += index.assignee_prior_in_field(a, r.grant_date, cfg.focal_field, false);
  }
  if (!assignees.empty()) {
    pk.pk2 /= assignees.size();
    pk.pk4 /= assignees.size();
    pk.pk5 /= assignees.size();
  }
  for (const auto& i : inventors) pk.pk3 += index.inventor_prior(i, r.grant_date);
  if (!inventors.empty()) pk.pk3 /= inventors.size();

  pk.pk6 = similarity.mean_to_citations(r);

  const auto own = detail::keys_at(r.ipcs, IpcLevel::kSubclass);
  std::set<std::string> cited;
  std::vector<std::string> cited_codes;
  int homogeneous = 0;
  for (const auto& c : r.backward_citations) {
    auto k = detail::keys_at(c.cited_ipcs, IpcLevel::kSubclass);
    cited.insert(k.begin(), k.end());
    cited_codes.insert(cited_codes.end(), c.cited_ipcs.begin(), c.cited_ipcs.end());
    bool in_field = false;
    for (const auto& code : c.cited_ipcs) {
      if (Ipc::parse(code)->has_prefix(cfg.focal_field)) in_field = true;
    }
    if (in_field) ++homogeneous;
  }
  if (!own.empty()) {
    int shared = 0;
    for (const auto& k : own) shared += static_cast<int>(cited.count(k));
    pk.pk7 = static_cast<double>(shared) / own.size();
  }
  pk.pk8 = detail::section_tally(cited_codes);
  pk.pk9 = technology_breadth(r, cfg.ipc_level);
  pk.pk10 = homogeneous;
  return pk;
}

inline IndicatorVector compute_indicators(const PatentRecord& r, const CorpusIndex& index, const FieldConfig& cfg,
                                          const SemanticSimilarity& similarity) {
  IndicatorVector v;
  v.sc = compute_scope_coverage(r);
  v.pr = compute_priority(r);
  v.cp = compute_completeness(r);
  v.dec = compute_dev_effort(r);
  v.te = compute_tech_environment(r, index);
  v.pk = compute_prior_knowledge(r, index, cfg, similarity);
  return v;
}

/// Model input: one 50-wide row per labeled (VP/NVP) patent, rows ordered
/// by patent_id.
struct FeatureMatrix {
  std::vector<std::string> feature_names = indicator_names();
  std::vector<std::string> patent_ids;
  Matrix rows{0, kIndicatorCount};
  Targets labels;  // 1 = VP, 0 = NVP

  std::size_t size() const noexcept { return patent_ids.size(); }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

struct ExtractionResult {
  FeatureMatrix matrix;
  std::size_t vp = 0, nvp = 0, excluded = 0;
  std::vector<std::string> warnings;
};

inline ExtractionResult compute_all(const std::vector<PatentRecord>& corpus, const CorpusIndex& index,
                                    const FieldConfig& cfg, const SemanticSimilarity& similarity,
                                    const LabelPolicy& policy = {}) {
  if (cfg.ipc_level != index.level()) throw ConfigError("index was built at a different ipc_level");
  std::vector<const PatentRecord*> labeled;
  ExtractionResult out;
  for (const auto& r : corpus) {
    switch (derive_label(r, policy)) {
      case Label::kVp: ++out.vp; labeled.push_back(&r); break;
      case Label::kNvp: ++out.nvp; labeled.push_back(&r); break;
      case Label::kExcluded: ++out.excluded; break;
    }
  }
  std::sort(labeled.begin(), labeled.end(), [](auto* a, auto* b) { return a->patent_id < b->patent_id; });
  for (const auto* r : labeled) {
    std::array<double, kIndicatorCount> row;
    try {
      row = compute_indicators(*r, index, cfg, similarity).flatten();
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.rfind("patent " + r->patent_id, 0) == 0) throw;
      throw DataError("patent " + r->patent_id + ": " + msg);
    }
    out.matrix.patent_ids.push_back(r->patent_id);
    out.matrix.rows.append_row(row);
    out.matrix.labels.push_back(derive_label(*r, policy) == Label::kVp ? 1 : 0);
  }
  if (labeled.empty()) out.warnings.push_back("no VP/NVP patents in corpus: feature matrix is empty");
  return out;
}

}  // namespace techval
