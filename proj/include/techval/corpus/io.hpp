#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "techval/core/csv.hpp"
#include "techval/core/fs.hpp"
#include "techval/corpus/record.hpp"

namespace techval {

enum class CorpusFormat { kJsonl, kCsvBundle };

inline CorpusFormat parse_corpus_format(std::string_view s) {
  if (s == "jsonl") return CorpusFormat::kJsonl;
  if (s == "csv-bundle") return CorpusFormat::kCsvBundle;
  throw ConfigError("unknown corpus format '" + std::string(s) + "' (expected jsonl or csv-bundle)");
}

inline std::string_view to_string(CorpusFormat f) { return f == CorpusFormat::kJsonl ? "jsonl" : "csv-bundle"; }

struct Diagnostic {
  std::string source;  // file name
  std::size_t line = 0;
  std::string message;
};

struct CorpusParseResult {
  std::vector<PatentRecord> records;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

using nlohmann::json;

inline const json* find_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

inline const json& require_field(const json& obj, const char* key) {
  const json* f = find_field(obj, key);
  if (!f) throw ParseError(std::string("missing field '") + key + "'");
  return *f;
}

inline std::string get_string(const json& obj, const char* key) {
  const json& f = require_field(obj, key);
  if (!f.is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return f.get<std::string>();
}

inline int get_count(const json& obj, const char* key, bool required = true) {
  const json* f = find_field(obj, key);
  if (!f) {
    if (required) throw ParseError(std::string("missing field '") + key + "'");
    return 0;
  }
  if (!f->is_number_integer()) throw ParseError(std::string("field '") + key + "' must be an integer");
  const auto v = f->get<long long>();
  if (v < 0) throw ParseError(std::string("field '") + key + "' must be nonnegative");
  return static_cast<int>(v);
}

inline const json& get_array(const json& obj, const char* key, const json& empty) {
  const json* f = find_field(obj, key);
  if (!f) return empty;
  if (!f->is_array()) throw ParseError(std::string("field '") + key + "' must be a list");
  return *f;
}

inline Party party_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("party entries must be objects");
  Party p;
  p.name = canonical_name(get_string(j, "name"));
  if (const json* c = find_field(j, "country")) p.country = canonical_country(c->get<std::string>());
  if (find_field(j, "overdue_fee_count")) p.overdue_fee_count = get_count(j, "overdue_fee_count");
  return p;
}

inline std::optional<Lifetime> lifetime_from_json(const json& obj) {
  const json* f = find_field(obj, "lifetime_years");
  if (!f) return std::nullopt;
  if (f->is_string()) {
    if (f->get<std::string>() == "max") return Lifetime::max();
    throw ParseError("lifetime_years must be an integer or \"max\"");
  }
  if (!f->is_number_integer()) throw ParseError("lifetime_years must be an integer or \"max\"");
  return Lifetime::of_years(f->get<int>());
}

inline std::vector<std::string> string_list(const json& arr, const char* what) {
  std::vector<std::string> out;
  for (const auto& e : arr) {
    if (!e.is_string()) throw ParseError(std::string(what) + " entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline nlohmann::ordered_json party_to_json(const Party& p) {
  nlohmann::ordered_json j;
  j["name"] = p.name;
  j["country"] = p.country;
  j["overdue_fee_count"] = p.overdue_fee_count ? nlohmann::ordered_json(*p.overdue_fee_count) : nullptr;
  return j;
}

}  // namespace detail

/// Builds a validated record from one JSON object; throws ParseError.
inline PatentRecord record_from_json(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw ParseError("record must be a JSON object");
  static const json kEmpty = json::array();
  PatentRecord r;
  r.patent_id = get_string(j, "patent_id");
  r.filing_date = Date::parse(get_string(j, "filing_date"));
  r.grant_date = Date::parse(get_string(j, "grant_date"));
  if (find_field(j, "title")) r.title = get_string(j, "title");
  r.abstract_word_count = get_count(j, "abstract_word_count");
  r.fulltext_word_count = get_count(j, "fulltext_word_count");
  for (const auto& c : get_array(j, "claims", kEmpty)) {
    Claim claim;
    claim.is_independent = require_field(c, "is_independent").get<bool>();
    claim.word_count = get_count(c, "word_count");
    r.claims.push_back(claim);
  }
  r.ipcs = string_list(get_array(j, "ipcs", kEmpty), "ipcs");
  for (const auto& p : get_array(j, "assignees", kEmpty)) r.assignees.push_back(party_from_json(p));
  for (const auto& p : get_array(j, "inventors", kEmpty)) r.inventors.push_back(party_from_json(p));
  for (const auto& c : get_array(j, "backward_citations", kEmpty)) {
    CitationRef ref;
    ref.cited_id = get_string(c, "cited_id");
    if (const json* f = find_field(c, "cited_country")) ref.cited_country = canonical_country(f->get<std::string>());
    if (find_field(c, "cited_filing_date")) ref.cited_filing_date = Date::parse(get_string(c, "cited_filing_date"));
    ref.cited_ipcs = string_list(get_array(c, "cited_ipcs", kEmpty), "cited_ipcs");
    if (find_field(c, "cited_title")) ref.cited_title = get_string(c, "cited_title");
    r.backward_citations.push_back(std::move(ref));
  }
  r.npl_citation_count = get_count(j, "npl_citation_count", false);
  for (const auto& p : get_array(j, "priorities", kEmpty)) {
    PriorityRef pr;
    pr.priority_id = get_string(p, "priority_id");
    if (const json* f = find_field(p, "country")) pr.country = canonical_country(f->get<std::string>());
    r.priorities.push_back(std::move(pr));
  }
  for (const auto& e : get_array(j, "maintenance_events", kEmpty)) {
    MaintenanceEvent ev;
    ev.event_year_offset = static_cast<int>(require_field(e, "event_year_offset").get<long long>());
    if (const json* f = find_field(e, "paid")) ev.paid = f->get<bool>();
    if (const json* f = find_field(e, "surcharge")) ev.surcharge = f->get<bool>();
    r.maintenance_events.push_back(ev);
  }
  r.lifetime_years = lifetime_from_json(j);
  validate(r);
  return r;
}

inline nlohmann::ordered_json record_to_json(const PatentRecord& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["patent_id"] = r.patent_id;
  j["filing_date"] = r.filing_date.to_string();
  j["grant_date"] = r.grant_date.to_string();
  j["title"] = r.title;
  j["abstract_word_count"] = r.abstract_word_count;
  j["fulltext_word_count"] = r.fulltext_word_count;
  j["claims"] = ordered_json::array();
  for (const auto& c : r.claims) {
    j["claims"].push_back(ordered_json{{"is_independent", c.is_independent}, {"word_count", c.word_count}});
  }
  j["ipcs"] = r.ipcs;
  j["assignees"] = ordered_json::array();
  for (const auto& p : r.assignees) j["assignees"].push_back(detail::party_to_json(p));
  j["inventors"] = ordered_json::array();
  for (const auto& p : r.inventors) j["inventors"].push_back(detail::party_to_json(p));
  j["backward_citations"] = ordered_json::array();
  for (const auto& c : r.backward_citations) {
    ordered_json cj;
    cj["cited_id"] = c.cited_id;
    cj["cited_country"] = c.cited_country;
    cj["cited_filing_date"] = c.cited_filing_date ? ordered_json(c.cited_filing_date->to_string()) : nullptr;
    cj["cited_ipcs"] = c.cited_ipcs;
    cj["cited_title"] = c.cited_title ? ordered_json(*c.cited_title) : nullptr;
    j["backward_citations"].push_back(std::move(cj));
  }
  j["npl_citation_count"] = r.npl_citation_count;
  j["priorities"] = ordered_json::array();
  for (const auto& p : r.priorities) {
    j["priorities"].push_back(ordered_json{{"priority_id", p.priority_id}, {"country", p.country}});
  }
  j["maintenance_events"] = ordered_json::array();
  for (const auto& e : r.maintenance_events) {
    j["maintenance_events"].push_back(
        ordered_json{{"event_year_offset", e.event_year_offset}, {"paid", e.paid}, {"surcharge", e.surcharge}});
  }
  if (!r.lifetime_years) {
    j["lifetime_years"] = nullptr;
  } else if (r.lifetime_years->is_max) {
    j["lifetime_years"] = "max";
  } else {
    j["lifetime_years"] = r.lifetime_years->years;
  }
  return j;
}

/// Canonical corpus text: one record per line, sorted by patent_id.
inline std::string emit_canonical_jsonl(std::vector<PatentRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const PatentRecord& a, const PatentRecord& b) { return a.patent_id < b.patent_id; });
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

namespace detail {

inline void check_duplicates(const std::vector<PatentRecord>& records) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.patent_id).second) throw DataError("duplicate patent_id '" + r.patent_id + "' in corpus");
  }
}

inline void report(CorpusParseResult& result, Diagnostic d, bool strict) {
  if (strict) {
    throw ParseError(d.source + ":" + std::to_string(d.line) + ": " + d.message);
  }
  result.diagnostics.push_back(std::move(d));
}

}  // namespace detail

inline CorpusParseResult parse_jsonl(std::istream& in, const std::string& source, bool strict = false) {
  CorpusParseResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      result.records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      detail::report(result, {source, lineno, std::string("malformed JSON: ") + e.what()}, strict);
    } catch (const ParseError& e) {
      detail::report(result, {source, lineno, e.what()}, strict);
    }
  }
  detail::check_duplicates(result.records);
  return result;
}

namespace detail {

// Column dictionary for the CSV bundle lives in docs/csv_bundle.md.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<csv::Row> rows;
  std::string source;

  std::size_t column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(source + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline std::optional<CsvTable> load_table(const fs::path& path, bool required) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (required) throw IoError("cannot read file: " + path.string());
    return std::nullopt;
  }
  CsvTable t;
  t.source = path.filename().string();
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return t;
  t.header = header->fields;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && trim(row->fields[0]).empty()) continue;
    t.rows.push_back(std::move(*row));
  }
  return t;
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto& part : split(s, ';')) {
    auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "1" || s == "true" || s == "TRUE" || s == "True") return true;
  if (s == "0" || s == "false" || s == "FALSE" || s == "False" || s.empty()) return false;
  throw ParseError("not a boolean: '" + std::string(s) + "'");
}

inline int parse_count(std::string_view s) {
  s = trim(s);
  if (s.empty()) return 0;
  const auto v = parse_int(s);
  if (v < 0) throw ParseError("negative count '" + std::string(s) + "'");
  return static_cast<int>(v);
}

}  // namespace detail

/// Reads a CSV bundle directory: patents.csv plus optional claims.csv,
/// citations.csv, parties.csv, priorities.csv and maintenance.csv keyed by
/// patent_id. Side rows referencing unknown or skipped patents are reported.
inline CorpusParseResult parse_csv_bundle(const fs::path& dir, bool strict = false) {
  using namespace detail;
  CorpusParseResult result;
  auto main = load_table(dir / "patents.csv", true);
  std::map<std::string, PatentRecord> staged;
  std::vector<std::string> order;
  std::map<std::string, std::size_t> line_of;

  const auto c_id = main->column("patent_id");
  const auto c_filing = main->column("filing_date");
  const auto c_grant = main->column("grant_date");
  const auto c_title = main->column("title");
  const auto c_abs = main->column("abstract_word_count");
  const auto c_full = main->column("fulltext_word_count");
  const auto c_ipcs = main->column("ipcs");
  const auto c_npl = main->column("npl_citation_count");
  const auto c_life = main->column("lifetime_years");
  std::set<std::string> bad_ids;
  for (const auto& row : main->rows) {
    try {
      if (row.fields.size() != main->header.size()) throw ParseError("wrong number of columns");
      PatentRecord r;
      r.patent_id = std::string(trim(row.fields[c_id]));
      if (r.patent_id.empty()) throw ParseError("empty patent_id");
      if (trim(row.fields[c_filing]).empty()) throw ParseError("missing field 'filing_date'");
      if (trim(row.fields[c_grant]).empty()) throw ParseError("missing field 'grant_date'");
      r.filing_date = Date::parse(row.fields[c_filing]);
      r.grant_date = Date::parse(row.fields[c_grant]);
      r.title = row.fields[c_title];
      r.abstract_word_count = parse_count(row.fields[c_abs]);
      r.fulltext_word_count = parse_count(row.fields[c_full]);
      r.ipcs = split_list(row.fields[c_ipcs]);
      r.npl_citation_count = parse_count(row.fields[c_npl]);
      const auto life = trim(row.fields[c_life]);
      if (life == "max") {
        r.lifetime_years = Lifetime::max();
      } else if (!life.empty()) {
        r.lifetime_years = Lifetime::of_years(static_cast<int>(parse_int(life)));
      }
      if (staged.count(r.patent_id)) throw DataError("duplicate patent_id '" + r.patent_id + "' in corpus");
      line_of[r.patent_id] = row.line;
      order.push_back(r.patent_id);
      staged.emplace(r.patent_id, std::move(r));
    } catch (const ParseError& e) {
      if (row.fields.size() > c_id) bad_ids.insert(std::string(trim(row.fields[c_id])));
      report(result, {main->source, row.line, e.what()}, strict);
    }
  }

  auto side = [&](const char* file, auto&& apply) {
    auto table = load_table(dir / file, false);
    if (!table || table->header.empty()) return;
    const auto id_col = table->column("patent_id");
    for (const auto& row : table->rows) {
      try {
        if (row.fields.size() != table->header.size()) throw ParseError("wrong number of columns");
        const std::string id(trim(row.fields[id_col]));
        auto it = staged.find(id);
        if (it == staged.end()) {
          if (bad_ids.count(id)) continue;
          throw ParseError("unknown patent_id '" + id + "'");
        }
        apply(*table, row, it->second);
      } catch (const ParseError& e) {
        report(result, {table->source, row.line, e.what()}, strict);
      }
    }
  };

  side("claims.csv", [](const CsvTable& t, const csv::Row& row, PatentRecord& r) {
    Claim c;
    c.is_independent = parse_bool(row.fields[t.column("is_independent")]);
    c.word_count = parse_count(row.fields[t.column("word_count")]);
    r.claims.push_back(c);
  });
  side("citations.csv", [](const CsvTable& t, const csv::Row& row, PatentRecord& r) {
    CitationRef c;
    c.cited_id = std::string(trim(row.fields[t.column("cited_id")]));
    c.cited_country = canonical_country(row.fields[t.column("cited_country")]);
    const auto d = trim(row.fields[t.column("cited_filing_date")]);
    if (!d.empty()) c.cited_filing_date = Date::parse(d);
    c.cited_ipcs = split_list(row.fields[t.column("cited_ipcs")]);
    const auto& title = row.fields[t.column("cited_title")];
    if (!title.empty()) c.cited_title = title;
    r.backward_citations.push_back(std::move(c));
  });
  side("parties.csv", [](const CsvTable& t, const csv::Row& row, PatentRecord& r) {
    Party p;
    p.name = canonical_name(row.fields[t.column("name")]);
    p.country = canonical_country(row.fields[t.column("country")]);
    const auto overdue = trim(row.fields[t.column("overdue_fee_count")]);
    if (!overdue.empty()) p.overdue_fee_count = parse_count(overdue);
    const auto role = trim(row.fields[t.column("role")]);
    if (role == "assignee") {
      r.assignees.push_back(std::move(p));
    } else if (role == "inventor") {
      r.inventors.push_back(std::move(p));
    } else {
      throw ParseError("party role must be 'assignee' or 'inventor'");
    }
  });
  side("priorities.csv", [](const CsvTable& t, const csv::Row& row, PatentRecord& r) {
    r.priorities.push_back({std::string(trim(row.fields[t.column("priority_id")])),
                            canonical_country(row.fields[t.column("country")])});
  });
  side("maintenance.csv", [](const CsvTable& t, const csv::Row& row, PatentRecord& r) {
    MaintenanceEvent e;
    e.event_year_offset = parse_count(row.fields[t.column("event_year_offset")]);
    e.paid = parse_bool(row.fields[t.column("paid")]);
    e.surcharge = parse_bool(row.fields[t.column("surcharge")]);
    r.maintenance_events.push_back(e);
  });

  for (const auto& id : order) {
    auto& r = staged.at(id);
    try {
      validate(r);
      result.records.push_back(std::move(r));
    } catch (const ParseError& e) {
      report(result, {main->source, line_of.at(id), e.what()}, strict);
    }
  }
  return result;
}

/// Reads a corpus from disk. Malformed rows become diagnostics (fatal when
/// strict); duplicate patent ids are always fatal.
inline CorpusParseResult parse_corpus(const fs::path& path, CorpusFormat format, bool strict = false) {
  if (format == CorpusFormat::kCsvBundle) {
    if (!fs::is_directory(path)) throw IoError("csv-bundle corpus must be a directory: " + path.string());
    return parse_csv_bundle(path, strict);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read corpus file: " + path.string());
  return parse_jsonl(in, path.filename().string(), strict);
}

}  // namespace techval
