#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "techval/core/fs.hpp"
#include "techval/corpus/record.hpp"

namespace techval {

/// Lowercased alphanumeric word tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

/// Corpus-level TF-IDF over title tokens. Term weight = raw count x
/// (ln((1 + N) / (1 + df)) + 1); similarity is the cosine of weight vectors.
class TfidfModel {
 public:
  TfidfModel() = default;

  /// Documents are every record title plus every distinct (cited_id,
  /// cited_title) pair, so the vocabulary does not depend on record order.
  static TfidfModel fit(const std::vector<PatentRecord>& corpus) {
    std::vector<std::string_view> docs;
    std::set<std::pair<std::string_view, std::string_view>> cited;
    for (const auto& r : corpus) {
      docs.emplace_back(r.title);
      for (const auto& c : r.backward_citations) {
        if (c.cited_title) cited.emplace(c.cited_id, *c.cited_title);
      }
    }
    for (const auto& [id, title] : cited) docs.push_back(title);
    return fit_documents(docs);
  }

  static TfidfModel fit_documents(const std::vector<std::string_view>& docs) {
    TfidfModel m;
    m.n_docs_ = docs.size();
    for (auto d : docs) {
      auto toks = tokenize(d);
      std::set<std::string> uniq(toks.begin(), toks.end());
      for (const auto& t : uniq) ++m.df_[t];
    }
    return m;
  }

  double idf(const std::string& term) const {
    auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + df)) + 1.0;
  }

  std::map<std::string, double> weights(std::string_view text) const {
    std::map<std::string, double> w;
    for (auto& t : tokenize(text)) w[t] += 1.0;
    for (auto& [term, v] : w) v *= idf(term);
    return w;
  }

  /// Cosine similarity in [0, 1]; 0 when either side has no tokens.
  double cosine(std::string_view a, std::string_view b) const {
    const auto wa = weights(a);
    const auto wb = weights(b);
    if (wa.empty() || wb.empty()) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [t, v] : wa) {
      na += v * v;
      auto it = wb.find(t);
      if (it != wb.end()) dot += v * it->second;
    }
    for (const auto& [t, v] : wb) nb += v * v;
    return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
  }

 private:
  std::size_t n_docs_ = 0;
  std::unordered_map<std::string, int> df_;
};

/// Precomputed unit-norm title embeddings keyed by patent id. File format:
/// one "patent_id, d, v1, ..., vd" line per patent, d constant per file.
class EmbeddingTable {
 public:
  static EmbeddingTable load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read embedding file: " + path.string());
    return parse(in, path.filename().string());
  }

  static EmbeddingTable parse(std::istream& in, const std::string& source = "embeddings") {
    EmbeddingTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto where = source + ":" + std::to_string(lineno) + ": ";
      auto parts = split(line, ',');
      if (parts.size() < 2) throw ParseError(where + "expected 'patent_id, d, v1..vd'");
      std::string id(trim(parts[0]));
      long long d;
      try {
        d = parse_int(trim(parts[1]));
      } catch (const ParseError&) {
        throw ParseError(where + "dimension is not an integer");
      }
      if (d < 1 || static_cast<std::size_t>(d) + 2 != parts.size()) {
        throw ParseError(where + "dimension does not match the number of values");
      }
      if (t.dim_ != 0 && static_cast<std::size_t>(d) != t.dim_) throw ParseError(where + "inconsistent dimension");
      t.dim_ = static_cast<std::size_t>(d);
      std::vector<double> v;
      double norm2 = 0.0;
      for (std::size_t i = 2; i < parts.size(); ++i) {
        v.push_back(parse_double(trim(parts[i])));
        norm2 += v.back() * v.back();
      }
      if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6) throw ParseError(where + "vector is not unit-norm");
      if (!t.vectors_.emplace(id, std::move(v)).second) throw ParseError(where + "duplicate patent_id " + id);
    }
    return t;
  }

  const std::vector<double>& at(const std::string& id) const {
    auto it = vectors_.find(id);
    if (it == vectors_.end()) throw DataError("no embedding for patent_id '" + id + "'");
    return it->second;
  }

  double cosine(const std::string& a, const std::string& b) const {
    const auto& va = at(a);
    const auto& vb = at(b);
    double dot = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) dot += va[i] * vb[i];
    return std::clamp(dot, -1.0, 1.0);
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

enum class EmbeddingSource { kExternalFile, kLexicalFallback };

inline std::string_view to_string(EmbeddingSource s) {
  return s == EmbeddingSource::kExternalFile ? "external-file" : "lexical-fallback";
}

inline EmbeddingSource parse_embedding_source(std::string_view s) {
  if (s == "external-file") return EmbeddingSource::kExternalFile;
  if (s == "lexical-fallback") return EmbeddingSource::kLexicalFallback;
  throw ConfigError("unknown embedding_source '" + std::string(s) + "'");
}

/// Title similarity between a patent and its prior patents, backed either by
/// an embedding table or by the lexical TF-IDF fallback.
class SemanticSimilarity {
 public:
  static SemanticSimilarity lexical(const std::vector<PatentRecord>& corpus) {
    SemanticSimilarity s;
    s.source_ = EmbeddingSource::kLexicalFallback;
    s.tfidf_ = TfidfModel::fit(corpus);
    return s;
  }

  static SemanticSimilarity external(EmbeddingTable table) {
    SemanticSimilarity s;
    s.source_ = EmbeddingSource::kExternalFile;
    s.table_ = std::move(table);
    return s;
  }

  EmbeddingSource source() const noexcept { return source_; }

  /// Mean similarity between the record and its backward citations; 0 when
  /// nothing is comparable. Lexical mode skips citations without titles.
  double mean_to_citations(const PatentRecord& r) const {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : r.backward_citations) {
      if (source_ == EmbeddingSource::kExternalFile) {
        sum += table_.cosine(r.patent_id, c.cited_id);
        ++n;
      } else if (c.cited_title) {
        sum += tfidf_.cosine(r.title, *c.cited_title);
        ++n;
      }
    }
    return n == 0 ? 0.0 : sum / n;
  }

  const TfidfModel& tfidf() const noexcept { return tfidf_; }

 private:
  EmbeddingSource source_ = EmbeddingSource::kLexicalFallback;
  TfidfModel tfidf_;
  EmbeddingTable table_;
};

}  // namespace techval
