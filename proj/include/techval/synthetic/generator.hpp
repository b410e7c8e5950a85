#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "techval/core/random.hpp"
#include "techval/corpus/record.hpp"

namespace techval {

/// Random patent corpus whose VP/NVP label depends on two planted
/// indicators, SC_1 (full-text word count) and PK_1 (non-patent citation
/// count). Everything else is drawn independently of the label.
struct SyntheticOptions {
  std::size_t n = 2000;
  double nvp_share = 12639.0 / (12639.0 + 34334.0);  // among labeled patents
  double excluded_share = 0.03;
  double label_noise = 0.02;  // probability a label is flipped
  std::uint64_t seed = 1;
};

inline const std::vector<std::string>& planted_indicators() {
  static const std::vector<std::string> names{"SC_1", "PK_1"};
  return names;
}

namespace synth {

inline const std::vector<std::string> kWords = {
    "semiconductor", "device", "gate", "electrode", "substrate", "layer",    "transistor", "memory",
    "cell",          "method", "forming", "dielectric", "channel", "region", "wafer",      "etching",
    "package",       "bonding", "circuit", "capacitor", "trench", "isolation", "silicon",  "nitride",
    "oxide",         "metal",  "contact", "interconnect", "light", "emitting", "diode",     "laser",
    "thin",          "film",   "annealing", "doping",  "implant", "structure", "array",    "sensor"};

inline const std::vector<std::string> kIpcs = {"H01L21/02", "H01L21/768", "H01L27/115", "H01L29/78", "H01L33/00",
                                               "H01L23/48", "G11C11/40", "G06F17/50",  "H01S5/00",  "C23C16/44",
                                               "B82Y10/00", "H05K1/02"};

inline const std::vector<std::string> kCountries = {"US", "JP", "KR", "DE", "TW", "CN", "FR"};

inline std::string pick(Rng& rng, const std::vector<std::string>& v) { return v[rng.index(v.size())]; }

inline std::string title(Rng& rng) {
  const auto n = 3 + rng.index(4);
  std::string t;
  for (std::size_t i = 0; i < n; ++i) t += (i ? " " : "") + pick(rng, kWords);
  return t;
}

inline std::string padded(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

}  // namespace synth

inline std::vector<PatentRecord> generate_synthetic(const SyntheticOptions& opt) {
  if (opt.n == 0) throw ConfigError("synthetic corpus size must be positive");
  if (!(opt.nvp_share > 0.0 && opt.nvp_share < 1.0)) throw ConfigError("nvp_share must be in (0, 1)");
  using namespace synth;
  Rng rng(derive_seed(opt.seed, "synthetic"));
  std::vector<PatentRecord> out;
  std::vector<double> score;
  for (std::size_t i = 0; i < opt.n; ++i) {
    PatentRecord r;
    r.patent_id = padded("SYN", i + 1);
    const int year = 2001 + static_cast<int>(rng.index(10));
    r.grant_date = Date::from_ymd(year, 1 + static_cast<unsigned>(rng.index(12)), 1 + static_cast<unsigned>(rng.index(28)));
    r.filing_date = r.grant_date.plus_days(-(300 + static_cast<int>(rng.index(1200))));
    r.title = title(rng);
    r.abstract_word_count = 50 + static_cast<int>(rng.index(150));

    r.fulltext_word_count = std::max(200, static_cast<int>(std::lround(6000.0 + 2000.0 * rng.normal())));
    r.npl_citation_count = std::max(0, static_cast<int>(std::lround(8.0 + 4.0 * rng.normal())));
    score.push_back((r.fulltext_word_count - 6000.0) / 2000.0 + (r.npl_citation_count - 8.0) / 4.0);

    const auto n_claims = 1 + rng.index(25);
    const auto n_indep = 1 + rng.index(std::min<std::size_t>(n_claims, 4));
    for (std::size_t c = 0; c < n_claims; ++c) {
      r.claims.push_back({c < n_indep, 10 + static_cast<int>(rng.index(c < n_indep ? 200 : 60))});
    }
    const auto n_ipc = 1 + rng.index(3);
    for (std::size_t c = 0; c < n_ipc; ++c) {
      // H01L dominates so the focal field is populated.
      r.ipcs.push_back(rng.bernoulli(0.6) ? kIpcs[rng.index(6)] : pick(rng, kIpcs));
    }
    const auto n_asg = 1 + rng.index(2);
    for (std::size_t c = 0; c < n_asg; ++c) {
      const auto k = rng.index(80);
      std::optional<int> overdue;
      if (rng.bernoulli(0.8)) overdue = static_cast<int>(rng.index(4));
      r.assignees.push_back({"company " + std::to_string(k), kCountries[k % kCountries.size()], overdue});
    }
    const auto n_inv = 1 + rng.index(5);
    for (std::size_t c = 0; c < n_inv; ++c) {
      const auto k = rng.index(400);
      r.inventors.push_back({"inventor " + std::to_string(k), kCountries[(k / 3) % kCountries.size()], std::nullopt});
    }
    const auto n_cit = rng.index(13);
    for (std::size_t c = 0; c < n_cit; ++c) {
      CitationRef ref;
      ref.cited_id = padded("C", rng.index(20000));
      ref.cited_country = pick(rng, kCountries);
      ref.cited_filing_date = r.filing_date.plus_days(-(30 + static_cast<int>(rng.index(3000))));
      const auto n_cipc = 1 + rng.index(2);
      for (std::size_t d = 0; d < n_cipc; ++d) ref.cited_ipcs.push_back(pick(rng, kIpcs));
      if (rng.bernoulli(0.8)) ref.cited_title = title(rng);
      r.backward_citations.push_back(std::move(ref));
    }
    const auto n_pri = rng.index(4);
    for (std::size_t c = 0; c < n_pri; ++c) {
      r.priorities.push_back({r.patent_id + "-P" + std::to_string(c + 1), pick(rng, kCountries)});
    }
    out.push_back(std::move(r));
  }

  // Excluded patents are chosen first; the label threshold is the nvp_share
  // quantile of the planted score over the rest.
  std::vector<bool> excluded(opt.n, false);
  std::vector<double> labeled_scores;
  for (std::size_t i = 0; i < opt.n; ++i) {
    excluded[i] = rng.bernoulli(opt.excluded_share);
    if (!excluded[i]) labeled_scores.push_back(score[i]);
  }
  std::sort(labeled_scores.begin(), labeled_scores.end());
  const double threshold =
      labeled_scores.empty()
          ? 0.0
          : labeled_scores[std::min(labeled_scores.size() - 1,
                                    static_cast<std::size_t>(opt.nvp_share * static_cast<double>(labeled_scores.size())))];
  for (std::size_t i = 0; i < opt.n; ++i) {
    auto& r = out[i];
    if (excluded[i]) {
      const int years = rng.bernoulli(0.5) ? 8 : 12;
      r.lifetime_years = Lifetime::of_years(years);
      for (int off = 4; off <= years; off += 4) r.maintenance_events.push_back({off, off < years, false});
      continue;
    }
    bool vp = score[i] >= threshold;
    if (rng.bernoulli(opt.label_noise)) vp = !vp;
    if (vp) {
      r.lifetime_years = Lifetime::max();
      for (int off : {4, 8, 12}) r.maintenance_events.push_back({off, true, rng.bernoulli(0.1)});
    } else {
      r.lifetime_years = Lifetime::of_years(4);
      r.maintenance_events.push_back({4, false, false});
    }
  }
  return out;
}

}  // namespace techval
