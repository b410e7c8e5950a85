#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "techval/attribution/shapley.hpp"
#include "techval/core/common.hpp"

namespace techval {

struct FeatureStats {
  std::vector<double> mean_abs_phi;
  std::vector<double> sign_stat;     // Pearson correlation of feature value and phi
  std::vector<std::size_t> ranking;  // by mean |phi| desc, ties by feature index
};

struct BinSummary {
  double lower = 0.0, upper = 0.0;
  std::size_t count = 0;
  bool empty = true;
  FeatureStats stats;
};

struct PlotPoint {
  std::size_t instance = 0, feature = 0;
  double value_percentile = 0.0, phi = 0.0;
};

struct GlobalSummary {
  std::size_t count = 0;
  FeatureStats stats;
  std::vector<PlotPoint> points;
};

inline const std::vector<double>& default_confidence_edges() {
  static const std::vector<double> edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  return edges;
}

/// Statistics over the listed instances; `values` holds each instance's
/// feature row, aligned with `attrs`.
inline FeatureStats feature_stats(const std::vector<Attribution>& attrs, const Matrix& values,
                                  const std::vector<std::size_t>& rows) {
  const std::size_t m = values.cols();
  FeatureStats s;
  s.mean_abs_phi.assign(m, 0.0);
  s.sign_stat.assign(m, 0.0);
  std::vector<double> v(rows.size()), p(rows.size());
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      v[k] = values(rows[k], c);
      p[k] = attrs[rows[k]].phi[c];
      s.mean_abs_phi[c] += std::abs(p[k]);
    }
    if (!rows.empty()) s.mean_abs_phi[c] /= static_cast<double>(rows.size());
    s.sign_stat[c] = pearson(v, p);
  }
  s.ranking.resize(m);
  std::iota(s.ranking.begin(), s.ranking.end(), std::size_t{0});
  std::stable_sort(s.ranking.begin(), s.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return s.mean_abs_phi[a] > s.mean_abs_phi[b]; });
  return s;
}

/// Bin j covers (edges[j], edges[j+1]]; the first bin also takes edges[0].
inline std::size_t edge_bin(double p, const std::vector<double>& edges) {
  for (std::size_t j = 1; j + 1 < edges.size(); ++j) {
    if (p <= edges[j]) return j - 1;
  }
  return edges.size() - 2;
}

inline std::vector<BinSummary> bin_attributions(const std::vector<Attribution>& attrs, const Matrix& values,
                                                const std::vector<double>& edges = default_confidence_edges()) {
  if (edges.size() < 2 || edges.front() != 0.0 || edges.back() != 1.0 ||
      !std::is_sorted(edges.begin(), edges.end(), std::less_equal<>())) {
    throw ConfigError("confidence bin edges must increase strictly from 0 to 1");
  }
  if (values.rows() != attrs.size()) throw DataError("attribution and feature rows differ in count");
  std::vector<std::vector<std::size_t>> members(edges.size() - 1);
  for (std::size_t i = 0; i < attrs.size(); ++i) members[edge_bin(attrs[i].confidence, edges)].push_back(i);
  std::vector<BinSummary> out;
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    BinSummary b;
    b.lower = edges[j];
    b.upper = edges[j + 1];
    b.count = members[j].size();
    b.empty = members[j].empty();
    b.stats = feature_stats(attrs, values, members[j]);
    out.push_back(std::move(b));
  }
  return out;
}

/// Mid-rank percentile of every value within its column, in [0, 1].
inline Matrix value_percentiles(const Matrix& values) {
  Matrix out(values.rows(), values.cols(), 0.5);
  const std::size_t n = values.rows();
  if (n < 2) return out;
  std::vector<std::size_t> idx(n);
  for (std::size_t c = 0; c < values.cols(); ++c) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values(a, c) < values(b, c); });
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && values(idx[j], c) == values(idx[i], c)) ++j;
      const double rank = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0;
      for (std::size_t k = i; k < j; ++k) out(idx[k], c) = rank / static_cast<double>(n - 1);
      i = j;
    }
  }
  return out;
}

inline GlobalSummary global_summary(const std::vector<Attribution>& attrs, const Matrix& values) {
  if (attrs.empty()) throw DataError("global summary needs at least one attribution");
  if (values.rows() != attrs.size()) throw DataError("attribution and feature rows differ in count");
  GlobalSummary g;
  g.count = attrs.size();
  std::vector<std::size_t> all(attrs.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  g.stats = feature_stats(attrs, values, all);
  const auto pct = value_percentiles(values);
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    for (std::size_t c = 0; c < values.cols(); ++c) g.points.push_back({i, c, pct(i, c), attrs[i].phi[c]});
  }
  return g;
}

}  // namespace techval
