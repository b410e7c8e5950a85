#pragma once

#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/core/random.hpp"

namespace techval {

/// Batch model: one output per row.
using BatchModel = std::function<std::vector<double>(const Matrix&)>;

struct Attribution {
  std::string patent_id;
  double phi0 = 0.0;         // expected output over the background
  std::vector<double> phi;   // one per feature
  double model_output = 0.0;
  double confidence = 0.0;   // predicted VP probability

  friend bool operator==(const Attribution&, const Attribution&) = default;
};

/// Up to `size` rows drawn without replacement from `rows`.
inline Matrix sample_background(const Matrix& rows, std::size_t size, std::uint64_t seed) {
  if (rows.empty()) throw DataError("background set needs at least one training row");
  std::vector<std::size_t> idx(rows.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (size < idx.size()) {
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(size);
    std::sort(idx.begin(), idx.end());
  }
  return rows.select_rows(idx);
}

namespace detail {

/// Interventional coalition values: every background row with the features
/// flagged in `mask` (one mask per coalition) replaced by x's values.
/// Returns the mean model output per coalition.
inline std::vector<double> coalition_values(const BatchModel& f, std::span<const double> x, const Matrix& background,
                                            const std::vector<std::vector<char>>& masks) {
  const std::size_t b = background.rows(), m = x.size();
  Matrix batch(masks.size() * b, m);
  for (std::size_t s = 0; s < masks.size(); ++s) {
    for (std::size_t r = 0; r < b; ++r) {
      auto dst = batch.row(s * b + r);
      const auto src = background.row(r);
      for (std::size_t c = 0; c < m; ++c) dst[c] = masks[s][c] ? x[c] : src[c];
    }
  }
  const auto out = f(batch);
  std::vector<double> values(masks.size(), 0.0);
  for (std::size_t s = 0; s < masks.size(); ++s) {
    double sum = 0.0;
    for (std::size_t r = 0; r < b; ++r) sum += out[s * b + r];
    values[s] = sum / static_cast<double>(b);
  }
  return values;
}

inline void check_inputs(std::span<const double> x, const Matrix& background) {
  if (background.empty()) throw DataError("background set is empty");
  if (background.cols() != x.size()) throw DataError("background width differs from the instance width");
}

}  // namespace detail

/// Exact Shapley values by enumerating all 2^M coalitions.
inline Attribution exact_shapley(const BatchModel& f, std::span<const double> x, const Matrix& background,
                                 std::size_t max_features = 20) {
  detail::check_inputs(x, background);
  const std::size_t m = x.size();
  if (m > max_features) {
    throw ConfigError("exact Shapley over " + std::to_string(m) + " features exceeds the limit of " +
                      std::to_string(max_features) + "; use sampled mode");
  }
  const std::size_t n_sets = std::size_t{1} << m;
  std::vector<double> v(n_sets);
  // Evaluate coalitions in chunks to bound memory.
  const std::size_t chunk = std::max<std::size_t>(1, 65536 / background.rows());
  for (std::size_t start = 0; start < n_sets; start += chunk) {
    const std::size_t end = std::min(n_sets, start + chunk);
    std::vector<std::vector<char>> masks;
    for (std::size_t s = start; s < end; ++s) {
      std::vector<char> mask(m);
      for (std::size_t c = 0; c < m; ++c) mask[c] = (s >> c) & 1;
      masks.push_back(std::move(mask));
    }
    const auto vals = detail::coalition_values(f, x, background, masks);
    std::copy(vals.begin(), vals.end(), v.begin() + static_cast<std::ptrdiff_t>(start));
  }
  // weight[k] = k! (M - k - 1)! / M!
  std::vector<double> weight(m);
  for (std::size_t k = 0; k < m; ++k) {
    weight[k] = std::exp(std::lgamma(static_cast<double>(k) + 1) + std::lgamma(static_cast<double>(m - k)) -
                         std::lgamma(static_cast<double>(m) + 1));
  }
  Attribution a;
  a.phi.assign(m, 0.0);
  for (std::size_t s = 0; s < n_sets; ++s) {
    const auto k = static_cast<std::size_t>(std::popcount(s));
    for (std::size_t i = 0; i < m; ++i) {
      if ((s >> i) & 1) continue;
      a.phi[i] += weight[k] * (v[s | (std::size_t{1} << i)] - v[s]);
    }
  }
  a.phi0 = v[0];
  a.model_output = f(Matrix::from_rows({std::vector<double>(x.begin(), x.end())}))[0];
  a.confidence = a.model_output;
  return a;
}

/// Permutation-sampling estimate: the average marginal contribution of each
/// feature over `n_permutations` random orderings.
inline Attribution sampled_shapley(const BatchModel& f, std::span<const double> x, const Matrix& background,
                                   std::size_t n_permutations, std::uint64_t seed) {
  detail::check_inputs(x, background);
  if (n_permutations < 1) throw ConfigError("attribution permutations must be >= 1");
  const std::size_t m = x.size();
  Rng rng(seed);
  Attribution a;
  a.phi.assign(m, 0.0);
  a.phi0 = detail::coalition_values(f, x, background, {std::vector<char>(m, 0)})[0];
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::vector<char>> masks(m, std::vector<char>(m, 0));
  for (std::size_t p = 0; p < n_permutations; ++p) {
    rng.shuffle(order);
    std::vector<char> mask(m, 0);
    for (std::size_t k = 0; k < m; ++k) {
      mask[order[k]] = 1;
      masks[k] = mask;
    }
    const auto v = detail::coalition_values(f, x, background, masks);
    double prev = a.phi0;
    for (std::size_t k = 0; k < m; ++k) {
      a.phi[order[k]] += v[k] - prev;
      prev = v[k];
    }
  }
  for (auto& p : a.phi) p /= static_cast<double>(n_permutations);
  a.model_output = f(Matrix::from_rows({std::vector<double>(x.begin(), x.end())}))[0];
  a.confidence = a.model_output;
  return a;
}

}  // namespace techval
