#include <gtest/gtest.h>

#include <limits>
#include <set>

#include "techval/core/random.hpp"
#include "techval/resampling/kfold.hpp"
#include "techval/resampling/tomek.hpp"

using namespace techval;

namespace {

Matrix column(std::initializer_list<double> xs) {
  Matrix m(0, 1);
  for (double x : xs) m.append_row(std::vector<double>{x});
  return m;
}

// O(n^2) reference: for every row the closest other row (lowest index on ties),
// then every opposite-class mutual pair.
std::set<std::pair<std::size_t, std::size_t>> brute_force_links(const Matrix& X, const Targets& y) {
  const std::size_t n = X.rows();
  std::vector<std::size_t> nn(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = 0;
      for (std::size_t c = 0; c < X.cols(); ++c) d += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
      if (d < best) {
        best = d;
        nn[i] = j;
      }
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> links;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] != y[nn[i]] && nn[nn[i]] == i) links.emplace(std::min(i, nn[i]), std::max(i, nn[i]));
  }
  return links;
}

}  // namespace

TEST(Tomek, SeparatedClustersHaveNoLinks) {
  const auto X = column({0.0, 0.1, 5.0, 5.1});
  const Targets y{0, 0, 1, 1};
  EXPECT_TRUE(find_tomek_links(X, y).empty());
  const auto res = undersample(X, y);
  EXPECT_EQ(res.X, X);
  EXPECT_TRUE(res.report.removed.empty());
}

TEST(Tomek, SingleBoundaryLink) {
  const auto X = column({0.0, 0.9, 1.0, 5.0});
  const Targets y{0, 0, 1, 1};
  const auto links = find_tomek_links(X, y);
  ASSERT_EQ(links.size(), 1u);
  EXPECT_EQ(links[0], (std::pair<std::size_t, std::size_t>{1, 2}));
  const auto res = undersample(X, y);
  EXPECT_EQ(res.report.removed, std::vector<std::size_t>{2});
  EXPECT_EQ(res.kept, (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ(res.y, (Targets{0, 0, 1}));
}

TEST(Tomek, Errors) {
  EXPECT_THROW(find_tomek_links(column({0.0, 1.0}), {1, 1}), DataError);
  EXPECT_THROW(find_tomek_links(column({0.0, 1.0, 1.0}), {0, 1, 0}), DataError);
  EXPECT_NO_THROW(find_tomek_links(column({0.0, 1.0, 1.0}), {0, 1, 1}));
}

TEST(Tomek, MatchesBruteForceOnRandomFixtures) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Rng rng(seed);
    const std::size_t n = 40;
    Matrix X(n, 3);
    Targets y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.7) ? 1 : 0;
      for (std::size_t c = 0; c < 3; ++c) X(i, c) = rng.normal() + (y[i] ? 0.8 : 0.0);
    }
    if (y == Targets(n, 1)) y[0] = 0;
    const auto oracle = brute_force_links(X, y);
    const auto links = find_tomek_links(X, y);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (auto [a, b] : links) got.emplace(std::min(a, b), std::max(a, b));
    EXPECT_EQ(got, oracle) << "seed " << seed;

    const int major = majority_label(y);
    std::set<std::size_t> expected_removed;
    for (auto [a, b] : oracle) expected_removed.insert(y[a] == major ? a : b);
    const auto res = undersample(X, y);
    EXPECT_EQ(std::set<std::size_t>(res.report.removed.begin(), res.report.removed.end()), expected_removed);
    EXPECT_EQ(res.report.removed.size(), links.size());
    for (auto r : res.report.removed) EXPECT_EQ(y[r], major);
    std::size_t minority_before = 0, minority_after = 0;
    for (int v : y) minority_before += v != major;
    for (int v : res.y) minority_after += v != major;
    EXPECT_EQ(minority_before, minority_after);
    EXPECT_EQ(res.X.rows(), n - res.report.removed.size());
    for (std::size_t i = 0; i < res.kept.size(); ++i) {
      EXPECT_TRUE(std::equal(res.X.row(i).begin(), res.X.row(i).end(), X.row(res.kept[i]).begin()));
    }
  }
}

TEST(Tomek, WideMarginMeansNoLinks) {
  Rng rng(3);
  Matrix X(30, 2);
  Targets y(30);
  for (std::size_t i = 0; i < 30; ++i) {
    y[i] = i % 3 == 0;
    X(i, 0) = rng.uniform() + (y[i] ? 10.0 : 0.0);
    X(i, 1) = rng.uniform();
  }
  EXPECT_TRUE(find_tomek_links(X, y).empty());
}

TEST(Tomek, ReportJson) {
  const auto res = undersample(column({0.0, 0.9, 1.0, 5.0}), {0, 0, 1, 1});
  const auto j = to_json(res.report);
  EXPECT_EQ(j.dump(), R"({"distance_metric":"euclidean","majority_label":"VP","links":[[1,2]],"removed":[2]})");
}

TEST(KFold, ExactDivisibility) {
  Targets y(20, 0);
  for (std::size_t i = 0; i < 10; ++i) y[i] = 1;
  const auto a = stratified_kfold(y, 10, 7);
  for (std::size_t f = 0; f < 10; ++f) {
    const auto rows = a.test_rows(f);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_NE(y[rows[0]], y[rows[1]]);
  }
  EXPECT_EQ(a, stratified_kfold(y, 10, 7));
}

TEST(KFold, UnevenClasses) {
  Targets y(60, 1);
  for (std::size_t i = 0; i < 13; ++i) y[i * 4] = 0;
  const auto a = stratified_kfold(y, 10, 1);
  std::vector<int> seen(60, 0);
  for (std::size_t f = 0; f < 10; ++f) {
    const auto rows = a.test_rows(f);
    EXPECT_EQ(rows.size(), 6u);
    int nvp = 0;
    for (auto r : rows) {
      nvp += y[r] == 0;
      ++seen[r];
    }
    EXPECT_GE(nvp, 1);
    EXPECT_LE(nvp, 2);
    EXPECT_EQ(a.train_rows(f).size(), 54u);
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(KFold, PropertiesOnRandomLabels) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const std::size_t n = 30 + rng.index(200);
    const std::size_t k = 2 + rng.index(9);
    Targets y(n);
    for (auto& v : y) v = rng.bernoulli(0.7);
    std::size_t pos = 0;
    for (int v : y) pos += v;
    if (pos < k || n - pos < k) continue;
    const auto a = stratified_kfold(y, k, seed);
    std::vector<std::size_t> size(k), vp(k);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_LT(a.fold[i], k);
      ++size[a.fold[i]];
      vp[a.fold[i]] += y[i];
    }
    const auto [mn, mx] = std::minmax_element(size.begin(), size.end());
    EXPECT_LE(*mx - *mn, 1u);
    for (std::size_t f = 0; f < k; ++f) {
      const double expected = static_cast<double>(pos) * size[f] / n;
      EXPECT_LE(std::abs(static_cast<double>(vp[f]) - expected), 1.0 + 1e-9);
    }
  }
}

TEST(KFold, TooFewMembers) {
  Targets y{1, 1, 1, 0, 0};
  EXPECT_THROW(stratified_kfold(y, 3, 1), DataError);
  EXPECT_NO_THROW(stratified_kfold(y, 2, 1));
  EXPECT_THROW(stratified_kfold(y, 1, 1), ConfigError);
}
