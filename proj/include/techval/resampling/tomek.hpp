#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "techval/core/common.hpp"

namespace techval {

enum class DistanceMetric { kEuclidean };

inline std::string_view to_string(DistanceMetric) { return "euclidean"; }

struct TomekReport {
  std::vector<std::pair<std::size_t, std::size_t>> links;  // (minority row, majority row)
  std::vector<std::size_t> removed;                       // ascending
  DistanceMetric metric = DistanceMetric::kEuclidean;
  int majority_label = 1;

  friend bool operator==(const TomekReport&, const TomekReport&) = default;
};

/// Label of the larger class; VP (1) on a tie.
inline int majority_label(const Targets& y) {
  std::size_t pos = 0;
  for (int v : y) pos += v == 1;
  return pos * 2 >= y.size() ? 1 : 0;
}

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline void check_two_classes(const Matrix& X, const Targets& y) {
  if (X.rows() != y.size()) throw DataError("feature rows and labels differ in length");
  bool has0 = false, has1 = false;
  for (int v : y) (v ? has1 : has0) = true;
  if (!has0 || !has1) throw DataError("Tomek links need both classes present");
}

}  // namespace detail

/// Nearest neighbour of every row under the metric; ties go to the lowest
/// row index. Throws if two rows of opposite label coincide.
inline std::vector<std::size_t> nearest_neighbours(const Matrix& X, const Targets& y) {
  const std::size_t n = X.rows();
  std::vector<std::size_t> nn(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = X.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = detail::squared_distance(xi, X.row(j));
      if (d == 0.0 && y[i] != y[j]) {
        throw DataError("rows " + std::to_string(i) + " and " + std::to_string(j) +
                        " are identical but carry opposite labels");
      }
      // j > i and the scan is ascending, so strict comparison keeps the lowest index.
      if (d < best[i]) {
        best[i] = d;
        nn[i] = j;
      }
      if (d < best[j]) {
        best[j] = d;
        nn[j] = i;
      }
    }
  }
  return nn;
}

/// Pairs of opposite-class rows that are each other's nearest neighbour,
/// as (minority row, majority row), ordered by minority row.
inline std::vector<std::pair<std::size_t, std::size_t>> find_tomek_links(
    const Matrix& X, const Targets& y, DistanceMetric = DistanceMetric::kEuclidean) {
  detail::check_two_classes(X, y);
  if (X.rows() < 2) return {};
  const auto nn = nearest_neighbours(X, y);
  const int major = majority_label(y);
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto j = nn[i];
    if (y[i] != major && y[j] == major && nn[j] == i) links.emplace_back(i, j);
  }
  return links;
}

struct UndersampleResult {
  Matrix X;
  Targets y;
  std::vector<std::size_t> kept;  // original row index of each surviving row
  TomekReport report;
};

/// One pass of Tomek-link undersampling: the majority member of every link
/// is dropped, minority rows are always kept.
inline UndersampleResult undersample(const Matrix& X, const Targets& y) {
  UndersampleResult out;
  out.report.links = find_tomek_links(X, y);
  out.report.majority_label = majority_label(y);
  std::vector<bool> drop(X.rows(), false);
  for (const auto& [minor, major] : out.report.links) drop[major] = true;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    if (drop[i]) {
      out.report.removed.push_back(i);
    } else {
      out.kept.push_back(i);
    }
  }
  out.X = X.select_rows(out.kept);
  out.y = select(y, out.kept);
  return out;
}

inline nlohmann::ordered_json to_json(const TomekReport& r) {
  nlohmann::ordered_json j;
  j["distance_metric"] = to_string(r.metric);
  j["majority_label"] = r.majority_label ? "VP" : "NVP";
  j["links"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : r.links) j["links"].push_back({a, b});
  j["removed"] = r.removed;
  return j;
}

}  // namespace techval
