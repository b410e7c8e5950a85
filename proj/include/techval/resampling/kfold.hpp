#pragma once

#include <string>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/core/random.hpp"

namespace techval {

struct FoldAssignment {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold;  // row -> fold id in [0, k)

  std::vector<std::size_t> test_rows(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      if (fold[i] == f) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> train_rows(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      if (fold[i] != f) out.push_back(i);
    }
    return out;
  }

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

/// Each class is shuffled independently; the NVP rows and then the VP rows
/// are dealt round-robin onto the folds, so fold sizes differ by at most one
/// and each fold's class counts differ from k-th shares by less than one.
inline FoldAssignment stratified_kfold(const Targets& y, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] ? 1 : 0].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw DataError(std::string(c ? "VP" : "NVP") + " class has " + std::to_string(by_class[c].size()) +
                      " rows, fewer than k = " + std::to_string(k));
    }
  }
  Rng rng(seed);
  FoldAssignment a{k, seed, std::vector<std::size_t>(y.size(), 0)};
  std::size_t pos = 0;
  for (auto& rows : by_class) {
    rng.shuffle(rows);
    for (auto r : rows) a.fold[r] = pos++ % k;
  }
  return a;
}

}  // namespace techval
