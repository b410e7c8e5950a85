#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/core/random.hpp"

namespace techval {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary decision tree; x[feature] <= threshold goes left.
struct Tree {
  std::vector<TreeNode> nodes;

  int leaf_index(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return i;
  }

  double predict(std::span<const double> x) const { return nodes[static_cast<std::size_t>(leaf_index(x))].value; }

  int depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].is_leaf()) continue;
      for (int c : {nodes[i].left, nodes[i].right}) {
        d[static_cast<std::size_t>(c)] = d[i] + 1;
        best = std::max(best, d[i] + 1);
      }
    }
    return best;
  }

  friend bool operator==(const Tree&, const Tree&) = default;
};

/// Row order of every column, sorted by value (stable, so equal values keep
/// row order). Computed once and shared by every tree grown on the same data.
inline std::vector<std::vector<std::size_t>> presort_columns(const Matrix& X) {
  std::vector<std::vector<std::size_t>> order(X.cols());
  for (std::size_t c = 0; c < X.cols(); ++c) {
    auto& o = order[c];
    o.resize(X.rows());
    std::iota(o.begin(), o.end(), std::size_t{0});
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return X(a, c) < X(b, c); });
  }
  return order;
}

/// Midpoint between two consecutive distinct values that still separates
/// them after rounding.
inline double split_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

/*
 * Level-wise exact greedy tree growth. At each depth every open node is
 * considered at once: each candidate column is scanned in presorted order and
 * the running left statistics of every node are updated in a single pass.
 *
 * Policy requirements:
 *   using Stats;                          supports +=, - and default construction
 *   Stats stats(std::size_t row) const;  contribution of one row (weight included)
 *   bool splittable(const Stats&) const;
 *   std::optional<double> gain(const Stats& left, const Stats& right, const Stats& parent) const;
 *   double leaf_value(const Stats&) const;
 *   std::vector<std::size_t> candidate_features(std::size_t n_features, Rng&) const;
 *
 * A split replaces the current best only on strictly greater gain, so ties
 * resolve to the lowest feature index and then the lowest threshold.
 */
template <class Policy>
Tree grow_tree(const Matrix& X, const std::vector<std::vector<std::size_t>>& sorted,
               const std::vector<std::size_t>& rows, int max_depth, const Policy& policy, Rng& rng) {
  using Stats = typename Policy::Stats;
  Tree tree;
  std::vector<int> node_of(X.rows(), -1);
  Stats root{};
  for (auto r : rows) {
    node_of[r] = 0;
    root += policy.stats(r);
  }
  std::vector<Stats> totals{root};
  tree.nodes.push_back({});

  std::vector<int> open{0};
  for (int depth = 0; !open.empty(); ++depth) {
    struct Best {
      double gain = 0.0;
      int feature = -1;
      double threshold = 0.0;
    };
    // Per-node scratch, indexed by position in `open`.
    std::vector<int> slot(tree.nodes.size(), -1);
    std::vector<std::vector<char>> allowed(open.size(), std::vector<char>(X.cols(), 0));
    std::vector<Best> best(open.size());
    std::vector<char> active(open.size(), 0);
    for (std::size_t k = 0; k < open.size(); ++k) {
      const auto id = static_cast<std::size_t>(open[k]);
      slot[id] = static_cast<int>(k);
      if (depth < max_depth && policy.splittable(totals[id])) {
        active[k] = 1;
        for (auto f : policy.candidate_features(X.cols(), rng)) allowed[k][f] = 1;
      }
    }
    if (std::find(active.begin(), active.end(), 1) != active.end()) {
      std::vector<Stats> left(open.size());
      std::vector<double> last(open.size());
      std::vector<char> seen(open.size());
      for (std::size_t f = 0; f < X.cols(); ++f) {
        bool any = false;
        for (std::size_t k = 0; k < open.size(); ++k) any = any || (active[k] && allowed[k][f]);
        if (!any) continue;
        std::fill(left.begin(), left.end(), Stats{});
        std::fill(seen.begin(), seen.end(), 0);
        for (auto r : sorted[f]) {
          const int node = node_of[r];
          if (node < 0) continue;
          const int k = slot[static_cast<std::size_t>(node)];
          if (k < 0 || !active[k] || !allowed[k][f]) continue;
          const double x = X(r, f);
          if (seen[k] && x > last[k]) {
            const auto& parent = totals[static_cast<std::size_t>(node)];
            const Stats right = parent - left[k];
            if (auto g = policy.gain(left[k], right, parent)) {
              if (best[k].feature < 0 || *g > best[k].gain) {
                best[k] = {*g, static_cast<int>(f), split_threshold(last[k], x)};
              }
            }
          }
          left[k] += policy.stats(r);
          last[k] = x;
          seen[k] = 1;
        }
      }
    }

    std::vector<int> next;
    for (std::size_t k = 0; k < open.size(); ++k) {
      const auto id = static_cast<std::size_t>(open[k]);
      if (best[k].feature < 0) {
        tree.nodes[id].value = policy.leaf_value(totals[id]);
        continue;
      }
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes[id].feature = best[k].feature;
      tree.nodes[id].threshold = best[k].threshold;
      tree.nodes[id].left = l;
      tree.nodes[id].right = l + 1;
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      totals.emplace_back();
      totals.emplace_back();
      next.push_back(l);
      next.push_back(l + 1);
    }
    if (next.empty()) break;
    for (auto r : rows) {
      const int node = node_of[r];
      if (node < 0) continue;
      const auto& n = tree.nodes[static_cast<std::size_t>(node)];
      if (n.is_leaf()) {
        node_of[r] = -1;
        continue;
      }
      const int child = X(r, static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
      node_of[r] = child;
      totals[static_cast<std::size_t>(child)] += policy.stats(r);
    }
    open = std::move(next);
  }
  return tree;
}

}  // namespace techval
