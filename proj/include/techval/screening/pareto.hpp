#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "techval/core/common.hpp"

namespace techval {

/// Objectives of one candidate: minimize ece, maximize mcc; f1 gates entry.
struct Objectives {
  double f1 = 0.0, mcc = 0.0, ece = 0.0;
};

/// a dominates b: no worse on both objectives and strictly better on one.
inline bool dominates(const Objectives& a, const Objectives& b) {
  return a.ece <= b.ece && a.mcc >= b.mcc && (a.ece < b.ece || a.mcc > b.mcc);
}

struct ParetoFront {
  double f1_floor = 0.0;
  std::vector<std::size_t> members;  // candidate indices ordered by (ece asc, mcc desc, index)
  std::vector<bool> on_front;
  std::vector<bool> below_floor;
  std::vector<std::string> warnings;
};

/// Members are candidates that reach the floor and that no candidate at all
/// dominates. Dominance is checked against every candidate, including those
/// below the floor, so raising the floor can only shrink the front.
inline ParetoFront pareto_front(const std::vector<Objectives>& cands, double f1_floor) {
  if (cands.empty()) throw DataError("pareto_front: no candidates");
  ParetoFront front;
  front.f1_floor = f1_floor;
  const auto n = cands.size();
  front.on_front.assign(n, false);
  front.below_floor.assign(n, false);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cands[a].ece != cands[b].ece) return cands[a].ece < cands[b].ece;
    return cands[a].mcc > cands[b].mcc;
  });
  // Sweep in (ece asc, mcc desc) order: a candidate is dominated iff some
  // earlier candidate with strictly smaller ece has mcc >= its mcc, or an
  // earlier candidate with equal ece has strictly larger mcc.
  double best_mcc_before = -std::numeric_limits<double>::infinity();  // over strictly smaller ece
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    const double ece = cands[order[i]].ece;
    while (j < n && cands[order[j]].ece == ece) ++j;
    const double group_best = cands[order[i]].mcc;  // group sorted by mcc desc
    for (std::size_t k = i; k < j; ++k) {
      const auto& c = cands[order[k]];
      const bool dominated = best_mcc_before >= c.mcc || group_best > c.mcc;
      front.below_floor[order[k]] = c.f1 < f1_floor;
      if (!dominated && c.f1 >= f1_floor) {
        front.on_front[order[k]] = true;
        front.members.push_back(order[k]);
      }
    }
    best_mcc_before = std::max(best_mcc_before, group_best);
    i = j;
  }
  if (front.members.empty()) {
    front.warnings.push_back("Pareto front is empty: no non-dominated candidate reaches the F1 floor " +
                             format_double(f1_floor));
  }
  return front;
}

enum class SelectionPolicy { kMinEce, kMaxMcc, kKnee };

inline std::string_view to_string(SelectionPolicy p) {
  switch (p) {
    case SelectionPolicy::kMinEce: return "min_ece";
    case SelectionPolicy::kMaxMcc: return "max_mcc";
    case SelectionPolicy::kKnee: return "knee";
  }
  return "?";
}

inline SelectionPolicy parse_selection_policy(std::string_view s) {
  if (s == "min_ece") return SelectionPolicy::kMinEce;
  if (s == "max_mcc") return SelectionPolicy::kMaxMcc;
  if (s == "knee") return SelectionPolicy::kKnee;
  throw ConfigError("unknown selection_policy '" + std::string(s) + "' (expected min_ece, max_mcc or knee)");
}

/// Knee score of each member: (1 - ece') + mcc', primes min-max normalized
/// over the front (a constant objective normalizes to 0).
inline std::vector<double> knee_scores(const std::vector<Objectives>& cands, const std::vector<std::size_t>& members) {
  double lo_e = std::numeric_limits<double>::infinity(), hi_e = -lo_e, lo_m = lo_e, hi_m = -lo_e;
  for (auto i : members) {
    lo_e = std::min(lo_e, cands[i].ece);
    hi_e = std::max(hi_e, cands[i].ece);
    lo_m = std::min(lo_m, cands[i].mcc);
    hi_m = std::max(hi_m, cands[i].mcc);
  }
  auto norm = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };
  std::vector<double> s;
  for (auto i : members) s.push_back((1.0 - norm(cands[i].ece, lo_e, hi_e)) + norm(cands[i].mcc, lo_m, hi_m));
  return s;
}

/// Index of the selected candidate. Ties: min_ece prefers higher mcc,
/// max_mcc prefers lower ece, then front order.
inline std::size_t select_best(const std::vector<Objectives>& cands, const ParetoFront& front,
                               SelectionPolicy policy) {
  if (front.members.empty()) {
    throw DataError("cannot select a model: Pareto front is empty at F1 floor " + format_double(front.f1_floor));
  }
  const auto& m = front.members;
  std::size_t best = 0;
  if (policy == SelectionPolicy::kKnee) {
    const auto s = knee_scores(cands, m);
    for (std::size_t k = 1; k < m.size(); ++k) {
      if (s[k] > s[best]) best = k;
    }
    return m[best];
  }
  for (std::size_t k = 1; k < m.size(); ++k) {
    const auto& c = cands[m[k]];
    const auto& b = cands[m[best]];
    const bool better = policy == SelectionPolicy::kMinEce
                            ? (c.ece < b.ece || (c.ece == b.ece && c.mcc > b.mcc))
                            : (c.mcc > b.mcc || (c.mcc == b.mcc && c.ece < b.ece));
    if (better) best = k;
  }
  return m[best];
}

}  // namespace techval
