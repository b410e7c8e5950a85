#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "techval/core/random.hpp"
#include "techval/eval/cross_validation.hpp"
#include "techval/models/model.hpp"

namespace techval {

/// Sixteen specs, four variants per family, in the order RF, LR, NN, XGB.
/// Model seeds derive from `seed` and the spec id.
inline std::vector<ModelSpec> default_grid(std::uint64_t seed) {
  std::vector<ModelSpec> g;
  auto add = [&](std::string id, Hyperparams p) {
    const auto s = derive_seed(seed, "model:" + id);
    g.push_back({std::move(id), std::move(p), s});
  };
  auto rf = [](int trees, int depth) {
    ForestParams p;
    p.n_trees = trees;
    p.max_depth = depth;
    return p;
  };
  add("RF #1", rf(50, 20));
  add("RF #2", rf(50, 15));
  add("RF #3", rf(40, 10));
  add("RF #4", rf(20, 10));
  add("LR #1", LogisticParams{0.0, 0.0081, 36, 1.0});
  add("LR #2", LogisticParams{0.0, 0.0081, 36, 1.0});
  add("LR #3", LogisticParams{0.5, 0.0062, 32, 1.0});
  add("LR #4", LogisticParams{0.5, 0.0047, 33, 1.0});
  auto nn = [](int hidden, double dropout) {
    MlpParams p;
    p.hidden = hidden;
    p.dropout = dropout;
    return p;
  };
  add("NN #1", nn(100, 0.1));
  add("NN #2", nn(100, 0.0));
  add("NN #3", nn(50, 0.4));
  add("NN #4", nn(100, 0.4));
  auto xgb = [](int estimators) {
    BoostingParams p;
    p.n_estimators = estimators;
    return p;
  };
  add("XGB #1", xgb(75));
  add("XGB #2", xgb(61));
  add("XGB #3", xgb(61));
  add("XGB #4", xgb(54));
  return g;
}

struct CandidateResult {
  ModelSpec spec;
  std::optional<CVResult> cv;  // empty when the spec failed
  std::string error;
  double f1 = 0.0, mcc = 0.0, ece = 0.0;

  bool ok() const noexcept { return cv.has_value(); }
};

inline CandidateResult make_candidate(ModelSpec spec, CVResult cv) {
  CandidateResult c;
  c.f1 = cv.mean.at("f1");
  c.mcc = cv.mean.at("mcc");
  c.ece = cv.mean.at("ece");
  c.spec = std::move(spec);
  c.cv = std::move(cv);
  return c;
}

/// Cross-validates every spec on one shared fold plan. A failing spec is
/// recorded and the grid continues; if every spec fails the grid throws.
inline std::vector<CandidateResult> run_grid(const std::vector<ModelSpec>& grid, const Matrix& X, const Targets& y,
                                             const FoldPlan& plan, std::size_t m_bins = 10,
                                             const std::function<void(const CandidateResult&)>& on_done = {}) {
  if (grid.empty()) throw ConfigError("model grid is empty");
  std::vector<CandidateResult> out;
  std::size_t failures = 0;
  for (const auto& spec : grid) {
    try {
      out.push_back(make_candidate(spec, cross_validate(spec, X, y, plan, m_bins)));
    } catch (const Error& e) {
      CandidateResult c;
      c.spec = spec;
      c.error = e.what();
      out.push_back(std::move(c));
      ++failures;
    }
    if (on_done) on_done(out.back());
  }
  if (failures == grid.size()) throw DataError("every grid spec failed; first error: " + out.front().error);
  return out;
}

}  // namespace techval
