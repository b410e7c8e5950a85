#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "techval/corpus/io.hpp"
#include "techval/pipeline/stages.hpp"
#include "techval/synthetic/generator.hpp"

using namespace techval;
using techval::testing::data_dir;
using techval::testing::temp_dir;

namespace {

// Small explicit grid so stage tests stay fast.
ojson small_grid() {
  return ojson::parse(R"([
    {"id": "LR #1", "family": "LR", "hyperparams": {"alpha": 0.0, "lambda": 0.01, "epochs": 50}},
    {"id": "RF #1", "family": "RF", "hyperparams": {"n_trees": 10, "max_depth": 6}},
    {"id": "XGB #1", "family": "XGB", "hyperparams": {"n_estimators": 10, "max_depth": 3}}
  ])");
}

/// Writes a synthetic corpus and a config next to it; returns the config.
RunConfig synthetic_run(const fs::path& dir, std::size_t n, ojson overrides = ojson::object()) {
  SyntheticOptions opt;
  opt.n = n;
  opt.seed = 3;
  write_file(dir / "corpus.jsonl", emit_canonical_jsonl(generate_synthetic(opt)));
  ojson j{{"corpus", {{"path", "corpus.jsonl"}}},
          {"seed", 11},
          {"k", 3},
          {"grid", small_grid()},
          {"f1_floor", 0.5},
          {"attribution", {{"permutations", 2}, {"background_size", 10}, {"max_instances", 15}}}};
  for (auto it = overrides.begin(); it != overrides.end(); ++it) j[it.key()] = it.value();
  return config_from_json(j, dir);
}

RunContext quiet(RunConfig cfg, const fs::path& out) {
  auto ctx = make_context(std::move(cfg), out);
  ctx.log = nullptr;
  return ctx;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& rel : list_files(root)) out[rel] = read_file(root / rel);
  return out;
}

}  // namespace

TEST(Config, Defaults) {
  const auto dir = temp_dir("cfg_defaults");
  write_file(dir / "c.jsonl", "");
  const auto cfg = config_from_json(ojson::parse(R"({"corpus": {"path": "c.jsonl"}, "seed": 5})"), dir);
  EXPECT_EQ(cfg.k, 10);
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.ece_bins, 10);
  EXPECT_DOUBLE_EQ(cfg.f1_floor, 0.9);
  EXPECT_EQ(cfg.selection_policy, SelectionPolicy::kKnee);
  EXPECT_FALSE(cfg.grid.has_value());
  EXPECT_EQ(resolve_grid(cfg).size(), 16u);
  EXPECT_EQ(cfg.attribution.mode, AttributionMode::kSampled);
  EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, UnknownKeysAreFatal) {
  const fs::path dir = ".";
  EXPECT_THROW(config_from_json(ojson::parse(R"({"seed": 1, "sed": 2})"), dir), ConfigError);
  EXPECT_THROW(config_from_json(ojson::parse(R"({"seed": 1, "corpus": {"pth": "x"}})"), dir), ConfigError);
  EXPECT_THROW(config_from_json(ojson::parse(R"({"seed": 1, "attribution": {"perms": 3}})"), dir), ConfigError);
  EXPECT_THROW(
      config_from_json(ojson::parse(R"({"seed": 1, "grid": [{"id": "a", "family": "LR", "hyperparams": {"depth": 3}}]})"), dir),
      ConfigError);
}

TEST(Config, SeedMandatory) {
  EXPECT_THROW(config_from_json(ojson::parse(R"({"corpus": {"path": "x"}})"), "."), ConfigError);
  EXPECT_THROW(config_from_json(ojson::parse(R"({"seed": -1})"), "."), ConfigError);
}

TEST(Config, ValidationRejectsBadValues) {
  const auto dir = temp_dir("cfg_validate");
  write_file(dir / "c.jsonl", "");
  auto base = ojson::parse(R"({"corpus": {"path": "c.jsonl"}, "seed": 1})");
  auto with = [&](const char* key, ojson v) {
    auto j = base;
    j[key] = v;
    return config_from_json(j, dir);
  };
  EXPECT_THROW(validate(with("k", 1)), ConfigError);
  EXPECT_THROW(validate(with("f1_floor", 1.5)), ConfigError);
  EXPECT_THROW(validate(with("corpus", {{"path", "missing.jsonl"}})), ConfigError);
  EXPECT_THROW(with("selection_policy", "best"), ConfigError);
  EXPECT_THROW(with("grid", "huge"), ConfigError);
  const auto dup = ojson::parse(R"([{"id": "a", "family": "LR"}, {"id": "a", "family": "RF"}])");
  EXPECT_THROW(validate(with("grid", dup)), ConfigError);
  EXPECT_THROW(validate(with("field", {{"embedding_source", "external-file"}})), ConfigError);
}

TEST(Config, NormalizedFormRoundTrips) {
  const auto dir = temp_dir("cfg_roundtrip");
  write_file(dir / "c.jsonl", "");
  auto j = ojson::parse(R"({"corpus": {"path": "c.jsonl"}, "seed": 9, "grid": [{"id": "x", "family": "NN", "seed": 4}]})");
  const auto cfg = config_from_json(j, dir);
  const auto again = config_from_json(to_json(cfg), dir);
  EXPECT_EQ(normalized_config_text(cfg), normalized_config_text(again));
  EXPECT_EQ(config_hash(cfg), config_hash(again));
  EXPECT_EQ(resolve_grid(cfg)[0].seed, 4u);

  auto other = cfg;
  other.seed = 10;
  EXPECT_NE(config_hash(cfg), config_hash(other));
  other = cfg;
  other.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(cfg), config_hash(other));
}

TEST(Lock, SecondHolderRefused) {
  const auto dir = temp_dir("lock");
  {
    OutputLock a(dir);
    EXPECT_THROW(OutputLock b(dir), IoError);
  }
  EXPECT_NO_THROW(OutputLock c(dir));
}

TEST(Slug, SpecIds) {
  EXPECT_EQ(slug("RF #1"), "RF_1");
  EXPECT_EQ(slug("XGB #12"), "XGB_12");
}

TEST(ExtractStage, GoldenCorpusMatchesGoldenMatrix) {
  const auto dir = temp_dir("stage_golden");
  auto cfg = config_from_json(
      ojson{{"corpus", {{"path", (data_dir() / "golden/corpus.jsonl").string()}}}, {"seed", 1}}, dir);
  const auto ctx = quiet(cfg, dir / "out");
  run_extract(ctx);
  const auto got = load_feature_matrix(ctx.path("extract/feature_matrix.csv"));
  const auto want = load_feature_matrix(data_dir() / "golden/feature_matrix.csv");
  ASSERT_EQ(got.patent_ids, want.patent_ids);
  ASSERT_EQ(got.labels, want.labels);
  ASSERT_EQ(got.feature_names, want.feature_names);
  for (std::size_t r = 0; r < want.size(); ++r) {
    for (std::size_t c = 0; c < want.rows.cols(); ++c) {
      const double w = want.rows(r, c);
      if (w == std::floor(w)) {
        EXPECT_EQ(got.rows(r, c), w) << want.patent_ids[r] << " " << want.feature_names[c];
      } else {
        EXPECT_NEAR(got.rows(r, c), w, 1e-9) << want.patent_ids[r] << " " << want.feature_names[c];
      }
    }
  }
  const auto counts = read_json_file(ctx.path("extract/label_counts.json"));
  EXPECT_EQ(counts["vp"], 3);
  EXPECT_EQ(counts["nvp"], 2);
}

TEST(ExtractStage, EmptyCorpusFails) {
  const auto dir = temp_dir("stage_empty");
  write_file(dir / "empty.jsonl", "");
  const auto ctx = quiet(config_from_json(ojson{{"corpus", {{"path", "empty.jsonl"}}}, {"seed", 1}}, dir), dir / "out");
  try {
    run_extract(ctx);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("empty corpus"), std::string::npos);
  }
}

TEST(ExtractStage, RerunIsByteIdentical) {
  const auto dir = temp_dir("stage_rerun");
  const auto cfg = synthetic_run(dir, 120);
  run_extract(quiet(cfg, dir / "a"));
  run_extract(quiet(cfg, dir / "b"));
  EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
}

TEST(TrainEvalStage, OneRowPerSpecAllMetricsPopulated) {
  const auto dir = temp_dir("stage_train");
  const auto ctx = quiet(synthetic_run(dir, 200), dir / "out");
  run_train_eval(ctx);  // chains extract
  EXPECT_TRUE(stage_current(ctx, "extract"));
  std::istringstream in(read_file(ctx.path("train_eval/candidates.csv")));
  csv::Reader reader(in);
  const auto header = reader.next()->fields;
  std::size_t rows = 0;
  while (auto row = reader.next()) {
    ++rows;
    for (std::size_t c = 3; c < 3 + metric_names().size(); ++c) EXPECT_FALSE(row->fields[c].empty()) << header[c];
    EXPECT_EQ(row->fields[header.size() - 2], "ok");
  }
  EXPECT_EQ(rows, 3u);
  EXPECT_TRUE(fs::exists(ctx.path("train_eval/reliability/XGB_1.csv")));
  EXPECT_TRUE(fs::exists(ctx.path("train_eval/tomek/fold_3.json")));
}

TEST(TrainEvalStage, KAboveMinorityCountFails) {
  const auto dir = temp_dir("stage_bigk");
  const auto ctx = quiet(synthetic_run(dir, 30, {{"k", 25}}), dir / "out");
  try {
    run_train_eval(ctx);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("fewer than k"), std::string::npos) << e.what();
  }
}

TEST(TrainEvalStage, DeterministicMetrics) {
  const auto dir = temp_dir("stage_train_twice");
  const auto cfg = synthetic_run(dir, 150);
  run_train_eval(quiet(cfg, dir / "a"));
  run_train_eval(quiet(cfg, dir / "b"));
  EXPECT_EQ(read_file(dir / "a/train_eval/candidates.csv"), read_file(dir / "b/train_eval/candidates.csv"));
}

TEST(ParetoStage, ThreeCandidateFixture) {
  auto cand = [](const char* id, double f1, double mcc, double ece) {
    return ojson{{"spec", {{"id", id}, {"family", "LR"}, {"seed", 1}, {"hyperparams", ojson::object()}}},
                 {"status", "ok"},
                 {"cv",
                  {{"mean", {{"accuracy", 0.9}, {"precision", 0.9}, {"recall", 0.9}, {"f1", f1},
                             {"youdens_j", 0.5}, {"mcc", mcc}, {"ece", ece}}},
                   {"std", {{"accuracy", 0}, {"precision", 0}, {"recall", 0}, {"f1", 0},
                            {"youdens_j", 0}, {"mcc", 0}, {"ece", 0}}}}}};
  };
  auto j = ojson::array({cand("a", 0.95, 0.7, 0.1), cand("b", 0.95, 0.6, 0.2), cand("c", 0.95, 0.8, 0.15)});
  j.push_back({{"spec", {{"id", "broken"}, {"family", "RF"}, {"seed", 1}, {"hyperparams", ojson::object()}}},
               {"status", "failed"},
               {"error", "boom"}});
  const auto cands = read_candidates(j);
  ASSERT_EQ(cands.size(), 4u);
  EXPECT_FALSE(cands[3].ok());
  const auto o = screen_candidates(cands, 0.9, SelectionPolicy::kMinEce);
  std::set<std::string> front;
  for (auto k : o.front.members) front.insert(cands[o.index[k]].spec.id);
  EXPECT_EQ(front, (std::set<std::string>{"a", "c"}));
  EXPECT_EQ(cands[*o.selected].spec.id, "a");
  EXPECT_FALSE(screen_candidates(cands, 0.99, SelectionPolicy::kKnee).selected.has_value());
}

TEST(PipelineStages, SingleCandidateSelectedAndFloorEnforced) {
  const auto dir = temp_dir("stage_single");
  auto grid = ojson::array({small_grid()[2]});
  const auto ctx = quiet(synthetic_run(dir, 150, {{"grid", grid}, {"selection_policy", "max_mcc"}}), dir / "out");
  run_train_eval(ctx);
  run_pareto(ctx);
  EXPECT_EQ(read_json_file(ctx.path("pareto/selection.json"))["selected"], "XGB #1");

  const auto strict = quiet(synthetic_run(dir, 150, {{"grid", grid}, {"f1_floor", 1.0}}), dir / "out2");
  run_train_eval(strict);
  try {
    run_pareto(strict);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("F1 floor 1"), std::string::npos) << e.what();
  }
}

TEST(PipelineStages, ExactModeOverBudgetSuggestsSampled) {
  const auto dir = temp_dir("stage_exact");
  const auto ctx = quiet(synthetic_run(dir, 150, {{"attribution", {{"mode", "exact"}}}}), dir / "out");
  run_train_eval(ctx);
  run_pareto(ctx);
  try {
    run_explain(ctx);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("sampled"), std::string::npos);
  }
}

TEST(PipelineStages, ConstantModelHasZeroAttributions) {
  const auto dir = temp_dir("stage_constant");
  auto grid = ojson::parse(R"([{"id": "LR #1", "family": "LR", "hyperparams": {"alpha": 1.0, "lambda": 100.0}}])");
  const auto ctx = quiet(synthetic_run(dir, 150, {{"grid", grid}, {"f1_floor", 0.0}}), dir / "out");
  run_all(ctx);
  std::istringstream in(read_file(ctx.path("explain/attributions.csv")));
  csv::Reader reader(in);
  reader.next();
  std::size_t rows = 0;
  while (auto row = reader.next()) {
    ++rows;
    for (std::size_t c = 3; c < row->fields.size(); ++c) EXPECT_EQ(row->fields[c], "0");
  }
  EXPECT_EQ(rows, 15u);
  for (const auto& f : read_json_file(ctx.path("explain/global_summary.json"))["features"]) {
    EXPECT_EQ(f["mean_abs_phi"].get<double>(), 0.0);
  }
  for (int b = 1; b <= 5; ++b) {
    for (const auto& f : read_json_file(ctx.path("explain/bins/bin_" + std::to_string(b) + ".json"))["features"]) {
      EXPECT_EQ(f["mean_abs_phi"].get<double>(), 0.0);
    }
  }
}

TEST(PipelineStages, FullRunManifestAndDeterminism) {
  const auto dir = temp_dir("stage_full");
  const auto cfg = synthetic_run(dir, 200);
  const auto a = quiet(cfg, dir / "a");
  const auto b = quiet(cfg, dir / "b");
  run_all(a);
  run_all(b);
  EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));

  const auto manifest = read_json_file(a.path("manifest.json"));
  EXPECT_EQ(manifest["config_hash"], a.hash);
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) {
    listed.insert(f["path"].get<std::string>());
    EXPECT_EQ(f["sha256"], file_sha256(a.path(f["path"].get<std::string>())));
  }
  for (const auto& rel : list_files(a.out, {"manifest.json"})) EXPECT_TRUE(listed.count(rel)) << rel;
  EXPECT_EQ(listed.size(), list_files(a.out, {"manifest.json"}).size());
  EXPECT_EQ(file_sha256(a.path("run_config.json")), a.hash);
  EXPECT_EQ(read_json_file(a.path("report/report.json"))["bin_ranks"].size(), 5u);
}

TEST(PipelineStages, ReportRefusesTamperedConfig) {
  const auto dir = temp_dir("stage_tamper");
  const auto ctx = quiet(synthetic_run(dir, 150), dir / "out");
  run_all(ctx);
  EXPECT_NO_THROW(run_report(ctx));

  auto text = read_file(ctx.path("run_config.json"));
  write_file(ctx.path("run_config.json"), text + " ");
  EXPECT_THROW(run_report(ctx), IntegrityError);
  write_file(ctx.path("run_config.json"), text);

  auto rec = read_json_file(ctx.path("pareto/stage.json"));
  rec["config_hash"] = std::string(64, '0');
  write_file(ctx.path("pareto/stage.json"), rec.dump(2) + "\n");
  EXPECT_THROW(run_report(ctx), IntegrityError);
}

TEST(PipelineStages, ReportRefusesModifiedArtifact) {
  const auto dir = temp_dir("stage_tamper_file");
  const auto ctx = quiet(synthetic_run(dir, 150), dir / "out");
  run_all(ctx);
  write_file(ctx.path("train_eval/candidates.csv"), "spec_id\n");
  EXPECT_THROW(run_report(ctx), IntegrityError);
}

TEST(PipelineStages, ReportListsMissingStages) {
  const auto dir = temp_dir("stage_missing");
  const auto ctx = quiet(synthetic_run(dir, 120), dir / "out");
  run_extract(ctx);
  try {
    run_report(ctx);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    for (const char* s : {"train_eval/", "pareto/", "explain/"}) EXPECT_NE(msg.find(s), std::string::npos) << msg;
  }
}

TEST(PipelineStages, StaleUpstreamRejected) {
  const auto dir = temp_dir("stage_stale");
  const auto ctx = quiet(synthetic_run(dir, 150), dir / "out");
  run_train_eval(ctx);
  auto cfg = ctx.config;
  cfg.seed = 99;
  const auto other = quiet(cfg, dir / "out");
  EXPECT_THROW(run_pareto(other), DataError);
}

TEST(Synthetic, ShapeAndDeterminism) {
  SyntheticOptions opt;
  opt.n = 2000;
  const auto a = generate_synthetic(opt);
  EXPECT_EQ(a, generate_synthetic(opt));
  std::size_t vp = 0, nvp = 0;
  for (const auto& r : a) {
    EXPECT_NO_THROW(validate(r));
    switch (derive_label(r)) {
      case Label::kVp: ++vp; break;
      case Label::kNvp: ++nvp; break;
      default: break;
    }
  }
  EXPECT_EQ(a.size(), 2000u);
  const double ratio = static_cast<double>(vp) / static_cast<double>(nvp);
  EXPECT_NEAR(ratio, 34334.0 / 12639.0, 0.25);
}
