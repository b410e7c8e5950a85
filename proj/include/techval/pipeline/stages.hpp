#pragma once

#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "techval/attribution/io.hpp"
#include "techval/corpus/index.hpp"
#include "techval/corpus/io.hpp"
#include "techval/eval/io.hpp"
#include "techval/indicators/matrix_io.hpp"
#include "techval/models/io.hpp"
#include "techval/pipeline/run.hpp"
#include "techval/screening/io.hpp"

namespace techval {

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"extract", "train_eval", "pareto", "explain", "report"};
  return names;
}

namespace detail {

/// SHA-256 over a file, or over "<name>\n<sha>\n" lines of a directory's files.
inline std::string corpus_digest(const fs::path& p) {
  if (!fs::is_directory(p)) return file_sha256(p);
  std::string listing;
  for (const auto& rel : list_files(p)) listing += rel + "\n" + file_sha256(p / rel) + "\n";
  return sha256_hex(listing);
}

inline FeatureMatrix load_matrix(const RunContext& ctx) {
  return load_feature_matrix(ctx.path("extract/feature_matrix.csv"));
}

inline std::vector<std::string> string_vector(const ojson& j) {
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- extract

inline void run_extract(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  ctx.info("[extract] reading " + cfg.corpus().filename().string());
  StageWriter w(ctx, "extract");
  w.external_input("corpus:" + cfg.corpus_path, detail::corpus_digest(cfg.corpus()));

  auto parsed = parse_corpus(cfg.corpus(), cfg.corpus_format, ctx.strict);
  ojson diags = ojson::array();
  for (const auto& d : parsed.diagnostics) diags.push_back({{"source", d.source}, {"line", d.line}, {"message", d.message}});
  if (parsed.records.empty()) {
    throw DataError("empty corpus: " + cfg.corpus().filename().string() + " has no valid patent records (" +
                    std::to_string(parsed.diagnostics.size()) + " row diagnostics)");
  }
  for (const auto& d : parsed.diagnostics) w.warn(d.source + ":" + std::to_string(d.line) + ": " + d.message);

  const auto index = build_index(parsed.records, cfg.field.ipc_level);
  const auto similarity = cfg.field.embedding_source == EmbeddingSource::kExternalFile
                              ? SemanticSimilarity::external(EmbeddingTable::load(cfg.resolve(*cfg.embedding_path)))
                              : SemanticSimilarity::lexical(parsed.records);
  if (cfg.embedding_path) w.external_input("embeddings:" + *cfg.embedding_path, file_sha256(cfg.resolve(*cfg.embedding_path)));
  auto result = compute_all(parsed.records, index, cfg.field, similarity, cfg.label_policy);
  for (auto& msg : result.warnings) w.warn(msg);

  w.write("canonical_corpus.jsonl", emit_canonical_jsonl(parsed.records));
  w.write("feature_matrix.csv", feature_matrix_to_csv(result.matrix));
  w.write_json("label_counts.json", {{"records", parsed.records.size()},
                                     {"vp", result.vp},
                                     {"nvp", result.nvp},
                                     {"excluded", result.excluded},
                                     {"row_diagnostics", parsed.diagnostics.size()}});
  w.write_json("diagnostics.json", {{"diagnostics", diags}, {"warnings", result.warnings}});
  w.finish();
  ctx.info("[extract] " + std::to_string(result.vp) + " VP, " + std::to_string(result.nvp) + " NVP, " +
           std::to_string(result.excluded) + " excluded");
}

// ------------------------------------------------------------- train-eval

inline void run_train_eval(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  if (!stage_current(ctx, "extract")) run_extract(ctx);
  StageWriter w(ctx, "train_eval");
  w.input("extract/feature_matrix.csv");
  const auto m = detail::load_matrix(ctx);
  const auto k = static_cast<std::size_t>(cfg.k);
  const auto plan = make_fold_plan(m.rows, m.labels, k, derive_seed(cfg.seed, "kfold"), cfg.resample);

  const auto grid = resolve_grid(cfg);
  ctx.info("[train-eval] " + std::to_string(grid.size()) + " specs x " + std::to_string(k) + " folds on " +
           std::to_string(m.size()) + " patents");
  const auto cands = run_grid(grid, m.rows, m.labels, plan, static_cast<std::size_t>(cfg.ece_bins),
                              [&](const CandidateResult& c) {
                                ctx.info("[train-eval] " + c.spec.id +
                                         (c.ok() ? ": f1 " + format_double(c.f1) + ", mcc " + format_double(c.mcc) +
                                                       ", ece " + format_double(c.ece)
                                                 : ": failed: " + c.error));
                              });
  for (const auto& c : cands) {
    if (!c.ok()) w.warn("spec " + c.spec.id + " failed: " + c.error);
  }

  w.write("candidates.csv", candidates_csv(cands));
  w.write_json("candidates.json", candidates_json(cands));
  for (const auto& c : cands) {
    if (!c.ok()) continue;
    w.write("reliability/" + slug(c.spec.id) + ".csv",
            reliability_csv(reliability_bins(m.labels, c.cv->oof_probs, static_cast<std::size_t>(cfg.ece_bins))));
  }

  {
    std::ostringstream out;
    std::vector<std::string> header{"patent_id", "label", "fold"};
    for (const auto& c : cands) {
      if (c.ok()) header.push_back(c.spec.id);
    }
    csv::write_row(out, header);
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::vector<std::string> row{m.patent_ids[i], m.labels[i] ? "VP" : "NVP", std::to_string(plan.assignment.fold[i] + 1)};
      for (const auto& c : cands) {
        if (c.ok()) row.push_back(format_double(c.cv->oof_probs[i]));
      }
      csv::write_row(out, row);
    }
    w.write("oof_predictions.csv", out.str());
  }

  if (cfg.resample) {
    for (std::size_t f = 0; f < plan.k(); ++f) {
      const auto train = plan.assignment.train_rows(f);
      const auto& rep = plan.tomek[f];
      ojson j;
      j["fold"] = f + 1;
      j["distance_metric"] = to_string(rep.metric);
      j["majority_label"] = rep.majority_label ? "VP" : "NVP";
      j["training_rows"] = train.size();
      j["links"] = ojson::array();
      for (const auto& [a, b] : rep.links) j["links"].push_back({m.patent_ids[train[a]], m.patent_ids[train[b]]});
      j["removed"] = ojson::array();
      for (auto r : rep.removed) j["removed"].push_back(m.patent_ids[train[r]]);
      w.write_json("tomek/fold_" + std::to_string(f + 1) + ".json", j);
    }
  }
  w.finish();
}

// ----------------------------------------------------------------- pareto

/// Candidate summaries as stored in train_eval/candidates.json.
inline std::vector<CandidateResult> read_candidates(const ojson& j) {
  if (!j.is_array()) throw ParseError("candidates.json: expected an array");
  std::vector<CandidateResult> out;
  for (const auto& e : j) {
    CandidateResult c;
    c.spec = model_spec_from_json(e.at("spec"), "candidates.json spec");
    if (e.value("status", "") == "ok") {
      CVResult cv;
      for (const auto& name : metric_names()) {
        cv.mean[name] = e.at("cv").at("mean").at(name).get<double>();
        cv.stddev[name] = e.at("cv").at("std").at(name).get<double>();
      }
      c = make_candidate(c.spec, std::move(cv));
    } else {
      c.error = e.value("error", "failed");
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct ParetoOutcome {
  std::vector<std::size_t> index;  // candidate index of each considered (successful) spec
  ParetoFront front;
  std::optional<std::size_t> selected;  // candidate index
  std::vector<double> knee;             // per front member
};

inline ParetoOutcome screen_candidates(const std::vector<CandidateResult>& cands, double f1_floor,
                                       SelectionPolicy policy) {
  ParetoOutcome o;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (cands[i].ok()) o.index.push_back(i);
  }
  if (o.index.empty()) throw DataError("no successful candidates to screen");
  std::vector<Objectives> obj;
  for (auto i : o.index) obj.push_back({cands[i].f1, cands[i].mcc, cands[i].ece});
  o.front = pareto_front(obj, f1_floor);
  if (!o.front.members.empty()) {
    o.selected = o.index[select_best(obj, o.front, policy)];
    o.knee = knee_scores(obj, o.front.members);
  }
  return o;
}

inline void run_pareto(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  require_stage(ctx, "train_eval", "train-eval");
  require_stage(ctx, "extract", "extract");
  StageWriter w(ctx, "pareto");
  w.input("train_eval/candidates.json");
  w.input("extract/feature_matrix.csv");
  const auto cands = read_candidates(read_json_file(ctx.path("train_eval/candidates.json")));
  const auto o = screen_candidates(cands, cfg.f1_floor, cfg.selection_policy);
  for (const auto& msg : o.front.warnings) w.warn(msg);
  w.write("front.csv", front_csv(cands, o.index, o.front));
  w.write_json("front.json", front_json(cands, o.index, o.front));
  if (!o.selected) {
    throw DataError("Pareto front is empty: no candidate reaches the F1 floor " + format_double(cfg.f1_floor));
  }

  const auto& chosen = cands[*o.selected];
  const auto m = detail::load_matrix(ctx);
  std::vector<std::size_t> rows(m.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::size_t removed = 0;
  if (cfg.resample) {
    const auto under = undersample(Scaler::fit(m.rows).transform(m.rows), m.labels);
    rows = under.kept;
    removed = under.report.removed.size();
  }
  ctx.info("[pareto] selected " + chosen.spec.id + "; refitting on " + std::to_string(rows.size()) + " patents");
  const auto model = train_model_rows(chosen.spec, m.rows, m.labels, rows);

  ojson sel;
  sel["policy"] = to_string(cfg.selection_policy);
  sel["selected"] = chosen.spec.id;
  sel["objectives"] = {{"f1", chosen.f1}, {"mcc", chosen.mcc}, {"ece", chosen.ece}};
  sel["front"] = ojson::array();
  for (std::size_t k = 0; k < o.front.members.size(); ++k) {
    const auto& c = cands[o.index[o.front.members[k]]];
    sel["front"].push_back({{"spec_id", c.spec.id}, {"knee_score", o.knee[k]}});
  }
  sel["refit"] = {{"resample", cfg.resample}, {"training_rows", rows.size()}, {"tomek_removed", removed}};
  sel["training_patents"] = ojson::array();
  for (auto r : rows) sel["training_patents"].push_back(m.patent_ids[r]);
  w.write_json("selection.json", sel);
  w.write_json("selected_model.json", {{"spec", to_json(chosen.spec)}, {"model", to_json(model)}});
  w.finish();
}

// ---------------------------------------------------------------- explain

/// Rows to explain: all of them, or a seeded sample of `max_instances` in
/// ascending order.
inline std::vector<std::size_t> explanation_rows(std::size_t n, int max_instances, std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (max_instances == 0 || static_cast<std::size_t>(max_instances) >= n) return rows;
  Rng rng(seed);
  rng.shuffle(rows);
  rows.resize(static_cast<std::size_t>(max_instances));
  std::sort(rows.begin(), rows.end());
  return rows;
}

inline std::vector<Attribution> explain_rows(const TrainedModel& model, const FeatureMatrix& m,
                                             const std::vector<std::size_t>& rows, const Matrix& background,
                                             const AttributionConfig& a, std::uint64_t seed) {
  const BatchModel f = [&](const Matrix& X) { return predict_proba(model, X); };
  std::vector<Attribution> out;
  for (auto r : rows) {
    const auto x = m.rows.row(r);
    auto attr = a.mode == AttributionMode::kExact
                    ? exact_shapley(f, x, background, static_cast<std::size_t>(a.max_features))
                    : sampled_shapley(f, x, background, static_cast<std::size_t>(a.permutations),
                                      derive_seed(seed, "explain:perm:" + m.patent_ids[r]));
    attr.patent_id = m.patent_ids[r];
    out.push_back(std::move(attr));
  }
  return out;
}

inline void run_explain(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& a = cfg.attribution;
  require_stage(ctx, "pareto", "pareto");
  require_stage(ctx, "extract", "extract");
  const auto m = detail::load_matrix(ctx);
  if (a.mode == AttributionMode::kExact && m.rows.cols() > static_cast<std::size_t>(a.max_features)) {
    throw ConfigError("exact attribution over " + std::to_string(m.rows.cols()) + " features exceeds max_features " +
                      std::to_string(a.max_features) + "; set attribution.mode to \"sampled\"");
  }
  StageWriter w(ctx, "explain");
  w.input("pareto/selected_model.json");
  w.input("pareto/selection.json");
  w.input("extract/feature_matrix.csv");
  const auto stored = read_json_file(ctx.path("pareto/selected_model.json"));
  const auto model = model_from_json(stored.at("model"));
  const auto selection = read_json_file(ctx.path("pareto/selection.json"));

  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < m.size(); ++i) row_of[m.patent_ids[i]] = i;
  std::vector<std::size_t> train;
  for (const auto& id : detail::string_vector(selection.at("training_patents"))) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw IntegrityError("selection.json names patent " + id + " absent from the feature matrix");
    train.push_back(it->second);
  }
  const auto background = sample_background(m.rows.select_rows(train), static_cast<std::size_t>(a.background_size),
                                            derive_seed(cfg.seed, "explain:background"));
  const auto rows = explanation_rows(m.size(), a.max_instances, derive_seed(cfg.seed, "explain:instances"));
  ctx.info("[explain] " + std::string(to_string(a.mode)) + " attributions for " + std::to_string(rows.size()) +
           " patents over " + std::to_string(background.rows()) + " background rows");
  const auto attrs = explain_rows(model, m, rows, background, a, cfg.seed);
  const auto values = m.rows.select_rows(rows);
  const auto global = global_summary(attrs, values);
  const auto bins = bin_attributions(attrs, values);

  w.write("attributions.csv", attributions_csv(attrs, m.feature_names.size()));
  auto g = to_json(global, m.feature_names);
  ojson summary;
  summary["model"] = selection.at("selected");
  summary["mode"] = to_string(a.mode);
  if (a.mode == AttributionMode::kSampled) summary["permutations"] = a.permutations;
  summary["background_rows"] = background.rows();
  summary["instances"] = global.count;
  summary["features"] = g["features"];
  w.write_json("global_summary.json", summary);
  w.write("summary_points.csv", summary_points_csv(global, attrs, m.feature_names));
  for (std::size_t b = 0; b < bins.size(); ++b) {
    auto j = to_json(bins[b], m.feature_names);
    ojson out;
    out["bin"] = b + 1;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value();
    w.write_json("bins/bin_" + std::to_string(b + 1) + ".json", out);
  }
  w.finish();
}

// ----------------------------------------------------------------- report

/// Checks every upstream stage record against the stored config and the
/// files on disk. Throws DataError listing missing stages and
/// IntegrityError on any hash mismatch.
inline void verify_run(const RunContext& ctx) {
  std::vector<std::string> missing;
  for (const auto& s : stage_names()) {
    if (s != "report" && !read_stage_record(ctx, s)) missing.push_back(s + "/");
  }
  if (!fs::exists(ctx.path("run_config.json"))) missing.push_back("run_config.json");
  if (!missing.empty()) {
    std::string msg = "missing stage outputs:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
  const auto stored_hash = file_sha256(ctx.path("run_config.json"));
  if (stored_hash != ctx.hash) {
    throw IntegrityError("run_config.json (sha256 " + stored_hash + ") does not match the current config (sha256 " +
                         ctx.hash + ")");
  }
  for (const auto& s : stage_names()) {
    if (s == "report") continue;
    const auto rec = *read_stage_record(ctx, s);
    const auto h = rec.value("config_hash", "");
    if (h != stored_hash) {
      throw IntegrityError(s + "/stage.json records config hash " + h + " but run_config.json hashes to " + stored_hash);
    }
    for (const auto* key : {"outputs", "inputs"}) {
      for (auto it = rec.at(key).begin(); it != rec.at(key).end(); ++it) {
        const std::string rel = it.key();
        if (rel.find(':') != std::string::npos) continue;  // external input
        const auto p = ctx.path(rel);
        if (!fs::exists(p)) throw IntegrityError(s + "/stage.json lists " + rel + ", which is missing");
        if (file_sha256(p) != it.value().get<std::string>()) {
          throw IntegrityError(rel + " differs from the hash recorded in " + s + "/stage.json");
        }
      }
    }
  }
}

/// manifest.json: config hash, versions, per-stage outputs, every file in
/// the output tree with its hash, optional timing, aggregated warnings.
inline void write_manifest(const RunContext& ctx, const ojson& warnings) {
  ojson man;
  man["config_hash"] = ctx.hash;
  man["versions"] = {{"techval", kToolVersion}, {"format", kFormatVersion}};
  man["stages"] = ojson::object();
  ojson timing = ojson::object();
  for (const auto& s : stage_names()) {
    const auto rec = *read_stage_record(ctx, s);
    auto files = ojson::array();
    for (auto it = rec.at("outputs").begin(); it != rec.at("outputs").end(); ++it) files.push_back(it.key());
    files.push_back(s + "/stage.json");
    man["stages"][s] = files;
    if (rec.contains("seconds")) timing[s] = rec.at("seconds");
  }
  man["files"] = ojson::array();
  for (const auto& rel : list_files(ctx.out, {"manifest.json"})) {
    const auto data = read_file(ctx.path(rel));
    man["files"].push_back({{"path", rel}, {"sha256", sha256_hex(data)}, {"bytes", data.size()}});
  }
  if (ctx.record_timing) man["timing_seconds"] = timing;
  man["warnings"] = warnings;
  write_file(ctx.path("manifest.json"), man.dump(2) + "\n");
}

inline void run_report(const RunContext& ctx) {
  verify_run(ctx);
  StageWriter w(ctx, "report");
  for (const auto* rel : {"extract/label_counts.json", "train_eval/candidates.json", "pareto/front.json",
                          "pareto/selection.json", "explain/global_summary.json"}) {
    w.input(rel);
  }
  const auto counts = read_json_file(ctx.path("extract/label_counts.json"));
  const auto cands = read_candidates(read_json_file(ctx.path("train_eval/candidates.json")));
  const auto front = read_json_file(ctx.path("pareto/front.json"));
  const auto selection = read_json_file(ctx.path("pareto/selection.json"));
  const auto global = read_json_file(ctx.path("explain/global_summary.json"));
  const auto selected = selection.at("selected").get<std::string>();
  std::set<std::string> on_front;
  for (const auto& id : front.at("front")) on_front.insert(id.get<std::string>());

  ojson report;
  report["config_hash"] = ctx.hash;
  report["label_counts"] = counts;
  report["metrics_table"] = ojson::array();
  std::ostringstream metrics_csv, map_csv, rel_csv, global_csv, bins_csv;
  {
    std::vector<std::string> h{"spec_id", "family"};
    h.insert(h.end(), metric_names().begin(), metric_names().end());
    csv::write_row(metrics_csv, h);
  }
  csv::write_row(map_csv, {"spec_id", "family", "f1", "mcc", "ece", "on_front", "selected"});
  csv::write_row(rel_csv, {"spec_id", "bin", "lower", "upper", "count", "mean_confidence", "positive_fraction"});
  for (const auto& c : cands) {
    ojson row{{"spec_id", c.spec.id}, {"family", to_string(c.spec.family())}, {"status", c.ok() ? "ok" : "failed"}};
    if (!c.ok()) {
      row["error"] = c.error;
      report["metrics_table"].push_back(row);
      continue;
    }
    std::vector<std::string> fields{c.spec.id, std::string(to_string(c.spec.family()))};
    for (const auto& name : metric_names()) {
      row[name] = c.cv->mean.at(name);
      fields.push_back(format_double(c.cv->mean.at(name)));
    }
    report["metrics_table"].push_back(row);
    csv::write_row(metrics_csv, fields);
    csv::write_row(map_csv, {c.spec.id, std::string(to_string(c.spec.family())), format_double(c.f1),
                             format_double(c.mcc), format_double(c.ece), on_front.count(c.spec.id) ? "true" : "false",
                             c.spec.id == selected ? "true" : "false"});
    const auto rel = "train_eval/reliability/" + slug(c.spec.id) + ".csv";
    w.input(rel);
    std::istringstream in(read_file(ctx.path(rel)));
    csv::Reader reader(in);
    reader.next();
    std::size_t b = 0;
    while (auto r = reader.next()) {
      std::vector<std::string> fields2{c.spec.id, std::to_string(++b)};
      fields2.insert(fields2.end(), r->fields.begin(), r->fields.end());
      csv::write_row(rel_csv, fields2);
    }
  }
  report["front"] = front;
  report["selection"] = {{"policy", selection.at("policy")},
                         {"selected", selected},
                         {"objectives", selection.at("objectives")},
                         {"front", selection.at("front")}};

  csv::write_row(global_csv, {"rank", "feature", "mean_abs_phi", "sign_stat"});
  for (const auto& f : global.at("features")) {
    csv::write_row(global_csv, {std::to_string(f.at("rank").get<int>()), f.at("feature").get<std::string>(),
                                format_double(f.at("mean_abs_phi").get<double>()),
                                format_double(f.at("sign_stat").get<double>())});
  }
  report["global_ranking"] = global.at("features");

  csv::write_row(bins_csv, {"bin", "lower", "upper", "count", "rank", "feature", "mean_abs_phi", "sign_stat"});
  report["bin_ranks"] = ojson::array();
  for (std::size_t b = 1; b <= default_confidence_edges().size() - 1; ++b) {
    const auto rel = "explain/bins/bin_" + std::to_string(b) + ".json";
    w.input(rel);
    const auto bin = read_json_file(ctx.path(rel));
    ojson entry{{"bin", b}, {"lower", bin.at("lower")}, {"upper", bin.at("upper")}, {"count", bin.at("count")}};
    entry["ranking"] = ojson::array();
    for (const auto& f : bin.at("features")) {
      entry["ranking"].push_back(f.at("feature"));
      csv::write_row(bins_csv, {std::to_string(b), format_double(bin.at("lower").get<double>()),
                                format_double(bin.at("upper").get<double>()),
                                std::to_string(bin.at("count").get<std::size_t>()),
                                std::to_string(f.at("rank").get<int>()), f.at("feature").get<std::string>(),
                                format_double(f.at("mean_abs_phi").get<double>()),
                                format_double(f.at("sign_stat").get<double>())});
    }
    report["bin_ranks"].push_back(entry);
  }

  ojson warnings = ojson::array();
  for (const auto& s : stage_names()) {
    if (s == "report") continue;
    for (const auto& msg : read_stage_record(ctx, s)->at("warnings")) warnings.push_back(s + ": " + msg.get<std::string>());
  }
  report["warnings"] = warnings;

  w.write_json("report.json", report);
  w.write("metrics_table.csv", metrics_csv.str());
  w.write("pareto_map.csv", map_csv.str());
  w.write("reliability.csv", rel_csv.str());
  w.write("global_importance.csv", global_csv.str());
  w.write("bin_ranks.csv", bins_csv.str());
  w.finish();
  write_manifest(ctx, warnings);
}

/// extract -> train-eval -> pareto -> explain -> report.
inline void run_all(const RunContext& ctx) {
  run_extract(ctx);
  run_train_eval(ctx);
  run_pareto(ctx);
  run_explain(ctx);
  run_report(ctx);
}

}  // namespace techval
