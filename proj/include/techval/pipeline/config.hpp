#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "techval/core/fs.hpp"
#include "techval/corpus/io.hpp"
#include "techval/indicators/indicators.hpp"
#include "techval/models/io.hpp"
#include "techval/screening/grid.hpp"
#include "techval/screening/pareto.hpp"

namespace techval {

enum class AttributionMode { kExact, kSampled };

inline std::string_view to_string(AttributionMode m) { return m == AttributionMode::kExact ? "exact" : "sampled"; }

inline AttributionMode parse_attribution_mode(std::string_view s) {
  if (s == "exact") return AttributionMode::kExact;
  if (s == "sampled") return AttributionMode::kSampled;
  throw ConfigError("unknown attribution mode '" + std::string(s) + "' (expected exact or sampled)");
}

struct AttributionConfig {
  AttributionMode mode = AttributionMode::kSampled;
  int permutations = 10;
  int background_size = 100;
  int max_instances = 200;  // 0 explains every labeled patent
  int max_features = 20;    // exact-mode budget
};

/// Grid entry as written in the config; the seed defaults to one derived
/// from the run seed and the entry id.
struct GridEntry {
  std::string id;
  Hyperparams params;
  std::optional<std::uint64_t> seed;
};

struct RunConfig {
  fs::path base_dir;  // directory of the config file; relative paths resolve here
  std::string corpus_path;
  CorpusFormat corpus_format = CorpusFormat::kJsonl;
  FieldConfig field;
  std::optional<std::string> embedding_path;
  LabelPolicy label_policy;
  bool resample = true;
  int k = 10;
  std::uint64_t seed = 0;
  std::optional<std::vector<GridEntry>> grid;  // nullopt = named default grid
  int ece_bins = 10;
  double f1_floor = 0.9;
  SelectionPolicy selection_policy = SelectionPolicy::kKnee;
  AttributionConfig attribution;
  std::string output_dir = "out";

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
  fs::path corpus() const { return resolve(corpus_path); }
};

inline std::vector<ModelSpec> resolve_grid(const RunConfig& cfg) {
  if (!cfg.grid) return default_grid(cfg.seed);
  std::vector<ModelSpec> out;
  for (const auto& e : *cfg.grid) out.push_back({e.id, e.params, e.seed.value_or(derive_seed(cfg.seed, "model:" + e.id))});
  return out;
}

/// Throws ConfigError on the first invalid value or unresolvable path.
inline void validate(const RunConfig& cfg) {
  if (cfg.k < 2) throw ConfigError("k must be at least 2");
  if (cfg.ece_bins < 1) throw ConfigError("ece_bins must be positive");
  if (!(cfg.f1_floor >= 0.0 && cfg.f1_floor <= 1.0)) throw ConfigError("f1_floor must be in [0, 1]");
  if (cfg.label_policy.nvp_lifetime_years < 0) throw ConfigError("nvp_lifetime_years must be non-negative");
  const auto& a = cfg.attribution;
  if (a.permutations < 1) throw ConfigError("attribution.permutations must be positive");
  if (a.background_size < 1) throw ConfigError("attribution.background_size must be positive");
  if (a.max_instances < 0) throw ConfigError("attribution.max_instances must be non-negative");
  if (a.max_features < 1) throw ConfigError("attribution.max_features must be positive");
  if (cfg.grid) {
    if (cfg.grid->empty()) throw ConfigError("grid is empty");
    std::set<std::string> ids;
    for (const auto& e : *cfg.grid) {
      if (e.id.empty()) throw ConfigError("grid entry without id");
      if (!ids.insert(e.id).second) throw ConfigError("duplicate grid id '" + e.id + "'");
      std::visit([](const auto& p) { validate(p); }, e.params);
    }
  }
  if (cfg.corpus_path.empty()) throw ConfigError("corpus.path is required");
  if (!fs::exists(cfg.corpus())) throw ConfigError("corpus path does not exist: " + cfg.corpus().string());
  if (cfg.field.embedding_source == EmbeddingSource::kExternalFile) {
    if (!cfg.embedding_path) throw ConfigError("embedding_source external-file requires field.embedding_path");
    if (!fs::exists(cfg.resolve(*cfg.embedding_path))) {
      throw ConfigError("embedding file does not exist: " + cfg.resolve(*cfg.embedding_path).string());
    }
  }
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is empty");
}

namespace detail {
inline bool is_nonnegative_integer(const ojson& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}
}  // namespace detail

inline RunConfig config_from_json(const ojson& j, const fs::path& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  detail::FieldReader top(j, "config");

  ojson corpus = ojson::object(), field = ojson::object(), label = ojson::object(), attribution = ojson::object();
  ojson grid = "default", seed;
  std::string selection = "knee";
  top.get("corpus", corpus);
  top.get("field", field);
  top.get("label_policy", label);
  top.get("resample", cfg.resample);
  top.get("k", cfg.k);
  top.get("seed", seed);
  top.get("grid", grid);
  top.get("ece_bins", cfg.ece_bins);
  top.get("f1_floor", cfg.f1_floor);
  top.get("selection_policy", selection);
  top.get("attribution", attribution);
  top.get("output_dir", cfg.output_dir);
  top.finish();

  if (!detail::is_nonnegative_integer(seed)) throw ConfigError("config: 'seed' is required and must be a non-negative integer");
  cfg.seed = seed.get<std::uint64_t>();
  cfg.selection_policy = parse_selection_policy(selection);

  {
    detail::FieldReader r(corpus, "config.corpus");
    std::string format = "jsonl";
    r.get("path", cfg.corpus_path);
    r.get("format", format);
    r.finish();
    cfg.corpus_format = parse_corpus_format(format);
  }
  {
    detail::FieldReader r(field, "config.field");
    std::string level = "subclass", source = "lexical-fallback";
    ojson emb;
    r.get("focal_field", cfg.field.focal_field);
    r.get("ipc_level", level);
    r.get("embedding_source", source);
    r.get("embedding_path", emb);
    r.finish();
    cfg.field.ipc_level = parse_ipc_level(level);
    cfg.field.embedding_source = parse_embedding_source(source);
    if (emb.is_string()) {
      cfg.embedding_path = emb.get<std::string>();
    } else if (!emb.is_null()) {
      throw ConfigError("config.field: 'embedding_path' must be a string or null");
    }
    if (cfg.field.focal_field.empty()) throw ConfigError("config.field: 'focal_field' is empty");
  }
  {
    detail::FieldReader r(label, "config.label_policy");
    r.get("nvp_lifetime_years", cfg.label_policy.nvp_lifetime_years);
    r.finish();
  }
  {
    detail::FieldReader r(attribution, "config.attribution");
    std::string mode = "sampled";
    r.get("mode", mode);
    r.get("permutations", cfg.attribution.permutations);
    r.get("background_size", cfg.attribution.background_size);
    r.get("max_instances", cfg.attribution.max_instances);
    r.get("max_features", cfg.attribution.max_features);
    r.finish();
    cfg.attribution.mode = parse_attribution_mode(mode);
  }
  if (grid.is_string()) {
    if (grid.get<std::string>() != "default") throw ConfigError("config: unknown named grid '" + grid.get<std::string>() + "'");
  } else if (grid.is_array()) {
    cfg.grid.emplace();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto where = "config.grid[" + std::to_string(i) + "]";
      detail::FieldReader r(grid[i], where);
      GridEntry e;
      std::string family;
      ojson hp = ojson::object(), s;
      r.get("id", e.id);
      r.get("family", family);
      r.get("hyperparams", hp);
      r.get("seed", s);
      r.finish();
      if (family.empty()) throw ConfigError(where + ": missing 'family'");
      e.params = hyperparams_from_json(parse_family(family), hp, where + ".hyperparams");
      if (detail::is_nonnegative_integer(s)) {
        e.seed = s.get<std::uint64_t>();
      } else if (!s.is_null()) {
        throw ConfigError(where + ": 'seed' must be a non-negative integer");
      }
      cfg.grid->push_back(std::move(e));
    }
  } else {
    throw ConfigError("config: 'grid' must be \"default\" or a list of specs");
  }
  return cfg;
}

inline RunConfig load_config(const fs::path& path) {
  ojson j;
  try {
    j = ojson::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.filename().string() + ": invalid JSON: " + e.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

/// Normalized form written to run_config.json: every field explicit, paths
/// exactly as given. The output directory is not part of a run's identity
/// and is left out.
inline ojson to_json(const RunConfig& cfg) {
  ojson j;
  j["corpus"] = {{"path", cfg.corpus_path}, {"format", to_string(cfg.corpus_format)}};
  j["field"] = {{"focal_field", cfg.field.focal_field},
                {"ipc_level", to_string(cfg.field.ipc_level)},
                {"embedding_source", to_string(cfg.field.embedding_source)},
                {"embedding_path", cfg.embedding_path ? ojson(*cfg.embedding_path) : ojson()}};
  j["label_policy"] = {{"nvp_lifetime_years", cfg.label_policy.nvp_lifetime_years}};
  j["resample"] = cfg.resample;
  j["k"] = cfg.k;
  j["seed"] = cfg.seed;
  if (cfg.grid) {
    j["grid"] = ojson::array();
    for (const auto& e : *cfg.grid) {
      ojson g{{"id", e.id}, {"family", to_string(family_of(e.params))}, {"hyperparams", hyperparams_to_json(e.params)}};
      if (e.seed) g["seed"] = *e.seed;
      j["grid"].push_back(g);
    }
  } else {
    j["grid"] = "default";
  }
  j["ece_bins"] = cfg.ece_bins;
  j["f1_floor"] = cfg.f1_floor;
  j["selection_policy"] = to_string(cfg.selection_policy);
  j["attribution"] = {{"mode", to_string(cfg.attribution.mode)},
                      {"permutations", cfg.attribution.permutations},
                      {"background_size", cfg.attribution.background_size},
                      {"max_instances", cfg.attribution.max_instances},
                      {"max_features", cfg.attribution.max_features}};
  return j;
}

inline std::string normalized_config_text(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

inline std::string config_hash(const RunConfig& cfg) { return sha256_hex(normalized_config_text(cfg)); }

}  // namespace techval
