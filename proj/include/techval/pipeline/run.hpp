#pragma once

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "techval/pipeline/config.hpp"

namespace techval {

/// A stored artifact disagrees with the hashes recorded when it was written.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

/// Exclusive lock on an output directory, released on destruction.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw IoError("output directory is locked by another run (" + path_.string() +
                    "); remove the file if no run is active");
    }
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

struct RunContext {
  RunConfig config;
  fs::path out;
  bool strict = false;
  bool record_timing = false;
  std::string hash;
  std::ostream* log = &std::cerr;

  fs::path path(const std::string& rel) const { return out / rel; }
  void info(const std::string& msg) const {
    if (log) *log << msg << '\n';
  }
};

inline RunContext make_context(RunConfig cfg, std::optional<fs::path> out_override = {}, bool strict = false) {
  validate(cfg);
  RunContext ctx;
  ctx.out = out_override ? *out_override : cfg.resolve(cfg.output_dir);
  ctx.hash = config_hash(cfg);
  ctx.strict = strict;
  ctx.config = std::move(cfg);
  return ctx;
}

/// Output paths of a file tree relative to `root`, sorted, skipping the lock
/// and anything `skip` names.
inline std::vector<std::string> list_files(const fs::path& root, const std::vector<std::string>& skip = {}) {
  std::vector<std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    auto rel = fs::relative(e.path(), root).generic_string();
    if (rel == ".lock" || std::find(skip.begin(), skip.end(), rel) != skip.end()) continue;
    out.push_back(std::move(rel));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string file_sha256(const fs::path& p) { return sha256_hex(read_file(p)); }

/// Collects the files one stage writes and records them, with the hashes of
/// the inputs it read, in <stage>/stage.json.
class StageWriter {
 public:
  StageWriter(const RunContext& ctx, std::string stage) : ctx_(ctx), stage_(std::move(stage)) {
    fs::remove_all(ctx_.path(stage_));
    fs::create_directories(ctx_.path(stage_));
    write_file(ctx_.path("run_config.json"), normalized_config_text(ctx_.config));
    start_ = std::chrono::steady_clock::now();
  }

  void input(const std::string& rel) { inputs_[rel] = file_sha256(ctx_.path(rel)); }
  void external_input(const std::string& name, std::string sha) { inputs_[name] = std::move(sha); }

  void write(const std::string& name, const std::string& contents) {
    const auto rel = stage_ + "/" + name;
    write_file(ctx_.path(rel), contents);
    outputs_[rel] = sha256_hex(contents);
  }
  void write_json(const std::string& name, const ojson& j) { write(name, j.dump(2) + "\n"); }
  void warn(std::string w) {
    ctx_.info("[" + stage_ + "] warning: " + w);
    warnings_.push_back(std::move(w));
  }

  void finish() {
    ojson j;
    j["stage"] = stage_;
    j["config_hash"] = ctx_.hash;
    j["inputs"] = ojson::object();
    for (const auto& [k, v] : inputs_) j["inputs"][k] = v;
    j["outputs"] = ojson::object();
    for (const auto& [k, v] : outputs_) j["outputs"][k] = v;
    j["warnings"] = warnings_;
    if (ctx_.record_timing) {
      j["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    write_file(ctx_.path(stage_ + "/stage.json"), j.dump(2) + "\n");
  }

 private:
  const RunContext& ctx_;
  std::string stage_;
  std::map<std::string, std::string> inputs_, outputs_;
  std::vector<std::string> warnings_;
  std::chrono::steady_clock::time_point start_;
};

inline std::optional<ojson> read_stage_record(const RunContext& ctx, const std::string& stage) {
  const auto p = ctx.path(stage + "/stage.json");
  if (!fs::exists(p)) return std::nullopt;
  try {
    return ojson::parse(read_file(p));
  } catch (const nlohmann::json::exception&) {
    throw IntegrityError(stage + "/stage.json is not valid JSON");
  }
}

inline bool stage_current(const RunContext& ctx, const std::string& stage) {
  auto rec = read_stage_record(ctx, stage);
  return rec && rec->value("config_hash", "") == ctx.hash;
}

/// Throws unless `stage` completed under the current config.
inline void require_stage(const RunContext& ctx, const std::string& stage, const std::string& producer) {
  auto rec = read_stage_record(ctx, stage);
  if (!rec) throw DataError("missing stage outputs: " + stage + "/ (run '" + producer + "' first)");
  if (rec->value("config_hash", "") != ctx.hash) {
    throw DataError(stage + "/ was produced under a different config (hash " + rec->value("config_hash", "") +
                    "); rerun '" + producer + "'");
  }
}

inline ojson read_json_file(const fs::path& p) {
  try {
    return ojson::parse(read_file(p));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(p.filename().string() + ": invalid JSON: " + e.what());
  }
}

/// File-system-safe form of a spec id: "RF #1" -> "RF_1".
inline std::string slug(const std::string& id) {
  std::string out;
  for (char c : id) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(c);
    } else if (c == ' ' && (out.empty() || out.back() != '_')) {
      out.push_back('_');
    }
  }
  return out;
}

}  // namespace techval
