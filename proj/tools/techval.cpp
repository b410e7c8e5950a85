// techval: patent technology-value pipeline.
//
//   techval extract    --config run.json [--out DIR] [--seed N] [--strict]
//   techval train-eval --config run.json ...
//   techval pareto     --config run.json ...
//   techval explain    --config run.json ...
//   techval report     --config run.json ...
//   techval run        --config run.json ...   (all five stages)
//   techval generate   --out corpus.jsonl [--n 2000] [--seed N]
//
// Exit status: 0 success, 1 data or I/O error, 2 usage or config error,
// 3 integrity failure.

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

#include "techval/corpus/io.hpp"
#include "techval/pipeline/stages.hpp"
#include "techval/synthetic/generator.hpp"

using namespace techval;

namespace {

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory (default: config output_dir)");
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_flag("--strict", o.strict, "treat row diagnostics as fatal");
  cmd->add_flag("--record-timing", o.timing, "record stage wall time (outputs are then not byte-reproducible)");
}

int run_stage(const CommonOptions& o, const std::function<void(const RunContext&)>& stage) {
  auto cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  std::optional<fs::path> out;
  if (!o.out.empty()) out = fs::path(o.out);
  auto ctx = make_context(std::move(cfg), out, o.strict);
  ctx.record_timing = o.timing;
  OutputLock lock(ctx.out);
  stage(ctx);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patent technology-value pipeline"};
  app.require_subcommand(1);

  CommonOptions common;
  const std::map<std::string, std::pair<std::string, std::function<void(const RunContext&)>>> stages{
      {"extract", {"parse the corpus and compute the indicator matrix", run_extract}},
      {"train-eval", {"cross-validate the model grid", run_train_eval}},
      {"pareto", {"screen candidates and refit the selected model", run_pareto}},
      {"explain", {"Shapley attributions for the selected model", run_explain}},
      {"report", {"verify the run and write the report and manifest", run_report}},
      {"run", {"all stages in order", run_all}},
  };
  std::map<CLI::App*, std::function<void(const RunContext&)>> handlers;
  for (const auto& [name, entry] : stages) {
    auto* cmd = app.add_subcommand(name, entry.first);
    add_common(cmd, common);
    handlers[cmd] = entry.second;
  }

  SyntheticOptions gen;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "write a synthetic planted-signal corpus (JSONL)");
  generate->add_option("--out", gen_out, "output file")->required();
  generate->add_option("--n", gen.n, "number of patents")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "generator seed");
  generate->add_option("--label-noise", gen.label_noise, "label flip probability")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      write_file(gen_out, emit_canonical_jsonl(generate_synthetic(gen)));
      return 0;
    }
    for (const auto& [cmd, handler] : handlers) {
      if (cmd->parsed()) return run_stage(common, handler);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
