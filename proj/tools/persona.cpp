// Command-line driver: one subcommand per pipeline stage plus run-all.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "persona/config.hpp"
#include "persona/error.hpp"
#include "persona/genbigfive.hpp"
#include "persona/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> min_tokens;
  std::optional<double> alpha;
  std::string stats_unit;
  bool stratified = false;
  bool force = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", o.out, "Output directory (overrides paths.out)");
  cmd->add_option("--seed", o.seed, "Seed for the user split and training configs");
  cmd->add_option("--min-tokens", o.min_tokens, "Minimum whitespace tokens per text");
  cmd->add_option("--alpha", o.alpha, "Significance level for pairwise tests");
  cmd->add_option("--stats-unit", o.stats_unit, "Sampling unit for the statistical tests")
      ->check(CLI::IsMember({"per-user", "per-text"}));
  cmd->add_flag("--stratified", o.stratified, "Stratify the genre-predictor split by genre");
  cmd->add_flag("--force", o.force, "Run even if upstream outputs came from a different config");
  cmd->add_flag("-q,--quiet", o.quiet, "Suppress progress output");
}

persona::PipelineConfig resolve(const Overrides& o) {
  persona::PipelineConfig cfg = persona::load_config(o.config);
  if (!o.out.empty()) cfg.out = o.out;
  if (o.seed) {
    cfg.split_seed = *o.seed;
    cfg.traits.seed = *o.seed;
    cfg.genre.seed = *o.seed;
  }
  if (o.min_tokens) cfg.filter.min_tokens = *o.min_tokens;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (!o.stats_unit.empty()) cfg.unit = persona::parse_stats_unit(o.stats_unit);
  if (o.stratified) cfg.stratified = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personality profiling of music-genre communities"};
  app.set_version_flag("--version", std::string(persona::kVersion));
  app.require_subcommand(1);
  app.allow_extras(false);

  Overrides o;
  std::optional<persona::Stage> stage;
  bool all = false;

  for (persona::Stage s : persona::kStages) {
    const std::string name(persona::to_string(s));
    CLI::App* cmd = app.add_subcommand(name, "Run the " + name + " stage");
    add_common(cmd, o);
    cmd->callback([&stage, s] { stage = s; });
  }
  CLI::App* run_all = app.add_subcommand("run-all", "Run every stage in order");
  add_common(run_all, o);
  run_all->callback([&all] { all = true; });

  std::string templates = "data/prompt_templates.json", trait, level = "high", ending = "primary";
  CLI::App* prompt = app.add_subcommand("render-prompt", "Print a generation prompt from the template library");
  prompt->add_option("--templates", templates, "Prompt template library (JSON)")->check(CLI::ExistingFile);
  prompt->add_option("--trait", trait, "Trait code, e.g. OPN")->required();
  prompt->add_option("--level", level, "high or low")->check(CLI::IsMember({"high", "low"}));
  prompt->add_option("--ending", ending, "Ending key: primary, a, b, c");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (prompt->parsed()) {
      const auto t = persona::parse_trait(trait);
      if (!t) throw persona::UsageError("unknown trait '" + trait + "'");
      const auto lib = persona::load_prompt_library(templates);
      std::cout << persona::render_prompt(lib.make(*t, *persona::parse_level(level), ending)) << '\n';
      return 0;
    }
    persona::RunOptions opts;
    opts.force = o.force;
    opts.log = o.quiet ? nullptr : &std::cerr;
    persona::Pipeline pipeline(resolve(o), opts);
    if (all) {
      pipeline.run_all();
    } else {
      pipeline.run(*stage);
    }
    return 0;
  } catch (const persona::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const persona::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
