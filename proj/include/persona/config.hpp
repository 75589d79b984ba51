#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "persona/corpus.hpp"
#include "persona/embedding.hpp"
#include "persona/traitmodel.hpp"
#include "persona/types.hpp"

namespace persona {

enum class StatsUnit { PerUser, PerText };

std::string_view to_string(StatsUnit unit);
StatsUnit parse_stats_unit(std::string_view s);

// One raw generated pool: a text file of passages sharing trait, level and
// generator.
struct PassagePool {
  std::filesystem::path file;
  Trait trait = Trait::OPN;
  Level level = Level::High;
  Generator generator = Generator::TrainGen;
};

struct PipelineConfig {
  // Inputs. Relative paths in a config file resolve against its directory.
  std::filesystem::path corpus;
  std::filesystem::path blocklist;    // optional
  std::filesystem::path passages;     // labeled JSONL; alternative to pools
  std::vector<PassagePool> pools;
  std::filesystem::path annotations;  // optional
  std::filesystem::path out = "out";
  std::filesystem::path base_dir = ".";  // directory the config was read from

  CorpusSchema schema;
  FilterConfig filter;  // the blocklist file is merged in at load time
  ProviderConfig provider;
  bool embedding_cache = false;  // cache vectors under <out>/cache

  TrainConfig traits;
  TrainConfig genre;
  double train_frac = 0.8;
  std::uint64_t split_seed = 0;
  bool stratified = false;

  double alpha = 0.05;
  StatsUnit unit = StatsUnit::PerUser;
  std::size_t top_subreddits = 20;

  // Throws UsageError on out-of-range values or missing input files.
  void validate() const;
};

// Reads a JSON config. Unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Resolved snapshot. Input paths are written relative to base_dir and the
// output dir is left out, so the snapshot and its hash do not depend on where
// a run writes.
nlohmann::json to_json(const PipelineConfig& cfg);
std::string config_hash(const PipelineConfig& cfg);

}  // namespace persona
