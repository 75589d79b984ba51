#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "persona/config.hpp"
#include "persona/embedding.hpp"

namespace persona {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Stage {
  Ingest,
  Filter,
  StatsCorpus,
  GenIngest,
  AnnotateEval,
  TrainTraits,
  EvalTraits,
  Score,
  Aggregate,
  Analyze,
  PredictGenre,
  Report,
};

inline constexpr std::array<Stage, 12> kStages = {
    Stage::Ingest,      Stage::Filter,    Stage::StatsCorpus, Stage::GenIngest,
    Stage::AnnotateEval, Stage::TrainTraits, Stage::EvalTraits, Stage::Score,
    Stage::Aggregate,   Stage::Analyze,   Stage::PredictGenre, Stage::Report,
};

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

struct RunOptions {
  bool force = false;             // run even if upstream outputs came from another config
  std::ostream* log = nullptr;    // progress and warnings; null for silence
};

// One run over an output directory. Construction validates the config,
// creates the directory and takes its lock; destruction releases the lock.
// Each stage reads its predecessors' outputs from the directory and records
// itself in manifest.json.
class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, RunOptions opts = {});
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  void run(Stage stage);
  // Every stage in order; annotate-eval is skipped when no annotations are
  // configured.
  void run_all();

  const std::filesystem::path& out_dir() const { return cfg_.out; }
  const std::string& config_hash() const { return hash_; }

 private:
  struct Lock;

  void check_upstream(Stage stage, std::initializer_list<Stage> upstream) const;
  std::filesystem::path need(const char* file, Stage producer, const std::string& what) const;
  void write_file(const std::string& rel, const std::string& content);
  void write_json(const std::string& rel, const nlohmann::json& j);
  const EmbeddingProvider& provider();
  void record_input(const std::string& name, const std::filesystem::path& path);
  void note(const std::string& message) const;
  void save_manifest(Stage stage, double seconds);

  void ingest();
  void filter();
  void stats_corpus();
  void gen_ingest();
  void annotate_eval();
  void train_traits();
  void eval_traits();
  void score();
  void aggregate();
  void analyze();
  void predict_genre();
  void report();

  PipelineConfig cfg_;
  RunOptions opts_;
  std::string hash_;
  std::unique_ptr<Lock> lock_;
  nlohmann::json manifest_;
  std::vector<std::string> stage_outputs_;
  std::shared_ptr<const EmbeddingProvider> provider_;
};

}  // namespace persona
