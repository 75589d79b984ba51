#include "persona/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "persona/corpus.hpp"
#include "persona/error.hpp"
#include "persona/format.hpp"
#include "persona/genbigfive.hpp"
#include "persona/hash.hpp"
#include "persona/profile.hpp"
#include "persona/report.hpp"
#include "persona/stats.hpp"
#include "persona/traitmodel.hpp"

namespace persona {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct StageInfo {
  Stage stage;
  std::string_view name;
};

constexpr StageInfo kStageNames[] = {
    {Stage::Ingest, "ingest"},
    {Stage::Filter, "filter"},
    {Stage::StatsCorpus, "stats-corpus"},
    {Stage::GenIngest, "gen-ingest"},
    {Stage::AnnotateEval, "annotate-eval"},
    {Stage::TrainTraits, "train-traits"},
    {Stage::EvalTraits, "eval-traits"},
    {Stage::Score, "score"},
    {Stage::Aggregate, "aggregate"},
    {Stage::Analyze, "analyze"},
    {Stage::PredictGenre, "predict-genre"},
    {Stage::Report, "report"},
};

constexpr const char* kManifest = "manifest.json";
constexpr const char* kLockFile = ".lock";
constexpr const char* kCacheDir = "cache";

std::string model_file(Trait t) { return "models/" + std::string(to_string(t)) + ".json"; }

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("'" + path.string() + "' is not valid JSON");
  return j;
}

}  // namespace

std::string_view to_string(Stage s) {
  for (const auto& info : kStageNames) {
    if (info.stage == s) return info.name;
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (const auto& info : kStageNames) {
    if (info.name == s) return info.stage;
  }
  return std::nullopt;
}

// Exclusive ownership of an output directory for the lifetime of a run.
struct Pipeline::Lock {
  fs::path path;

  explicit Lock(fs::path p) : path(std::move(p)) {
    const int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST) {
        throw UsageError("output dir is locked by another run; remove '" + path.string() +
                         "' if no run is active");
      }
      throw DataError("cannot create lock '" + path.string() + "': " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~Lock() {
    std::error_code ec;
    fs::remove(path, ec);
  }
};

Pipeline::Pipeline(PipelineConfig cfg, RunOptions opts) : cfg_(std::move(cfg)), opts_(opts) {
  cfg_.validate();
  hash_ = persona::config_hash(cfg_);
  std::error_code ec;
  fs::create_directories(cfg_.out, ec);
  if (ec || !fs::is_directory(cfg_.out)) {
    throw UsageError("cannot create output dir '" + cfg_.out.string() + "'");
  }
  lock_ = std::make_unique<Lock>(cfg_.out / kLockFile);
  const fs::path manifest = cfg_.out / kManifest;
  if (fs::exists(manifest)) {
    manifest_ = load_json(manifest);
    if (!manifest_.is_object()) manifest_ = json::object();
  } else {
    manifest_ = json::object();
  }
}

Pipeline::~Pipeline() = default;

void Pipeline::note(const std::string& message) const {
  if (opts_.log) *opts_.log << message << '\n';
}

void Pipeline::check_upstream(Stage stage, std::initializer_list<Stage> upstream) const {
  if (opts_.force) return;
  const json& stages = manifest_.contains("stages") ? manifest_["stages"] : json::object();
  for (Stage up : upstream) {
    const std::string name(to_string(up));
    if (!stages.contains(name)) continue;  // missing outputs are reported by need()
    const std::string recorded = stages[name].value("config_hash", "");
    if (recorded != hash_) {
      throw UsageError("stage '" + name + "' outputs were produced with config " + recorded +
                       " but the current config is " + hash_ + "; re-run '" + name +
                       "' or pass --force to run '" + std::string(to_string(stage)) + "' anyway");
    }
  }
}

fs::path Pipeline::need(const char* file, Stage producer, const std::string& what) const {
  fs::path p = cfg_.out / file;
  if (!fs::exists(p)) throw MissingStageError("missing " + what, std::string(to_string(producer)));
  return p;
}

void Pipeline::write_file(const std::string& rel, const std::string& content) {
  const fs::path target = cfg_.out / rel;
  fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
  stage_outputs_.push_back(rel);
}

void Pipeline::write_json(const std::string& rel, const json& j) { write_file(rel, j.dump(2) + "\n"); }

void Pipeline::record_input(const std::string& name, const fs::path& path) {
  if (path.empty()) return;
  manifest_["inputs"][name] = {{"path", path.lexically_proximate(cfg_.base_dir).generic_string()},
                               {"hash", hash_file(path)}};
}

const EmbeddingProvider& Pipeline::provider() {
  if (!provider_) {
    provider_ = make_provider(cfg_.provider, cfg_.embedding_cache ? cfg_.out / kCacheDir : fs::path());
    manifest_["provider"] = provider_->fingerprint();
    if (cfg_.provider.kind == ProviderKind::Precomputed) record_input("embeddings", cfg_.provider.path);
  }
  return *provider_;
}

void Pipeline::save_manifest(Stage stage, double seconds) {
  manifest_["tool"] = "persona";
  manifest_["version"] = std::string(kVersion);
  manifest_["config_hash"] = hash_;
  std::sort(stage_outputs_.begin(), stage_outputs_.end());
  manifest_["stages"][std::string(to_string(stage))] = {
      {"config_hash", hash_}, {"seconds", seconds}, {"outputs", stage_outputs_}};

  json files = json::array();
  std::vector<std::string> rels;
  for (const auto& entry : fs::recursive_directory_iterator(cfg_.out)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = entry.path().lexically_relative(cfg_.out).generic_string();
    if (rel == kManifest || rel == kLockFile || rel.rfind(std::string(kCacheDir) + "/", 0) == 0) continue;
    rels.push_back(rel);
  }
  std::sort(rels.begin(), rels.end());
  for (const auto& rel : rels) files.push_back({{"path", rel}, {"hash", hash_file(cfg_.out / rel)}});
  manifest_["outputs"] = files;
  if (cfg_.embedding_cache) manifest_["cache_dir"] = kCacheDir;

  const fs::path target = cfg_.out / kManifest;
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << manifest_.dump(2) << '\n';
  }
  fs::rename(tmp, target);
}

void Pipeline::run(Stage stage) {
  stage_outputs_.clear();
  const auto start = std::chrono::steady_clock::now();
  note("[" + std::string(to_string(stage)) + "]");
  write_json("config.resolved.json", {{"config_hash", hash_}, {"config", to_json(cfg_)}});
  switch (stage) {
    case Stage::Ingest: ingest(); break;
    case Stage::Filter: filter(); break;
    case Stage::StatsCorpus: stats_corpus(); break;
    case Stage::GenIngest: gen_ingest(); break;
    case Stage::AnnotateEval: annotate_eval(); break;
    case Stage::TrainTraits: train_traits(); break;
    case Stage::EvalTraits: eval_traits(); break;
    case Stage::Score: score(); break;
    case Stage::Aggregate: aggregate(); break;
    case Stage::Analyze: analyze(); break;
    case Stage::PredictGenre: predict_genre(); break;
    case Stage::Report: report(); break;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  save_manifest(stage, elapsed.count());
}

void Pipeline::run_all() {
  for (Stage s : kStages) {
    if (s == Stage::AnnotateEval && cfg_.annotations.empty()) {
      note("[annotate-eval] skipped: no annotations configured");
      continue;
    }
    run(s);
  }
}

// --- corpus stages ---------------------------------------------------------

void Pipeline::ingest() {
  if (cfg_.corpus.empty()) throw UsageError("no corpus configured (paths.corpus)");
  record_input("corpus", cfg_.corpus);
  LoadResult loaded = load_corpus(cfg_.corpus, cfg_.schema);
  write_corpus(loaded.corpus, cfg_.out / "corpus.jsonl", cfg_.schema);
  stage_outputs_.push_back("corpus.jsonl");
  json rejections = json::array();
  for (const auto& r : loaded.report.rejections) rejections.push_back({{"line", r.line}, {"reason", r.reason}});
  write_json("load_report.json", {{"lines", loaded.report.lines},
                                  {"accepted", loaded.report.accepted},
                                  {"rejected", loaded.report.rejected},
                                  {"rejections", rejections}});
  note("  accepted " + std::to_string(loaded.report.accepted) + " of " +
       std::to_string(loaded.report.lines) + " lines");
}

void Pipeline::filter() {
  check_upstream(Stage::Filter, {Stage::Ingest});
  const fs::path in = need("corpus.jsonl", Stage::Ingest, "ingested corpus");
  Corpus corpus = load_corpus(in, cfg_.schema).corpus;
  FilterConfig fc = cfg_.filter;
  if (!cfg_.blocklist.empty()) {
    record_input("blocklist", cfg_.blocklist);
    auto extra = read_blocklist(cfg_.blocklist);
    fc.blocklist.insert(extra.begin(), extra.end());
  }
  FilterResult result = filter_corpus(corpus, fc);
  write_corpus(result.corpus, cfg_.out / "filtered.jsonl", cfg_.schema);
  stage_outputs_.push_back("filtered.jsonl");
  write_json("filter_report.json", {{"input", result.report.input},
                                    {"removed_blocklist", result.report.removed_blocklist},
                                    {"removed_length", result.report.removed_length},
                                    {"removed_dedup", result.report.removed_dedup},
                                    {"kept", result.report.kept}});
  note("  kept " + std::to_string(result.report.kept) + " of " + std::to_string(result.report.input));
}

namespace {

Corpus filtered_corpus(const fs::path& path, const CorpusSchema& schema) {
  LoadResult r = load_corpus(path, schema);
  if (r.report.rejected != 0) {
    throw DataError("'" + path.string() + "' has " + std::to_string(r.report.rejected) + " invalid lines");
  }
  return std::move(r.corpus);
}

}  // namespace

void Pipeline::stats_corpus() {
  check_upstream(Stage::StatsCorpus, {Stage::Filter});
  const Corpus corpus = filtered_corpus(need("filtered.jsonl", Stage::Filter, "filtered corpus"), cfg_.schema);
  std::ostringstream stats, dist;
  write_corpus_stats_csv(corpus_stats(corpus), stats);
  write_subreddit_csv(subreddit_distribution(corpus, cfg_.top_subreddits), dist);
  write_file("corpus_stats.csv", stats.str());
  write_file("subreddit_distribution.csv", dist.str());
}

// --- generated passages ----------------------------------------------------

void Pipeline::gen_ingest() {
  if (cfg_.passages.empty() && cfg_.pools.empty()) {
    throw UsageError("no passages configured (paths.passages or paths.pools)");
  }
  std::vector<LabeledPassage> all;
  json reports = json::array();
  if (!cfg_.passages.empty()) {
    record_input("passages", cfg_.passages);
    IngestResult r = load_passages(cfg_.passages);
    all = std::move(r.passages);
  }
  for (std::size_t i = 0; i < cfg_.pools.size(); ++i) {
    const auto& pool = cfg_.pools[i];
    record_input("pool" + std::to_string(i), pool.file);
    IngestResult r = ingest_passages(pool.file, pool.trait, pool.level, pool.generator);
    reports.push_back({{"file", pool.file.lexically_proximate(cfg_.base_dir).generic_string()},
                       {"lines", r.report.lines},
                       {"kept", r.report.kept},
                       {"dropped_empty", r.report.dropped_empty},
                       {"dropped_duplicate", r.report.dropped_duplicate},
                       {"dropped_malformed", r.report.dropped_malformed}});
    all.insert(all.end(), r.passages.begin(), r.passages.end());
  }
  std::set<std::string> ids;
  for (const auto& p : all) {
    if (!ids.insert(p.passage_id).second) {
      throw DataError("duplicate passage id '" + p.passage_id +
                      "'; merge pools that share trait, level and generator");
    }
  }
  write_passages(all, cfg_.out / "passages.jsonl");
  stage_outputs_.push_back("passages.jsonl");
  std::ostringstream stats;
  write_dataset_stats_csv(dataset_stats(all), stats);
  write_file("gen_stats.csv", stats.str());
  if (!cfg_.pools.empty()) write_json("gen_ingest_report.json", reports);
}

void Pipeline::annotate_eval() {
  check_upstream(Stage::AnnotateEval, {Stage::GenIngest});
  if (cfg_.annotations.empty()) throw UsageError("no annotations configured (paths.annotations)");
  record_input("annotations", cfg_.annotations);
  const auto passages = load_passages(need("passages.jsonl", Stage::GenIngest, "passages")).passages;
  std::map<std::string, Level> intended;
  for (const auto& p : passages) intended.emplace(p.passage_id, p.level);

  const auto records = read_annotations(cfg_.annotations);
  std::vector<std::string> skipped;
  const auto adjudicated = adjudicate(records, &skipped);
  std::map<std::string, Level> reference;
  for (const auto& [id, level] : adjudicated) {
    auto it = intended.find(id);
    if (it == intended.end()) throw DataError("annotation for unknown passage '" + id + "'");
    reference.emplace(id, it->second);
  }
  const PairwiseKappa kappa = mean_pairwise_kappa(records);
  json j = {{"annotations", records.size()},
            {"adjudicated", adjudicated.size()},
            {"skipped", skipped},
            {"agreement_with_intended", adjudicated.empty() ? json() : json(agreement_rate(adjudicated, reference))},
            {"mean_pairwise_kappa", kappa.pairs_used ? json(kappa.mean) : json()},
            {"kappa_pairs_used", kappa.pairs_used},
            {"kappa_pairs_skipped", kappa.pairs_skipped}};
  write_json("agreement.json", j);
}

// --- trait models ----------------------------------------------------------

void Pipeline::train_traits() {
  check_upstream(Stage::TrainTraits, {Stage::GenIngest});
  const auto passages = load_passages(need("passages.jsonl", Stage::GenIngest, "passages")).passages;
  const EmbeddingProvider& prov = provider();
  std::ostringstream summary;
  summary << "trait,n_train,iterations,converged,final_loss\n";
  for (Trait t : kTraits) {
    const auto pool = select_passages(passages, t, Generator::TrainGen);
    if (pool.empty()) throw DataError("no train-gen passages for trait " + std::string(to_string(t)));
    FitResult fit = train(pool, prov, cfg_.traits);
    fs::create_directories(cfg_.out / "models");
    save_model(fit.model, cfg_.out / model_file(t));
    stage_outputs_.push_back(model_file(t));
    summary << to_string(t) << ',' << pool.size() << ',' << fit.trace.iterations << ','
            << (fit.trace.converged ? "true" : "false") << ',' << fixed(fit.trace.losses.back()) << '\n';
    note("  " + std::string(to_string(t)) + ": " + std::to_string(pool.size()) + " passages, " +
         std::to_string(fit.trace.iterations) + " iterations");
  }
  write_file("train_traits.csv", summary.str());
}

namespace {

TraitModels load_models(const fs::path& out) {
  TraitModels models;
  for (Trait t : kTraits) {
    const fs::path p = out / model_file(t);
    if (!fs::exists(p)) throw MissingStageError("missing models", "train-traits");
    models[index_of(t)] = load_model(p);
  }
  return models;
}

}  // namespace

void Pipeline::eval_traits() {
  check_upstream(Stage::EvalTraits, {Stage::TrainTraits, Stage::GenIngest});
  const TraitModels models = load_models(cfg_.out);
  const auto passages = load_passages(need("passages.jsonl", Stage::GenIngest, "passages")).passages;
  const EmbeddingProvider& prov = provider();
  std::vector<EvalResult> results;
  for (Trait t : kTraits) {
    const auto pool = select_passages(passages, t, Generator::TestGen);
    if (pool.empty()) {
      note("  " + std::string(to_string(t)) + ": no test-gen passages; skipped");
      continue;
    }
    results.push_back(evaluate(models[index_of(t)], pool, prov));
  }
  std::ostringstream out;
  write_eval_csv(results, out);
  write_file("eval_traits.csv", out.str());
}

// --- scoring and analysis --------------------------------------------------

void Pipeline::score() {
  check_upstream(Stage::Score, {Stage::Filter, Stage::TrainTraits});
  const Corpus corpus = filtered_corpus(need("filtered.jsonl", Stage::Filter, "filtered corpus"), cfg_.schema);
  const TraitModels models = load_models(cfg_.out);
  const auto scores = score_corpus(corpus, models, provider());
  std::ostringstream out;
  write_text_scores_csv(scores, corpus, out);
  write_file("text_scores.csv", out.str());
}

void Pipeline::aggregate() {
  check_upstream(Stage::Aggregate, {Stage::Score, Stage::Filter});
  const Corpus corpus = filtered_corpus(need("filtered.jsonl", Stage::Filter, "filtered corpus"), cfg_.schema);
  const auto scores = read_text_scores_csv(need("text_scores.csv", Stage::Score, "text scores"));
  const auto users = user_means(scores, corpus);
  std::vector<std::string> warnings;
  const auto genres = genre_means(users, &warnings);
  for (const auto& w : warnings) note("  warning: " + w);
  std::ostringstream u, g;
  write_user_traits_csv(users, u);
  write_genre_traits_csv(genres, g);
  write_file("user_traits.csv", u.str());
  write_file("genre_traits.csv", g.str());
}

void Pipeline::analyze() {
  // Groups[trait][genre] holds one value per sampling unit.
  std::array<std::array<std::vector<double>, kNumGenres>, kNumTraits> groups;
  if (cfg_.unit == StatsUnit::PerUser) {
    check_upstream(Stage::Analyze, {Stage::Aggregate});
    for (const auto& u : read_user_traits_csv(need("user_traits.csv", Stage::Aggregate, "user trait means"))) {
      for (std::size_t t = 0; t < kNumTraits; ++t) groups[t][index_of(u.genre)].push_back(u.means[t]);
    }
  } else {
    check_upstream(Stage::Analyze, {Stage::Score, Stage::Filter});
    const Corpus corpus = filtered_corpus(need("filtered.jsonl", Stage::Filter, "filtered corpus"), cfg_.schema);
    std::map<std::string, Genre> genre_of;
    for (const auto& s : corpus.samples) genre_of.emplace(s.sample_id, s.genre);
    for (const auto& s : read_text_scores_csv(need("text_scores.csv", Stage::Score, "text scores"))) {
      auto it = genre_of.find(s.sample_id);
      if (it == genre_of.end()) throw DataError("score for unknown sample '" + s.sample_id + "'");
      for (std::size_t t = 0; t < kNumTraits; ++t) groups[t][index_of(it->second)].push_back(s.scores[t]);
    }
  }

  std::ostringstream anova, pairwise, bonferroni;
  write_anova_csv_header(anova);
  write_pairwise_csv_header(pairwise);
  write_bonferroni_csv_header(bonferroni);
  for (Trait t : kTraits) {
    std::vector<GenreGroup> present;
    std::vector<std::vector<double>> samples;
    for (Genre g : kGenres) {
      const auto& values = groups[index_of(t)][index_of(g)];
      if (values.empty()) continue;
      present.push_back({g, values});
      samples.push_back(values);
    }
    if (present.size() < 2) throw DataError("analysis needs at least two genres with data");
    write_anova_csv_row(t, anova_oneway(samples), anova);
    const EffectMatrix m = pairwise_matrix(t, present, cfg_.alpha);
    write_pairwise_csv_rows(m, pairwise);
    write_bonferroni_csv_rows(m, bonferroni);
  }
  write_file("anova.csv", anova.str());
  write_file("pairwise.csv", pairwise.str());
  write_file("pairwise_bonferroni.csv", bonferroni.str());
}

void Pipeline::predict_genre() {
  check_upstream(Stage::PredictGenre, {Stage::Aggregate});
  const auto users = read_user_traits_csv(need("user_traits.csv", Stage::Aggregate, "user trait means"));
  const UserSplit split = split_users(users, cfg_.train_frac, cfg_.split_seed, cfg_.stratified);
  if (split.test.empty()) throw DataError("the split leaves no test users");
  GenreFit fit = train_genre_predictor(split.train, cfg_.genre);
  const GenreEval eval = evaluate_genre_predictor(fit.model, split.test);
  save_genre_predictor(fit.model, cfg_.out / "genre_predictor.json");
  stage_outputs_.push_back("genre_predictor.json");

  std::array<std::size_t, kNumGenres> train_counts{};
  for (const auto& u : split.train) ++train_counts[index_of(u.genre)];
  const auto majority = static_cast<std::size_t>(
      std::max_element(train_counts.begin(), train_counts.end()) - train_counts.begin());
  const double majority_acc =
      static_cast<double>(eval.per_genre[majority].support) / static_cast<double>(eval.n_test);

  std::ostringstream csv;
  write_genre_eval_csv(eval, csv);
  write_file("genre_prediction.csv", csv.str());
  write_json("genre_prediction.json", {{"accuracy", eval.accuracy},
                                       {"n_train", split.train.size()},
                                       {"n_test", eval.n_test},
                                       {"chance_baseline", 1.0 / static_cast<double>(kNumGenres)},
                                       {"majority_baseline", majority_acc},
                                       {"iterations", fit.trace.iterations},
                                       {"converged", fit.trace.converged},
                                       {"seed", cfg_.split_seed},
                                       {"stratified", cfg_.stratified}});
  note("  accuracy " + fixed(eval.accuracy, 3) + " on " + std::to_string(eval.n_test) + " users");
}

// --- report ----------------------------------------------------------------

void Pipeline::report() {
  check_upstream(Stage::Report, {Stage::StatsCorpus, Stage::GenIngest, Stage::EvalTraits,
                                 Stage::Aggregate, Stage::Analyze, Stage::PredictGenre});
  const CsvTable corpus = read_csv_table(need("corpus_stats.csv", Stage::StatsCorpus, "corpus statistics"));
  const CsvTable dataset = read_csv_table(need("gen_stats.csv", Stage::GenIngest, "dataset statistics"));
  const CsvTable accuracy = read_csv_table(need("eval_traits.csv", Stage::EvalTraits, "trait evaluation"));
  const CsvTable anova = read_csv_table(need("anova.csv", Stage::Analyze, "ANOVA results"));
  const auto genres = read_genre_traits_csv(need("genre_traits.csv", Stage::Aggregate, "genre trait means"));
  const auto matrices = read_pairwise_csv(need("pairwise.csv", Stage::Analyze, "pairwise tests"), cfg_.alpha);
  const json prediction = load_json(need("genre_prediction.json", Stage::PredictGenre, "genre prediction"));

  std::ostringstream fig2, fig3;
  write_fig2_csv(genres, fig2);
  write_fig3_csv(matrices, fig3);
  write_file("report/fig2_genre_traits.csv", fig2.str());
  write_file("report/fig2_genre_traits.svg", genre_trait_chart_svg(genres));
  write_file("report/fig3_effects.csv", fig3.str());
  write_file("report/fig3_effects.svg", effect_heatmap_svg(matrices));

  std::ostringstream md;
  md << "# Personality by music-genre community\n\n";
  md << "Config hash `" << hash_ << "`, analysis unit " << to_string(cfg_.unit) << ", alpha "
     << fixed(cfg_.alpha, 3) << ".\n\n";
  md << "## Corpus\n\n" << markdown_table(corpus) << '\n';
  md << "## Generated passages\n\n" << markdown_table(dataset) << '\n';
  md << "## Trait classifier accuracy (test-gen pools)\n\n" << markdown_table(accuracy) << '\n';
  md << "## Community trait means\n\n![genre trait means](fig2_genre_traits.svg)\n\n"
     << markdown_table(read_csv_table(cfg_.out / "report/fig2_genre_traits.csv")) << '\n';
  md << "## Between-community tests\n\n" << markdown_table(anova) << '\n';
  md << "![pairwise effect sizes](fig3_effects.svg)\n\n";
  md << "Pairwise cells use Mann-Whitney p without multiple-comparison correction; "
        "pairwise_bonferroni.csv holds the corrected values.\n\n";
  md << "## Genre prediction\n\n";
  md << "Accuracy " << fixed(prediction.at("accuracy").get<double>(), 3) << " on "
     << prediction.at("n_test").get<std::size_t>() << " held-out users (chance "
     << fixed(prediction.at("chance_baseline").get<double>(), 3) << ", majority class "
     << fixed(prediction.at("majority_baseline").get<double>(), 3) << ").\n";
  write_file("report/report.md", md.str());
}

}  // namespace persona
