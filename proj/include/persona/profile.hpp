#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "persona/corpus.hpp"
#include "persona/embedding.hpp"
#include "persona/logistic.hpp"
#include "persona/traitmodel.hpp"
#include "persona/types.hpp"

namespace persona {

using TraitScores = std::array<double, kNumTraits>;  // canonical trait order
using TraitModels = std::array<TraitClassifier, kNumTraits>;

struct TextScore {
  std::string sample_id;
  TraitScores scores{};
};

// Embeds every text once and applies all five models. Throws before any
// embedding work if a model's dim differs from the provider's.
std::vector<TextScore> score_corpus(const Corpus& corpus, const TraitModels& models,
                                    const EmbeddingProvider& provider,
                                    std::size_t chunk_size = 512);

struct UserTraitVector {
  std::string user_id;
  Genre genre = Genre::Classical;
  TraitScores means{};
  std::size_t n_texts = 0;
};

// Per-user arithmetic means, sorted by (genre, user_id). Every score must
// belong to a sample of the corpus.
std::vector<UserTraitVector> user_means(std::span<const TextScore> scores, const Corpus& corpus);

struct TraitSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample sd; 0 for a single user
  std::size_t n_users = 0;
  bool degenerate = false;  // fewer than two users
};

struct GenreTraitSummary {
  Genre genre = Genre::Classical;
  std::array<TraitSummary, kNumTraits> traits{};
};

// Unweighted over users. Genres without users are omitted and reported in
// `warnings` when given.
std::vector<GenreTraitSummary> genre_means(std::span<const UserTraitVector> users,
                                           std::vector<std::string>* warnings = nullptr);

struct UserSplit {
  std::vector<UserTraitVector> train;
  std::vector<UserTraitVector> test;
};

// Seeded uniform shuffle, then the first round(train_frac * n) users train.
// Stratified mode does the same within each genre.
UserSplit split_users(std::span<const UserTraitVector> users, double train_frac, std::uint64_t seed,
                      bool stratified = false);

// Five-class softmax regression over the five trait means.
class GenrePredictor {
 public:
  Eigen::MatrixXd weights;  // kNumGenres x kNumTraits
  Eigen::VectorXd bias;     // kNumGenres
  FeatureScaler<double> scaler;
  TrainConfig config;

  std::array<double, kNumGenres> posteriors(const TraitScores& x) const;
  // Argmax of the posteriors; ties go to the earlier genre in canonical order.
  Genre predict(const TraitScores& x) const;

  static GenrePredictor zero();
};

struct GenreFit {
  GenrePredictor model;
  DescentTrace<double> trace;
};

// Same optimizer contract as the trait classifiers. Needs users of at least
// two genres.
GenreFit train_genre_predictor(std::span<const UserTraitVector> train, const TrainConfig& cfg);

struct ClassReport {
  Genre genre = Genre::Classical;
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct GenreEval {
  double accuracy = 0.0;
  std::size_t n_test = 0;
  std::array<ClassReport, kNumGenres> per_genre{};
};

GenreEval evaluate_genre_predictor(const GenrePredictor& model, std::span<const UserTraitVector> test);

void save_genre_predictor(const GenrePredictor& model, const std::filesystem::path& path);
GenrePredictor load_genre_predictor(const std::filesystem::path& path);

// CSV writers. Scores use 6 fixed decimals.
void write_text_scores_csv(std::span<const TextScore> scores, const Corpus& corpus, std::ostream& out);
std::vector<TextScore> read_text_scores_csv(const std::filesystem::path& path);
void write_user_traits_csv(std::span<const UserTraitVector> users, std::ostream& out);
std::vector<UserTraitVector> read_user_traits_csv(const std::filesystem::path& path);
void write_genre_traits_csv(std::span<const GenreTraitSummary> genres, std::ostream& out);
void write_genre_eval_csv(const GenreEval& eval, std::ostream& out);

}  // namespace persona
