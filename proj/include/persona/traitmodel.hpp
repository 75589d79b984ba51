#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "persona/embedding.hpp"
#include "persona/genbigfive.hpp"
#include "persona/logistic.hpp"
#include "persona/types.hpp"

namespace persona {

struct TrainConfig {
  double l2_lambda = 1e-3;
  double learning_rate = 0.1;
  int max_iters = 2000;  // 0 leaves the zero initialization untouched
  double tol = 1e-7;
  std::uint64_t seed = 0;
  bool standardize = true;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

class TraitClassifier {
 public:
  Trait trait = Trait::OPN;
  std::size_t dim = 0;
  Eigen::VectorXd weights;
  double bias = 0.0;
  FeatureScaler<double> scaler;
  TrainConfig config;
  std::string train_fingerprint;

  // w . standardize(x) + b. Throws DataError on a dim mismatch or a
  // non-finite input.
  double logit(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return sigmoid(logit(x));
  }
};

// Fits on a design matrix directly (rows = samples, y in {0,1} with 1 = high).
// The trace records every accepted loss.
struct FitResult {
  TraitClassifier model;
  DescentTrace<double> trace;
};
FitResult fit_trait_classifier(Trait trait, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const TrainConfig& cfg);

// Embeds the passages and fits one classifier. All passages must carry the
// same trait, come from the train-gen pool and cover both levels.
FitResult train(std::span<const LabeledPassage> passages, const EmbeddingProvider& provider,
                const TrainConfig& cfg);

struct EvalResult {
  Trait trait = Trait::OPN;
  double accuracy = 0.0;
  std::size_t n_test = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Predicted label is high iff posterior >= threshold.
EvalResult evaluate_posteriors(Trait trait, std::span<const double> posteriors,
                               std::span<const Level> truth, double threshold = 0.5);
EvalResult evaluate(const TraitClassifier& model, std::span<const LabeledPassage> passages,
                    const EmbeddingProvider& provider, double threshold = 0.5);

void write_eval_csv(std::span<const EvalResult> results, std::ostream& out);

// JSON with hex-float numbers; load verifies lengths, positivity of stds and
// a checksum over the content.
void save_model(const TraitClassifier& model, const std::filesystem::path& path);
TraitClassifier load_model(const std::filesystem::path& path);
nlohmann::json model_to_json(const TraitClassifier& model);
TraitClassifier model_from_json(const nlohmann::json& j);

// Hex-float helpers shared with the genre predictor file format.
nlohmann::json hex_array(const Eigen::Ref<const Eigen::VectorXd>& v);
Eigen::VectorXd parse_hex_array(const nlohmann::json& j, std::size_t expected, const char* what);

}  // namespace persona
