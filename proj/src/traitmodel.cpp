#include "persona/traitmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "persona/error.hpp"
#include "persona/format.hpp"
#include "persona/hash.hpp"

namespace persona {

using json = nlohmann::json;

void TrainConfig::validate() const {
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) throw UsageError("l2_lambda must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning_rate must be > 0");
  }
  if (max_iters < 0) throw UsageError("max_iters must be >= 0");
  if (!(tol > 0.0)) throw UsageError("tol must be > 0");
}

json to_json(const TrainConfig& cfg) {
  return json{{"l2_lambda", to_hexfloat(cfg.l2_lambda)},
              {"learning_rate", to_hexfloat(cfg.learning_rate)},
              {"max_iters", cfg.max_iters},
              {"tol", to_hexfloat(cfg.tol)},
              {"seed", cfg.seed},
              {"standardize", cfg.standardize}};
}

namespace {

// Accepts either a plain JSON number or a hex-float string.
double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j[key];
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return from_hexfloat(v.get<std::string>());
  throw UsageError(std::string("'") + key + "' must be a number");
}

}  // namespace

TrainConfig train_config_from_json(const json& j, TrainConfig cfg) {
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw UsageError("training config must be an object");
  cfg.l2_lambda = number(j, "l2_lambda", cfg.l2_lambda);
  cfg.learning_rate = number(j, "learning_rate", cfg.learning_rate);
  cfg.tol = number(j, "tol", cfg.tol);
  if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("standardize")) cfg.standardize = j["standardize"].get<bool>();
  cfg.validate();
  return cfg;
}

double TraitClassifier::logit(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw DataError("vector dim " + std::to_string(x.size()) + " does not match " +
                    std::string(to_string(trait)) + " model dim " + std::to_string(dim));
  }
  if (!x.allFinite()) throw DataError("non-finite input vector");
  return weights.dot(scaler.transform(x)) + bias;
}

namespace {

// Order-independent digest of the training rows and the config: per-row
// hashes are sorted before being combined.
std::string training_fingerprint(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const TrainConfig& cfg) {
  std::vector<std::uint64_t> rows(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Fnv1a h;
    for (Eigen::Index j = 0; j < X.cols(); ++j) h.update_pod(X(i, j));
    h.update_pod(y[i]);
    rows[static_cast<std::size_t>(i)] = h.digest();
  }
  std::sort(rows.begin(), rows.end());
  Fnv1a h;
  for (auto r : rows) h.update_pod(r);
  h.update(to_json(cfg).dump());
  return h.hex();
}

}  // namespace

FitResult fit_trait_classifier(Trait trait, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const TrainConfig& cfg) {
  cfg.validate();
  if (X.rows() == 0 || X.rows() != y.size()) throw DataError("training data is empty or misaligned");
  const bool has_high = (y.array() == 1.0).any();
  const bool has_low = (y.array() == 0.0).any();
  if (!has_high || !has_low) throw DataError("degenerate training set: only one class present");
  if (!X.allFinite()) throw DataError("non-finite training features");

  FitResult out;
  auto& m = out.model;
  m.trait = trait;
  m.dim = static_cast<std::size_t>(X.cols());
  m.config = cfg;
  m.scaler = FeatureScaler<double>::fit(X, cfg.standardize);
  const Eigen::MatrixXd Z = m.scaler.transform(X);

  BinaryLogisticObjective<double> objective(Z, y, cfg.l2_lambda);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(objective.num_params());
  DescentOptions<double> opts{cfg.learning_rate, cfg.max_iters, cfg.tol, 30};
  out.trace = gradient_descent(objective, theta, opts);

  m.weights = theta.head(X.cols());
  m.bias = theta[X.cols()];
  m.train_fingerprint = training_fingerprint(X, y, cfg);
  return out;
}

FitResult train(std::span<const LabeledPassage> passages, const EmbeddingProvider& provider,
                const TrainConfig& cfg) {
  if (passages.empty()) throw DataError("no training passages");
  const Trait trait = passages.front().trait;
  std::vector<TextItem> items;
  Eigen::VectorXd y(static_cast<Eigen::Index>(passages.size()));
  for (std::size_t i = 0; i < passages.size(); ++i) {
    const auto& p = passages[i];
    if (p.trait != trait) throw DataError("training passages mix traits");
    if (p.generator != Generator::TrainGen) {
      throw DataError("training passages must come from the train-gen pool ('" + p.passage_id + "')");
    }
    y[static_cast<Eigen::Index>(i)] = p.level == Level::High ? 1.0 : 0.0;
    items.push_back({p.passage_id, p.text});
  }
  const Eigen::MatrixXd X = embed_matrix(provider, items);
  return fit_trait_classifier(trait, X, y, cfg);
}

EvalResult evaluate_posteriors(Trait trait, std::span<const double> posteriors,
                               std::span<const Level> truth, double threshold) {
  if (posteriors.size() != truth.size()) throw DataError("posteriors and labels differ in length");
  if (posteriors.empty()) throw DataError("empty test set");
  EvalResult r;
  r.trait = trait;
  r.n_test = posteriors.size();
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    const bool predicted_high = posteriors[i] >= threshold;
    const bool high = truth[i] == Level::High;
    if (predicted_high && high) ++r.tp;
    else if (predicted_high) ++r.fp;
    else if (high) ++r.fn;
    else ++r.tn;
  }
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n_test);
  return r;
}

EvalResult evaluate(const TraitClassifier& model, std::span<const LabeledPassage> passages,
                    const EmbeddingProvider& provider, double threshold) {
  if (passages.empty()) throw DataError("empty test set");
  if (provider.dim() != model.dim) {
    throw DataError("provider dim " + std::to_string(provider.dim()) + " does not match model dim " +
                    std::to_string(model.dim));
  }
  std::vector<TextItem> items;
  std::vector<Level> truth;
  for (const auto& p : passages) {
    if (p.trait != model.trait) throw DataError("test passage '" + p.passage_id + "' has another trait");
    if (p.generator != Generator::TestGen) {
      throw DataError("test passages must come from the test-gen pool ('" + p.passage_id + "')");
    }
    items.push_back({p.passage_id, p.text});
    truth.push_back(p.level);
  }
  const auto vectors = embed_batch(provider, items);
  std::vector<double> posteriors;
  posteriors.reserve(vectors.size());
  for (const auto& v : vectors) posteriors.push_back(model.predict_proba(v));
  return evaluate_posteriors(model.trait, posteriors, truth, threshold);
}

void write_eval_csv(std::span<const EvalResult> results, std::ostream& out) {
  out << "trait,accuracy,n_test,tp,fp,tn,fn\n";
  for (const auto& r : results) {
    out << to_string(r.trait) << ',' << fixed(r.accuracy) << ',' << r.n_test << ',' << r.tp << ','
        << r.fp << ',' << r.tn << ',' << r.fn << '\n';
  }
}

// ---------------------------------------------------------------------------

json hex_array(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(to_hexfloat(v[i]));
  return arr;
}

Eigen::VectorXd parse_hex_array(const json& j, std::size_t expected, const char* what) {
  if (!j.is_array() || j.size() != expected) {
    throw DataError(std::string("model field '") + what + "' must hold " +
                    std::to_string(expected) + " values");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) {
    if (!j[i].is_string()) throw DataError(std::string("model field '") + what + "' is not hex-float");
    v[static_cast<Eigen::Index>(i)] = from_hexfloat(j[i].get<std::string>());
  }
  if (!v.allFinite()) throw DataError(std::string("model field '") + what + "' is not finite");
  return v;
}

namespace {

std::string content_checksum(const json& body) { return hex64(fnv1a(body.dump())); }

}  // namespace

json model_to_json(const TraitClassifier& m) {
  json j;
  j["trait"] = std::string(to_string(m.trait));
  j["dim"] = m.dim;
  j["weights"] = hex_array(m.weights);
  j["bias"] = to_hexfloat(m.bias);
  j["feature_means"] = hex_array(m.scaler.means);
  j["feature_stds"] = hex_array(m.scaler.stds);
  j["config"] = to_json(m.config);
  j["train_fingerprint"] = m.train_fingerprint;
  j["checksum"] = content_checksum(j);
  return j;
}

TraitClassifier model_from_json(const json& j) {
  if (!j.is_object()) throw DataError("model file is not a JSON object");
  for (const char* key : {"trait", "dim", "weights", "bias", "feature_means", "feature_stds",
                          "config", "train_fingerprint", "checksum"}) {
    if (!j.contains(key)) throw DataError(std::string("model file lacks '") + key + "'");
  }
  json body = j;
  body.erase("checksum");
  if (content_checksum(body) != j["checksum"].get<std::string>()) {
    throw DataError("model checksum mismatch (file corrupted or edited)");
  }
  TraitClassifier m;
  const auto trait = parse_trait(j["trait"].get<std::string>());
  if (!trait) throw DataError("model has unknown trait");
  m.trait = *trait;
  if (!j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
    throw DataError("model dim must be a positive integer");
  }
  m.dim = j["dim"].get<std::size_t>();
  m.weights = parse_hex_array(j["weights"], m.dim, "weights");
  m.bias = from_hexfloat(j["bias"].get<std::string>());
  m.scaler.means = parse_hex_array(j["feature_means"], m.dim, "feature_means");
  m.scaler.stds = parse_hex_array(j["feature_stds"], m.dim, "feature_stds");
  if ((m.scaler.stds.array() <= 0.0).any()) throw DataError("model feature_stds must be positive");
  m.config = train_config_from_json(j["config"]);
  m.train_fingerprint = j["train_fingerprint"].get<std::string>();
  return m;
}

void save_model(const TraitClassifier& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model '" + path.string() + "'");
  out << model_to_json(model).dump(2) << '\n';
}

TraitClassifier load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read model '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("model file '" + path.string() + "' is not valid JSON");
  return model_from_json(j);
}

}  // namespace persona
