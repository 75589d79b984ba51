#include "persona/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "persona/error.hpp"
#include "persona/format.hpp"
#include "persona/hash.hpp"
#include "persona/random.hpp"
#include "persona/stats.hpp"

namespace persona {

using json = nlohmann::json;

std::vector<TextScore> score_corpus(const Corpus& corpus, const TraitModels& models,
                                    const EmbeddingProvider& provider, std::size_t chunk_size) {
  for (Trait t : kTraits) {
    const auto& m = models[index_of(t)];
    if (m.trait != t) throw DataError("model slot " + std::string(to_string(t)) + " holds another trait");
    if (m.dim != provider.dim()) {
      throw DataError(std::string(to_string(t)) + " model dim " + std::to_string(m.dim) +
                      " does not match provider dim " + std::to_string(provider.dim()));
    }
  }
  if (chunk_size == 0) chunk_size = 1;

  std::vector<TextScore> out;
  out.reserve(corpus.size());
  std::vector<TextItem> items;
  for (std::size_t start = 0; start < corpus.size(); start += chunk_size) {
    const std::size_t end = std::min(corpus.size(), start + chunk_size);
    items.clear();
    for (std::size_t i = start; i < end; ++i) {
      items.push_back({corpus.samples[i].sample_id, corpus.samples[i].body});
    }
    std::vector<EmbeddingVector> vectors;
    try {
      vectors = embed_batch(provider, items);
    } catch (const MissingKeyError& e) {
      throw DataError("no embedding for sample '" + e.key() + "'");
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      TextScore s;
      s.sample_id = items[i].id;
      for (Trait t : kTraits) s.scores[index_of(t)] = models[index_of(t)].predict_proba(vectors[i]);
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

// Mean with a fixed summation order (sorted values, pairwise sum), so the
// result does not depend on input order.
double ordered_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double ordered_sd(std::vector<double> values, double m) {
  if (values.size() < 2) return 0.0;
  std::sort(values.begin(), values.end());
  for (double& v : values) v = (v - m) * (v - m);
  return std::sqrt(pairwise_sum(values) / static_cast<double>(values.size() - 1));
}

}  // namespace

std::vector<UserTraitVector> user_means(std::span<const TextScore> scores, const Corpus& corpus) {
  std::unordered_map<std::string, const TextSample*> by_id;
  for (const auto& s : corpus.samples) by_id.emplace(s.sample_id, &s);

  struct Acc {
    Genre genre;
    std::array<std::vector<double>, kNumTraits> values;
  };
  std::map<std::pair<Genre, std::string>, Acc> users;
  for (const auto& sc : scores) {
    auto it = by_id.find(sc.sample_id);
    if (it == by_id.end()) throw DataError("score for unknown sample '" + sc.sample_id + "'");
    const TextSample& s = *it->second;
    auto& acc = users.try_emplace({s.genre, s.user_id}, Acc{s.genre, {}}).first->second;
    for (std::size_t t = 0; t < kNumTraits; ++t) acc.values[t].push_back(sc.scores[t]);
  }

  std::vector<UserTraitVector> out;
  out.reserve(users.size());
  for (auto& [key, acc] : users) {
    UserTraitVector u;
    u.user_id = key.second;
    u.genre = acc.genre;
    u.n_texts = acc.values[0].size();
    for (std::size_t t = 0; t < kNumTraits; ++t) u.means[t] = ordered_mean(std::move(acc.values[t]));
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<GenreTraitSummary> genre_means(std::span<const UserTraitVector> users,
                                           std::vector<std::string>* warnings) {
  std::array<std::array<std::vector<double>, kNumTraits>, kNumGenres> values;
  for (const auto& u : users) {
    for (std::size_t t = 0; t < kNumTraits; ++t) values[index_of(u.genre)][t].push_back(u.means[t]);
  }
  std::vector<GenreTraitSummary> out;
  for (Genre g : kGenres) {
    const auto& per_trait = values[index_of(g)];
    if (per_trait[0].empty()) {
      if (warnings) warnings->push_back("genre " + std::string(to_string(g)) + " has no users; omitted");
      continue;
    }
    GenreTraitSummary summary;
    summary.genre = g;
    for (std::size_t t = 0; t < kNumTraits; ++t) {
      auto& ts = summary.traits[t];
      ts.n_users = per_trait[t].size();
      ts.mean = ordered_mean(per_trait[t]);
      ts.sd = ordered_sd(per_trait[t], ts.mean);
      ts.degenerate = ts.n_users < 2;
    }
    out.push_back(summary);
  }
  return out;
}

UserSplit split_users(std::span<const UserTraitVector> users, double train_frac, std::uint64_t seed,
                      bool stratified) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw UsageError("train_frac must lie in (0, 1)");
  UserSplit split;
  auto split_group = [&](std::vector<UserTraitVector> group, std::uint64_t key) {
    CounterRng rng(key);
    rng.shuffle(group);
    const auto n_train = static_cast<std::size_t>(
        std::lround(train_frac * static_cast<double>(group.size())));
    for (std::size_t i = 0; i < group.size(); ++i) {
      (i < n_train ? split.train : split.test).push_back(std::move(group[i]));
    }
  };
  if (!stratified) {
    split_group(std::vector<UserTraitVector>(users.begin(), users.end()), seed);
    return split;
  }
  for (Genre g : kGenres) {
    std::vector<UserTraitVector> group;
    for (const auto& u : users) {
      if (u.genre == g) group.push_back(u);
    }
    split_group(std::move(group), seed ^ splitmix64(index_of(g) + 1));
  }
  return split;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd as_vector(const TraitScores& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), kNumTraits);
}

}  // namespace

GenrePredictor GenrePredictor::zero() {
  GenrePredictor m;
  m.weights = Eigen::MatrixXd::Zero(kNumGenres, kNumTraits);
  m.bias = Eigen::VectorXd::Zero(kNumGenres);
  m.scaler = FeatureScaler<double>::identity(kNumTraits);
  return m;
}

std::array<double, kNumGenres> GenrePredictor::posteriors(const TraitScores& x) const {
  const Eigen::VectorXd xv = as_vector(x);
  if (!xv.allFinite()) throw DataError("non-finite personality vector");
  const Eigen::VectorXd z = weights * scaler.transform(xv) + bias;
  const Eigen::VectorXd p = softmax(z);
  std::array<double, kNumGenres> out{};
  for (std::size_t k = 0; k < kNumGenres; ++k) out[k] = p[static_cast<Eigen::Index>(k)];
  return out;
}

Genre GenrePredictor::predict(const TraitScores& x) const {
  const auto p = posteriors(x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumGenres; ++k) {
    if (p[k] > p[best]) best = k;
  }
  return kGenres[best];
}

GenreFit train_genre_predictor(std::span<const UserTraitVector> train, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw DataError("no training users");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(train.size()), kNumTraits);
  std::vector<int> labels;
  std::array<bool, kNumGenres> present{};
  for (std::size_t i = 0; i < train.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = as_vector(train[i].means).transpose();
    labels.push_back(static_cast<int>(index_of(train[i].genre)));
    present[index_of(train[i].genre)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw DataError("genre predictor needs users from at least two genres");
  }

  GenreFit fit;
  auto& m = fit.model;
  m.config = cfg;
  m.scaler = FeatureScaler<double>::fit(X, cfg.standardize);
  const Eigen::MatrixXd Z = m.scaler.transform(X);
  SoftmaxObjective<double> objective(Z, labels, kNumGenres, cfg.l2_lambda);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(objective.num_params());
  fit.trace = gradient_descent(objective, theta, DescentOptions<double>{cfg.learning_rate, cfg.max_iters, cfg.tol, 30});
  m.weights = SoftmaxObjective<double>::weights(theta, kNumGenres, kNumTraits);
  m.bias = SoftmaxObjective<double>::biases(theta, kNumGenres, kNumTraits);
  return fit;
}

GenreEval evaluate_genre_predictor(const GenrePredictor& model, std::span<const UserTraitVector> test) {
  if (test.empty()) throw DataError("empty test set");
  GenreEval eval;
  eval.n_test = test.size();
  std::array<std::size_t, kNumGenres> predicted{}, correct{};
  std::size_t hits = 0;
  for (const auto& u : test) {
    const Genre g = model.predict(u.means);
    ++predicted[index_of(g)];
    ++eval.per_genre[index_of(u.genre)].support;
    if (g == u.genre) {
      ++hits;
      ++correct[index_of(g)];
    }
  }
  eval.accuracy = static_cast<double>(hits) / static_cast<double>(test.size());
  for (Genre g : kGenres) {
    auto& r = eval.per_genre[index_of(g)];
    r.genre = g;
    const double c = static_cast<double>(correct[index_of(g)]);
    r.precision = predicted[index_of(g)] ? c / static_cast<double>(predicted[index_of(g)]) : 0.0;
    r.recall = r.support ? c / static_cast<double>(r.support) : 0.0;
    r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  }
  return eval;
}

void save_genre_predictor(const GenrePredictor& model, const std::filesystem::path& path) {
  json j;
  j["classes"] = json::array();
  j["weights"] = json::array();
  for (Genre g : kGenres) {
    j["classes"].push_back(std::string(to_string(g)));
    j["weights"].push_back(hex_array(model.weights.row(static_cast<Eigen::Index>(index_of(g))).transpose()));
  }
  j["features"] = json::array();
  for (Trait t : kTraits) j["features"].push_back(std::string(to_string(t)));
  j["bias"] = hex_array(model.bias);
  j["feature_means"] = hex_array(model.scaler.means);
  j["feature_stds"] = hex_array(model.scaler.stds);
  j["config"] = to_json(model.config);
  j["checksum"] = hex64(fnv1a(j.dump()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

GenrePredictor load_genre_predictor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read genre predictor '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("checksum")) {
    throw DataError("genre predictor file is malformed");
  }
  json body = j;
  body.erase("checksum");
  if (hex64(fnv1a(body.dump())) != j["checksum"].get<std::string>()) {
    throw DataError("genre predictor checksum mismatch");
  }
  GenrePredictor m;
  m.weights.resize(kNumGenres, kNumTraits);
  if (!j["weights"].is_array() || j["weights"].size() != kNumGenres) {
    throw DataError("genre predictor must hold five weight rows");
  }
  for (std::size_t k = 0; k < kNumGenres; ++k) {
    m.weights.row(static_cast<Eigen::Index>(k)) = parse_hex_array(j["weights"][k], kNumTraits, "weights").transpose();
  }
  m.bias = parse_hex_array(j["bias"], kNumGenres, "bias");
  m.scaler.means = parse_hex_array(j["feature_means"], kNumTraits, "feature_means");
  m.scaler.stds = parse_hex_array(j["feature_stds"], kNumTraits, "feature_stds");
  m.config = train_config_from_json(j["config"]);
  return m;
}

// ---------------------------------------------------------------------------

void write_text_scores_csv(std::span<const TextScore> scores, const Corpus& corpus, std::ostream& out) {
  std::unordered_map<std::string, const TextSample*> by_id;
  for (const auto& s : corpus.samples) by_id.emplace(s.sample_id, &s);
  out << "sample_id,user_id,genre,OPN,CON,EXT,AGR,NEU\n";
  for (const auto& sc : scores) {
    auto it = by_id.find(sc.sample_id);
    if (it == by_id.end()) throw DataError("score for unknown sample '" + sc.sample_id + "'");
    out << csv_field(sc.sample_id) << ',' << csv_field(it->second->user_id) << ','
        << to_string(it->second->genre);
    for (double v : sc.scores) out << ',' << fixed(v);
    out << '\n';
  }
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || (!line.empty() && line.back() == '\r' ? line.substr(0, line.size() - 1) : line) != expected_header) {
    throw DataError("'" + path.string() + "' does not start with header '" + expected_header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_csv_line(line));
  }
  return rows;
}

}  // namespace

std::vector<TextScore> read_text_scores_csv(const std::filesystem::path& path) {
  std::vector<TextScore> out;
  for (const auto& f : read_csv(path, "sample_id,user_id,genre,OPN,CON,EXT,AGR,NEU")) {
    if (f.size() != 8) throw DataError("malformed row in '" + path.string() + "'");
    TextScore s;
    s.sample_id = f[0];
    for (std::size_t t = 0; t < kNumTraits; ++t) s.scores[t] = parse_double(f[3 + t]);
    out.push_back(std::move(s));
  }
  return out;
}

void write_user_traits_csv(std::span<const UserTraitVector> users, std::ostream& out) {
  out << "user_id,genre,n_texts,OPN,CON,EXT,AGR,NEU\n";
  for (const auto& u : users) {
    out << csv_field(u.user_id) << ',' << to_string(u.genre) << ',' << u.n_texts;
    for (double v : u.means) out << ',' << fixed(v);
    out << '\n';
  }
}

std::vector<UserTraitVector> read_user_traits_csv(const std::filesystem::path& path) {
  std::vector<UserTraitVector> out;
  for (const auto& f : read_csv(path, "user_id,genre,n_texts,OPN,CON,EXT,AGR,NEU")) {
    if (f.size() != 8) throw DataError("malformed row in '" + path.string() + "'");
    UserTraitVector u;
    u.user_id = f[0];
    const auto g = parse_genre(f[1]);
    if (!g) throw DataError("unknown genre '" + f[1] + "' in '" + path.string() + "'");
    u.genre = *g;
    u.n_texts = static_cast<std::size_t>(parse_double(f[2]));
    for (std::size_t t = 0; t < kNumTraits; ++t) u.means[t] = parse_double(f[3 + t]);
    out.push_back(std::move(u));
  }
  return out;
}

void write_genre_traits_csv(std::span<const GenreTraitSummary> genres, std::ostream& out) {
  out << "genre,trait,mean,sd,n_users,degenerate\n";
  for (const auto& g : genres) {
    for (Trait t : kTraits) {
      const auto& ts = g.traits[index_of(t)];
      out << to_string(g.genre) << ',' << to_string(t) << ',' << fixed(ts.mean) << ','
          << fixed(ts.sd) << ',' << ts.n_users << ',' << (ts.degenerate ? "true" : "false") << '\n';
    }
  }
}

void write_genre_eval_csv(const GenreEval& eval, std::ostream& out) {
  out << "genre,test_size,precision,recall,f1\n";
  for (const auto& r : eval.per_genre) {
    out << to_string(r.genre) << ',' << r.support << ',' << fixed(r.precision) << ','
        << fixed(r.recall) << ',' << fixed(r.f1) << '\n';
  }
  out << "overall," << eval.n_test << ",,," << "\n";
}

}  // namespace persona
