#include "persona/embedding.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <system_error>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "persona/error.hpp"
#include "persona/hash.hpp"
#include "persona/random.hpp"
#include "persona/text.hpp"

namespace persona {

using json = nlohmann::json;

std::vector<EmbeddingVector> embed_batch(const EmbeddingProvider& provider,
                                         std::span<const TextItem> items) {
  if (items.empty()) throw DataError("embed_batch: empty input");
  auto vectors = provider.embed(items);
  if (vectors.size() != items.size()) {
    throw ProtocolError("provider returned " + std::to_string(vectors.size()) + " vectors for " +
                        std::to_string(items.size()) + " texts");
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (static_cast<std::size_t>(vectors[i].size()) != provider.dim()) {
      throw ProtocolError("vector for '" + items[i].id + "' has dim " +
                          std::to_string(vectors[i].size()) + ", expected " +
                          std::to_string(provider.dim()));
    }
    if (!vectors[i].allFinite()) throw ProtocolError("non-finite vector for '" + items[i].id + "'");
  }
  return vectors;
}

Eigen::MatrixXd embed_matrix(const EmbeddingProvider& provider, std::span<const TextItem> items) {
  const auto vectors = embed_batch(provider, items);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(items.size()),
                    static_cast<Eigen::Index>(provider.dim()));
  for (std::size_t i = 0; i < vectors.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = vectors[i];
  return X;
}

// ---------------------------------------------------------------------------

TestHashProvider::TestHashProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw UsageError("test-hash embedder needs dim >= 1");
}

std::string TestHashProvider::fingerprint() const {
  return "test-hash:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

EmbeddingVector TestHashProvider::embed_one(std::string_view text) const {
  const std::uint64_t key = splitmix64(seed_ ^ splitmix64(fnv1a(normalize_text(text))));
  CounterRng rng(key);
  EmbeddingVector v(static_cast<Eigen::Index>(dim_));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  const double norm = v.norm();
  // A zero draw for every coordinate is not a realistic outcome; guard anyway
  // so the output stays finite.
  if (norm > 0.0) v /= norm;
  else v.setConstant(1.0 / std::sqrt(static_cast<double>(dim_)));
  return v;
}

std::vector<EmbeddingVector> TestHashProvider::embed(std::span<const TextItem> items) const {
  std::vector<EmbeddingVector> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(embed_one(item.text));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<EmbeddingVector> PrecomputedProvider::embed(std::span<const TextItem> items) const {
  std::vector<EmbeddingVector> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    auto it = vectors_.find(item.id);
    if (it == vectors_.end()) throw MissingKeyError(item.id);
    out.push_back(it->second);
  }
  return out;
}

std::unique_ptr<PrecomputedProvider> load_precomputed(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read precomputed embeddings '" + path.string() + "'");
  auto provider = std::unique_ptr<PrecomputedProvider>(new PrecomputedProvider());
  const std::string where = path.string();

  std::string line;
  if (!std::getline(in, line) || line.rfind("dim=", 0) != 0) {
    throw DataError(where + ":1: expected header 'dim=<N>'");
  }
  {
    std::size_t dim = 0;
    const char* b = line.data() + 4;
    const char* e = line.data() + line.size();
    while (e > b && (e[-1] == '\r' || e[-1] == ' ')) --e;
    auto res = std::from_chars(b, e, dim);
    if (res.ec != std::errc{} || res.ptr != e || dim == 0) {
      throw DataError(where + ":1: bad dimension in header '" + line + "'");
    }
    provider->dim_ = dim;
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError(where + ":" + std::to_string(lineno) + ": expected '<id>\\t<values>'");
    }
    std::string id = line.substr(0, tab);
    EmbeddingVector v(static_cast<Eigen::Index>(provider->dim_));
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    std::size_t count = 0;
    while (p < end) {
      float f = 0.0f;
      auto res = std::from_chars(p, end, f);
      if (res.ec != std::errc{}) {
        throw DataError(where + ":" + std::to_string(lineno) + ": malformed float");
      }
      if (count < provider->dim_) v[static_cast<Eigen::Index>(count)] = f;
      ++count;
      p = res.ptr;
      if (p < end) {
        if (*p != ',') throw DataError(where + ":" + std::to_string(lineno) + ": expected ','");
        ++p;
      }
    }
    if (count != provider->dim_) {
      throw DataError(where + ":" + std::to_string(lineno) + ": record '" + id + "' has " +
                      std::to_string(count) + " values, header says dim=" +
                      std::to_string(provider->dim_));
    }
    if (!v.allFinite()) {
      throw DataError(where + ":" + std::to_string(lineno) + ": non-finite value in '" + id + "'");
    }
    if (!provider->vectors_.emplace(id, std::move(v)).second) {
      throw DataError(where + ":" + std::to_string(lineno) + ": duplicate id '" + id + "'");
    }
  }
  provider->fingerprint_ = "precomputed:" + hash_file(path);
  return provider;
}

void write_precomputed(const std::filesystem::path& path, std::span<const std::string> ids,
                       std::span<const EmbeddingVector> vectors) {
  if (ids.size() != vectors.size()) throw DataError("write_precomputed: ids/vectors size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  const std::size_t dim = vectors.empty() ? 0 : static_cast<std::size_t>(vectors[0].size());
  out << "dim=" << dim << '\n';
  char buf[64];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i] << '\t';
    for (Eigen::Index j = 0; j < vectors[i].size(); ++j) {
      if (j) out << ',';
      auto res = std::to_chars(buf, buf + sizeof buf, static_cast<float>(vectors[i][j]));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

RemoteProvider::RemoteProvider(RemoteOptions opts) : opts_(std::move(opts)) {
  if (opts_.dim == 0) throw UsageError("remote embedder needs dim >= 1");
  if (opts_.batch_size == 0) throw UsageError("batch_size must be >= 1");
  if (opts_.max_in_flight == 0) throw UsageError("max_in_flight must be >= 1");
  if (opts_.max_attempts < 1) throw UsageError("max_attempts must be >= 1");
  const auto scheme = opts_.endpoint.find("://");
  if (scheme == std::string::npos || opts_.endpoint.substr(0, scheme) != "http") {
    throw UsageError("embedding endpoint must be an http:// URL, got '" + opts_.endpoint + "'");
  }
  const auto slash = opts_.endpoint.find('/', scheme + 3);
  base_ = opts_.endpoint.substr(0, slash);
  prefix_ = slash == std::string::npos ? "" : opts_.endpoint.substr(slash);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

std::string RemoteProvider::fingerprint() const {
  return "remote:" + opts_.endpoint + ":dim=" + std::to_string(opts_.dim) + ":prefix=" +
         opts_.passage_prefix;
}

std::vector<EmbeddingVector> RemoteProvider::request_batch(std::span<const TextItem> items) const {
  json body;
  body["texts"] = json::array();
  for (const auto& item : items) body["texts"].push_back(opts_.passage_prefix + item.text);
  const std::string payload = body.dump();
  const std::string path = prefix_ + "/embed";

  std::string last_error;
  for (int attempt = 1; attempt <= opts_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(opts_.retry_backoff_ms * (attempt - 1)));
    }
    httplib::Client client(base_);
    client.set_connection_timeout(opts_.timeout_seconds, 0);
    client.set_read_timeout(opts_.timeout_seconds, 0);
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = "embedding service unreachable at " + base_ + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "embedding service returned HTTP " + std::to_string(res->status);
      continue;
    }

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object()) throw ProtocolError("embedding reply is not JSON");
    if (!reply.contains("dim") || !reply["dim"].is_number_integer()) {
      throw ProtocolError("embedding reply lacks integer 'dim'");
    }
    const auto dim = reply["dim"].get<long long>();
    if (dim != static_cast<long long>(opts_.dim)) {
      throw ProtocolError("embedding service reports dim " + std::to_string(dim) +
                          ", configured dim is " + std::to_string(opts_.dim));
    }
    const auto& vectors = reply["vectors"];
    if (!vectors.is_array() || vectors.size() != items.size()) {
      throw ProtocolError("embedding reply must hold one vector per text");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(items.size());
    for (const auto& row : vectors) {
      if (!row.is_array() || row.size() != opts_.dim) {
        throw ProtocolError("embedding reply vector has wrong length");
      }
      EmbeddingVector v(static_cast<Eigen::Index>(opts_.dim));
      for (std::size_t j = 0; j < opts_.dim; ++j) {
        if (!row[j].is_number()) throw ProtocolError("embedding reply holds a non-number");
        // The wire carries f32; round through float before widening.
        v[static_cast<Eigen::Index>(j)] = static_cast<float>(row[j].get<double>());
      }
      out.push_back(std::move(v));
    }
    return out;
  }
  throw RetryableError(last_error, opts_.max_attempts);
}

std::vector<EmbeddingVector> RemoteProvider::embed(std::span<const TextItem> items) const {
  std::vector<EmbeddingVector> out(items.size());
  std::vector<std::pair<std::size_t, std::future<std::vector<EmbeddingVector>>>> in_flight;

  auto drain_one = [&] {
    auto [offset, fut] = std::move(in_flight.front());
    in_flight.erase(in_flight.begin());
    auto vectors = fut.get();
    for (std::size_t i = 0; i < vectors.size(); ++i) out[offset + i] = std::move(vectors[i]);
  };

  try {
    for (std::size_t offset = 0; offset < items.size(); offset += opts_.batch_size) {
      const auto batch = items.subspan(offset, std::min(opts_.batch_size, items.size() - offset));
      if (in_flight.size() >= opts_.max_in_flight) drain_one();
      in_flight.emplace_back(offset,
                             std::async(std::launch::async, [this, batch] { return request_batch(batch); }));
    }
    while (!in_flight.empty()) drain_one();
  } catch (...) {
    // Let outstanding requests finish before unwinding; futures from
    // std::async would block in their destructors anyway.
    for (auto& [offset, fut] : in_flight) {
      if (fut.valid()) fut.wait();
    }
    throw;
  }
  return out;
}

// ---------------------------------------------------------------------------

CachedProvider::CachedProvider(std::shared_ptr<const EmbeddingProvider> inner,
                               std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path CachedProvider::entry_path(const TextItem& item) const {
  Fnv1a h;
  h.update(inner_->fingerprint()).update(std::string_view("\0", 1));
  h.update(inner_->keyed_by_id() ? item.id : normalize_text(item.text));
  const std::string key = h.hex();
  return dir_ / key.substr(0, 2) / (key + ".f64");
}

std::vector<EmbeddingVector> CachedProvider::embed(std::span<const TextItem> items) const {
  const auto dim = static_cast<Eigen::Index>(inner_->dim());
  std::vector<EmbeddingVector> out(items.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::ifstream in(entry_path(items[i]), std::ios::binary);
    if (in) {
      EmbeddingVector v(dim);
      in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(double)));
      if (in.gcount() == static_cast<std::streamsize>(dim * sizeof(double))) {
        out[i] = std::move(v);
        continue;
      }
    }
    misses.push_back(i);
  }
  if (misses.empty()) return out;

  std::vector<TextItem> todo;
  todo.reserve(misses.size());
  for (auto i : misses) todo.push_back(items[i]);
  auto fresh = inner_->embed(todo);
  if (fresh.size() != todo.size()) throw ProtocolError("provider returned wrong number of vectors");
  for (std::size_t k = 0; k < misses.size(); ++k) {
    const auto path = entry_path(items[misses[k]]);
    if (fresh[k].size() == dim) {
      std::filesystem::create_directories(path.parent_path());
      std::ofstream o(path, std::ios::binary);
      o.write(reinterpret_cast<const char*>(fresh[k].data()),
              static_cast<std::streamsize>(dim * sizeof(double)));
    }
    out[misses[k]] = std::move(fresh[k]);
  }
  return out;
}

std::shared_ptr<const EmbeddingProvider> make_provider(const ProviderConfig& cfg,
                                                       const std::filesystem::path& cache_dir) {
  std::shared_ptr<const EmbeddingProvider> provider;
  switch (cfg.kind) {
    case ProviderKind::TestHash:
      provider = std::make_shared<TestHashProvider>(cfg.dim, cfg.seed);
      break;
    case ProviderKind::Precomputed:
      provider = load_precomputed(cfg.path);
      break;
    case ProviderKind::Remote: {
      RemoteOptions opts;
      opts.endpoint = cfg.endpoint;
      opts.dim = cfg.dim;
      opts.passage_prefix = cfg.passage_prefix;
      opts.batch_size = cfg.batch_size;
      opts.max_in_flight = cfg.max_in_flight;
      opts.max_attempts = cfg.max_attempts;
      provider = std::make_shared<RemoteProvider>(std::move(opts));
      break;
    }
  }
  if (!cache_dir.empty()) provider = std::make_shared<CachedProvider>(provider, cache_dir);
  return provider;
}

}  // namespace persona
