#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace persona {

using EmbeddingVector = Eigen::VectorXd;

// A text to embed. Precomputed providers look vectors up by id; the others
// only read the text.
struct TextItem {
  std::string id;
  std::string text;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dim() const = 0;
  // Identifies the provider and its parameters; part of cache keys and model
  // fingerprints.
  virtual std::string fingerprint() const = 0;
  virtual bool keyed_by_id() const { return false; }

  // One vector per item, in input order.
  virtual std::vector<EmbeddingVector> embed(std::span<const TextItem> items) const = 0;
};

// Checked entry point: rejects an empty batch and verifies that every returned
// vector is finite and of the provider's dimension.
std::vector<EmbeddingVector> embed_batch(const EmbeddingProvider& provider,
                                         std::span<const TextItem> items);

// Same, as an (items x dim) row matrix.
Eigen::MatrixXd embed_matrix(const EmbeddingProvider& provider, std::span<const TextItem> items);

// Deterministic stand-in for an encoder: the text (normalized) and seed key a
// counter-based generator that draws dim standard normals, then the vector is
// L2-normalized. No model, no I/O.
class TestHashProvider final : public EmbeddingProvider {
 public:
  TestHashProvider(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const override { return dim_; }
  std::string fingerprint() const override;
  std::vector<EmbeddingVector> embed(std::span<const TextItem> items) const override;

  EmbeddingVector embed_one(std::string_view text) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Vectors read from a file:
//   dim=<N>
//   <id>\t<f32>,<f32>,...
class PrecomputedProvider final : public EmbeddingProvider {
 public:
  std::size_t dim() const override { return dim_; }
  std::string fingerprint() const override { return fingerprint_; }
  bool keyed_by_id() const override { return true; }
  std::vector<EmbeddingVector> embed(std::span<const TextItem> items) const override;

  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.contains(id); }

 private:
  friend std::unique_ptr<PrecomputedProvider> load_precomputed(const std::filesystem::path&);
  std::size_t dim_ = 0;
  std::string fingerprint_;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

std::unique_ptr<PrecomputedProvider> load_precomputed(const std::filesystem::path& path);
void write_precomputed(const std::filesystem::path& path, std::span<const std::string> ids,
                       std::span<const EmbeddingVector> vectors);

struct RemoteOptions {
  std::string endpoint;  // "http://host:port[/prefix]"; requests go to <prefix>/embed
  std::size_t dim = 1024;
  std::string passage_prefix = "passage: ";
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  int max_attempts = 3;
  int retry_backoff_ms = 200;
  int timeout_seconds = 60;
};

// Client for an embedding service:
//   POST {endpoint}/embed  {"texts": [...]}  ->  {"vectors": [[f32...]], "dim": N}
// Up to max_in_flight batches are in flight at once; results are reassembled
// in input order. Transport failures and non-2xx replies are retried and then
// raised as RetryableError; a reply that breaks the contract raises
// ProtocolError immediately.
class RemoteProvider final : public EmbeddingProvider {
 public:
  explicit RemoteProvider(RemoteOptions opts);

  std::size_t dim() const override { return opts_.dim; }
  std::string fingerprint() const override;
  std::vector<EmbeddingVector> embed(std::span<const TextItem> items) const override;

 private:
  std::vector<EmbeddingVector> request_batch(std::span<const TextItem> items) const;

  RemoteOptions opts_;
  std::string base_;    // scheme://host:port
  std::string prefix_;  // path prefix, no trailing slash
};

// Content-addressed cache in front of another provider. Entries live at
// <dir>/<hh>/<hash>.f64 where hash covers the inner fingerprint and either the
// id (id-keyed providers) or the normalized text.
class CachedProvider final : public EmbeddingProvider {
 public:
  CachedProvider(std::shared_ptr<const EmbeddingProvider> inner, std::filesystem::path dir);

  std::size_t dim() const override { return inner_->dim(); }
  std::string fingerprint() const override { return inner_->fingerprint(); }
  bool keyed_by_id() const override { return inner_->keyed_by_id(); }
  std::vector<EmbeddingVector> embed(std::span<const TextItem> items) const override;

 private:
  std::filesystem::path entry_path(const TextItem& item) const;

  std::shared_ptr<const EmbeddingProvider> inner_;
  std::filesystem::path dir_;
};

enum class ProviderKind { Remote, Precomputed, TestHash };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::TestHash;
  std::string endpoint;
  std::filesystem::path path;
  std::size_t dim = 1024;
  std::string passage_prefix = "passage: ";
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  int max_attempts = 3;
  std::uint64_t seed = 0;  // test-hash only
};

// Builds the configured provider, wrapped in a CachedProvider when cache_dir
// is non-empty.
std::shared_ptr<const EmbeddingProvider> make_provider(const ProviderConfig& cfg,
                                                       const std::filesystem::path& cache_dir = {});

}  // namespace persona
