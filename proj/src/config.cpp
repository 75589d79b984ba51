#include "persona/config.hpp"

#include <fstream>
#include <initializer_list>

#include "persona/error.hpp"
#include "persona/hash.hpp"

namespace persona {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(StatsUnit unit) {
  return unit == StatsUnit::PerUser ? "per-user" : "per-text";
}

StatsUnit parse_stats_unit(std::string_view s) {
  if (s == "per-user") return StatsUnit::PerUser;
  if (s == "per-text") return StatsUnit::PerText;
  throw UsageError("stats unit must be per-user or per-text, got '" + std::string(s) + "'");
}

namespace {

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw UsageError(std::string("config section '") + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw UsageError(std::string("unknown config key '") + section + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config key '") + key + "' has the wrong type");
  }
}

fs::path read_path(const json& j, const char* key, const fs::path& base) {
  std::string s;
  read(j, key, s);
  if (s.empty()) return {};
  fs::path p(s);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::string rel_path(const fs::path& p, const fs::path& base) {
  if (p.empty()) return "";
  return p.lexically_proximate(base).generic_string();
}

ProviderKind parse_kind(const std::string& s) {
  if (s == "remote") return ProviderKind::Remote;
  if (s == "precomputed") return ProviderKind::Precomputed;
  if (s == "test-hash") return ProviderKind::TestHash;
  throw UsageError("provider kind must be remote, precomputed or test-hash, got '" + s + "'");
}

std::string_view kind_name(ProviderKind k) {
  switch (k) {
    case ProviderKind::Remote: return "remote";
    case ProviderKind::Precomputed: return "precomputed";
    case ProviderKind::TestHash: return "test-hash";
  }
  return "?";
}

TrainConfig read_train(const json& j, const char* section, TrainConfig defaults) {
  if (j.is_null()) return defaults;
  check_keys(j, section, {"l2_lambda", "learning_rate", "max_iters", "tol", "seed", "standardize"});
  try {
    return train_config_from_json(j, defaults);
  } catch (const json::exception&) {
    throw UsageError(std::string("config section '") + section + "' has a value of the wrong type");
  } catch (const Error& e) {
    throw UsageError(std::string(section) + ": " + e.what());
  }
}

}  // namespace

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  PipelineConfig cfg;
  cfg.base_dir = base_dir;
  check_keys(j, "config", {"paths", "schema", "filter", "provider", "traits", "genre", "split", "analysis", "report"});

  if (j.contains("paths")) {
    const json& p = j["paths"];
    check_keys(p, "paths", {"corpus", "blocklist", "passages", "pools", "annotations", "out"});
    cfg.corpus = read_path(p, "corpus", base_dir);
    cfg.blocklist = read_path(p, "blocklist", base_dir);
    cfg.passages = read_path(p, "passages", base_dir);
    cfg.annotations = read_path(p, "annotations", base_dir);
    if (p.contains("out")) cfg.out = read_path(p, "out", base_dir);
    if (p.contains("pools")) {
      if (!p["pools"].is_array()) throw UsageError("paths.pools must be an array");
      for (const json& e : p["pools"]) {
        check_keys(e, "paths.pools[]", {"file", "trait", "level", "generator"});
        PassagePool pool;
        pool.file = read_path(e, "file", base_dir);
        std::string trait, level, gen;
        read(e, "trait", trait);
        read(e, "level", level);
        read(e, "generator", gen);
        const auto t = parse_trait(trait);
        const auto l = parse_level(level);
        const auto g = parse_generator(gen);
        if (!t || !l || !g) throw UsageError("pool entry needs a valid trait, level and generator");
        pool.trait = *t;
        pool.level = *l;
        pool.generator = *g;
        cfg.pools.push_back(pool);
      }
    }
  }
  if (j.contains("schema")) {
    const json& s = j["schema"];
    check_keys(s, "schema", {"sample_id", "user_id", "genre", "subreddit", "body"});
    read(s, "sample_id", cfg.schema.sample_id);
    read(s, "user_id", cfg.schema.user_id);
    read(s, "genre", cfg.schema.genre);
    read(s, "subreddit", cfg.schema.subreddit);
    read(s, "body", cfg.schema.body);
  }
  if (j.contains("filter")) {
    const json& f = j["filter"];
    check_keys(f, "filter", {"min_tokens", "dedup", "blocklist"});
    read(f, "min_tokens", cfg.filter.min_tokens);
    read(f, "dedup", cfg.filter.dedup);
    std::vector<std::string> block;
    read(f, "blocklist", block);
    cfg.filter.blocklist.insert(block.begin(), block.end());
  }
  if (j.contains("provider")) {
    const json& p = j["provider"];
    check_keys(p, "provider", {"kind", "endpoint", "path", "dim", "passage_prefix", "batch_size",
                               "max_in_flight", "max_attempts", "seed", "cache"});
    std::string kind = "test-hash";
    read(p, "kind", kind);
    cfg.provider.kind = parse_kind(kind);
    read(p, "endpoint", cfg.provider.endpoint);
    cfg.provider.path = read_path(p, "path", base_dir);
    read(p, "dim", cfg.provider.dim);
    read(p, "passage_prefix", cfg.provider.passage_prefix);
    read(p, "batch_size", cfg.provider.batch_size);
    read(p, "max_in_flight", cfg.provider.max_in_flight);
    read(p, "max_attempts", cfg.provider.max_attempts);
    read(p, "seed", cfg.provider.seed);
    read(p, "cache", cfg.embedding_cache);
  }
  cfg.traits = read_train(j.value("traits", json()), "traits", cfg.traits);
  cfg.genre = read_train(j.value("genre", json()), "genre", cfg.genre);
  if (j.contains("split")) {
    const json& s = j["split"];
    check_keys(s, "split", {"train_frac", "seed", "stratified"});
    read(s, "train_frac", cfg.train_frac);
    read(s, "seed", cfg.split_seed);
    read(s, "stratified", cfg.stratified);
  }
  if (j.contains("analysis")) {
    const json& a = j["analysis"];
    check_keys(a, "analysis", {"alpha", "unit"});
    read(a, "alpha", cfg.alpha);
    if (a.contains("unit")) {
      std::string unit;
      read(a, "unit", unit);
      cfg.unit = parse_stats_unit(unit);
    }
  }
  if (j.contains("report")) {
    check_keys(j["report"], "report", {"top_subreddits"});
    read(j["report"], "top_subreddits", cfg.top_subreddits);
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw UsageError("config '" + path.string() + "' is not valid JSON");
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return config_from_json(j, base);
}

void PipelineConfig::validate() const {
  auto require = [](const fs::path& p, const char* what) {
    if (!p.empty() && !fs::exists(p)) {
      throw UsageError(std::string(what) + " '" + p.string() + "' does not exist");
    }
  };
  require(corpus, "corpus");
  require(blocklist, "blocklist");
  require(passages, "passages");
  require(annotations, "annotations");
  for (const auto& pool : pools) require(pool.file, "passage pool");
  if (provider.kind == ProviderKind::Precomputed) require(provider.path, "embedding file");
  if (provider.kind == ProviderKind::Remote && provider.endpoint.empty()) {
    throw UsageError("remote provider needs an endpoint");
  }
  if (provider.dim == 0) throw UsageError("provider dim must be positive");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw UsageError("split.train_frac must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("analysis.alpha must lie in (0, 1)");
  if (out.empty()) throw UsageError("output dir must be set");
  try {
    traits.validate();
    genre.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

json to_json(const PipelineConfig& cfg) {
  const fs::path& b = cfg.base_dir;
  json pools = json::array();
  for (const auto& p : cfg.pools) {
    pools.push_back({{"file", rel_path(p.file, b)},
                     {"trait", to_string(p.trait)},
                     {"level", to_string(p.level)},
                     {"generator", to_string(p.generator)}});
  }
  return {
      {"paths",
       {{"corpus", rel_path(cfg.corpus, b)},
        {"blocklist", rel_path(cfg.blocklist, b)},
        {"passages", rel_path(cfg.passages, b)},
        {"pools", pools},
        {"annotations", rel_path(cfg.annotations, b)}}},
      {"schema",
       {{"sample_id", cfg.schema.sample_id},
        {"user_id", cfg.schema.user_id},
        {"genre", cfg.schema.genre},
        {"subreddit", cfg.schema.subreddit},
        {"body", cfg.schema.body}}},
      {"filter",
       {{"min_tokens", cfg.filter.min_tokens},
        {"dedup", cfg.filter.dedup},
        {"blocklist", std::vector<std::string>(cfg.filter.blocklist.begin(), cfg.filter.blocklist.end())}}},
      {"provider",
       {{"kind", kind_name(cfg.provider.kind)},
        {"endpoint", cfg.provider.endpoint},
        {"path", rel_path(cfg.provider.path, b)},
        {"dim", cfg.provider.dim},
        {"passage_prefix", cfg.provider.passage_prefix},
        {"batch_size", cfg.provider.batch_size},
        {"max_in_flight", cfg.provider.max_in_flight},
        {"max_attempts", cfg.provider.max_attempts},
        {"seed", cfg.provider.seed},
        {"cache", cfg.embedding_cache}}},
      {"traits", to_json(cfg.traits)},
      {"genre", to_json(cfg.genre)},
      {"split", {{"train_frac", cfg.train_frac}, {"seed", cfg.split_seed}, {"stratified", cfg.stratified}}},
      {"analysis", {{"alpha", cfg.alpha}, {"unit", to_string(cfg.unit)}}},
      {"report", {{"top_subreddits", cfg.top_subreddits}}},
  };
}

std::string config_hash(const PipelineConfig& cfg) { return hex64(fnv1a(to_json(cfg).dump())); }

}  // namespace persona
