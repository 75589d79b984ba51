#include "persona/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "persona/error.hpp"
#include "persona/format.hpp"
#include "persona/text.hpp"

namespace persona {

using json = nlohmann::json;

namespace {

bool string_field(const json& obj, const std::string& key, std::string& out) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

}  // namespace

LoadResult parse_corpus(std::istream& in, const CorpusSchema& schema) {
  LoadResult result;
  auto& report = result.report;
  std::unordered_set<std::string> seen_ids;
  std::unordered_map<std::string, Genre> user_genre;

  auto reject = [&](std::size_t line, std::string reason) {
    ++report.rejected;
    report.rejections.push_back({line, std::move(reason)});
  };

  std::string line;
  while (std::getline(in, line)) {
    const std::size_t lineno = ++report.lines;
    if (trim(line).empty()) {
      reject(lineno, "empty line");
      continue;
    }
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      reject(lineno, "malformed JSON");
      continue;
    }

    TextSample s;
    std::string genre;
    if (!string_field(obj, schema.user_id, s.user_id) || s.user_id.empty()) {
      reject(lineno, "missing field '" + schema.user_id + "'");
      continue;
    }
    if (!string_field(obj, schema.genre, genre)) {
      reject(lineno, "missing field '" + schema.genre + "'");
      continue;
    }
    if (!string_field(obj, schema.subreddit, s.subreddit)) {
      reject(lineno, "missing field '" + schema.subreddit + "'");
      continue;
    }
    if (!string_field(obj, schema.body, s.body)) {
      reject(lineno, "missing field '" + schema.body + "'");
      continue;
    }
    const auto parsed = parse_genre(genre);
    if (!parsed) {
      reject(lineno, "unknown genre '" + genre + "'");
      continue;
    }
    s.genre = *parsed;
    if (!string_field(obj, schema.sample_id, s.sample_id) || s.sample_id.empty()) {
      s.sample_id = "line:" + std::to_string(lineno);
    }
    if (!seen_ids.insert(s.sample_id).second) {
      reject(lineno, "duplicate sample_id '" + s.sample_id + "'");
      continue;
    }
    auto [it, inserted] = user_genre.emplace(s.user_id, s.genre);
    if (!inserted && it->second != s.genre) {
      throw DataError("user '" + s.user_id + "' appears under genres " +
                      std::string(to_string(it->second)) + " and " +
                      std::string(to_string(s.genre)) + " (line " + std::to_string(lineno) + ")");
    }
    s.token_count = count_tokens(s.body);
    result.corpus.samples.push_back(std::move(s));
    ++report.accepted;
  }
  return result;
}

LoadResult load_corpus(const std::filesystem::path& path, const CorpusSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read corpus file '" + path.string() + "'");
  return parse_corpus(in, schema);
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path,
                  const CorpusSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& s : corpus.samples) {
    json obj = json::object();
    obj[schema.sample_id] = s.sample_id;
    obj[schema.user_id] = s.user_id;
    obj[schema.genre] = std::string(to_string(s.genre));
    obj[schema.subreddit] = s.subreddit;
    obj[schema.body] = s.body;
    obj["token_count"] = s.token_count;
    out << obj.dump() << '\n';
  }
}

FilterResult filter_corpus(const Corpus& corpus, const FilterConfig& cfg) {
  if (cfg.min_tokens < 1) throw UsageError("min_tokens must be >= 1");
  std::unordered_set<std::string> blocked;
  for (const auto& name : cfg.blocklist) blocked.insert(to_lower(name));

  FilterResult result;
  auto& report = result.report;
  report.input = corpus.size();
  std::unordered_set<std::string> seen_bodies;
  for (const auto& s : corpus.samples) {
    if (blocked.contains(to_lower(s.subreddit))) {
      ++report.removed_blocklist;
      continue;
    }
    if (s.token_count < cfg.min_tokens) {
      ++report.removed_length;
      continue;
    }
    if (cfg.dedup && !seen_bodies.insert(normalize_text(s.body)).second) {
      ++report.removed_dedup;
      continue;
    }
    result.corpus.samples.push_back(s);
  }
  report.kept = result.corpus.size();
  return result;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  std::array<std::unordered_set<std::string>, kNumGenres> users;
  for (const auto& s : corpus.samples) {
    users[index_of(s.genre)].insert(s.user_id);
    ++stats.per_genre[index_of(s.genre)].texts;
  }
  for (std::size_t g = 0; g < kNumGenres; ++g) {
    auto& row = stats.per_genre[g];
    row.users = users[g].size();
    row.mean_texts_per_user =
        row.users == 0 ? 0.0 : static_cast<double>(row.texts) / static_cast<double>(row.users);
    stats.total.users += row.users;
    stats.total.texts += row.texts;
  }
  stats.total.mean_texts_per_user =
      stats.total.users == 0
          ? 0.0
          : static_cast<double>(stats.total.texts) / static_cast<double>(stats.total.users);
  return stats;
}

std::vector<SubredditUsers> subreddit_distribution(const Corpus& corpus, std::size_t top_k) {
  std::map<std::string, std::array<std::unordered_set<std::string>, kNumGenres>> users;
  for (const auto& s : corpus.samples) users[s.subreddit][index_of(s.genre)].insert(s.user_id);

  std::vector<SubredditUsers> rows;
  rows.reserve(users.size());
  for (const auto& [name, per_genre] : users) {
    SubredditUsers row{name, {}, 0};
    for (std::size_t g = 0; g < kNumGenres; ++g) {
      row.users[g] = per_genre[g].size();
      row.total_users += row.users[g];
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.total_users != b.total_users) return a.total_users > b.total_users;
    return a.subreddit < b.subreddit;
  });
  if (rows.size() > top_k) rows.resize(top_k);
  return rows;
}

void write_corpus_stats_csv(const CorpusStats& stats, std::ostream& out) {
  out << "genre,users,total_texts,mean_texts_per_user\n";
  for (Genre g : kGenres) {
    const auto& row = stats.per_genre[index_of(g)];
    out << to_string(g) << ',' << row.users << ',' << row.texts << ','
        << fixed(row.mean_texts_per_user) << '\n';
  }
  out << "total," << stats.total.users << ',' << stats.total.texts << ','
      << fixed(stats.total.mean_texts_per_user) << '\n';
}

void write_subreddit_csv(const std::vector<SubredditUsers>& rows, std::ostream& out) {
  out << "subreddit,genre,users\n";
  for (const auto& row : rows) {
    for (Genre g : kGenres) {
      out << csv_field(row.subreddit) << ',' << to_string(g) << ',' << row.users[index_of(g)]
          << '\n';
    }
  }
}

std::set<std::string> read_blocklist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read blocklist '" + path.string() + "'");
  std::set<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    std::string name = trim(line);
    if (name.empty() || name.front() == '#') continue;
    if (name.rfind("r/", 0) == 0) name.erase(0, 2);
    names.insert(name);
  }
  return names;
}

}  // namespace persona
