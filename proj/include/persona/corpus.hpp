#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "persona/types.hpp"

namespace persona {

struct TextSample {
  std::string sample_id;
  std::string user_id;
  Genre genre = Genre::Classical;
  std::string subreddit;
  std::string body;
  std::size_t token_count = 0;
};

struct Corpus {
  std::vector<TextSample> samples;
  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Maps the canonical field names onto the keys used in the input JSONL.
struct CorpusSchema {
  std::string sample_id = "sample_id";
  std::string user_id = "user_id";
  std::string genre = "genre";
  std::string subreddit = "subreddit";
  std::string body = "body";
};

struct LineRejection {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct LoadReport {
  std::size_t lines = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<LineRejection> rejections;
};

struct LoadResult {
  Corpus corpus;
  LoadReport report;
};

// Reads one JSON object per line. Lines that cannot be turned into a sample
// are counted in the report with a reason; an unreadable file or a user that
// appears under two genres throws DataError. A missing sample_id is replaced
// by "line:<n>".
LoadResult load_corpus(const std::filesystem::path& path, const CorpusSchema& schema = {});
LoadResult parse_corpus(std::istream& in, const CorpusSchema& schema = {});

void write_corpus(const Corpus& corpus, const std::filesystem::path& path,
                  const CorpusSchema& schema = {});

struct FilterConfig {
  std::size_t min_tokens = 40;
  std::set<std::string> blocklist;  // compared case-insensitively
  bool dedup = true;
};

// Rules are applied in the order blocklist -> length -> dedup; each removed
// sample is counted under the first rule that rejects it.
struct FilterReport {
  std::size_t input = 0;
  std::size_t removed_blocklist = 0;
  std::size_t removed_length = 0;
  std::size_t removed_dedup = 0;
  std::size_t kept = 0;
};

struct FilterResult {
  Corpus corpus;
  FilterReport report;
};

FilterResult filter_corpus(const Corpus& corpus, const FilterConfig& cfg);

struct GenreCounts {
  std::size_t users = 0;
  std::size_t texts = 0;
  double mean_texts_per_user = 0.0;  // 0 when users == 0
};

struct CorpusStats {
  std::array<GenreCounts, kNumGenres> per_genre{};
  GenreCounts total;
};

CorpusStats corpus_stats(const Corpus& corpus);

struct SubredditUsers {
  std::string subreddit;
  std::array<std::size_t, kNumGenres> users{};  // distinct users per genre
  std::size_t total_users = 0;
};

// Top-k subreddits by distinct users summed over genres; ties ordered by
// subreddit name. Returns all subreddits when k exceeds their number.
std::vector<SubredditUsers> subreddit_distribution(const Corpus& corpus, std::size_t top_k);

void write_corpus_stats_csv(const CorpusStats& stats, std::ostream& out);
void write_subreddit_csv(const std::vector<SubredditUsers>& rows, std::ostream& out);

// Reads a blocklist file: one subreddit per line, '#' comments and blank
// lines ignored.
std::set<std::string> read_blocklist(const std::filesystem::path& path);

}  // namespace persona
