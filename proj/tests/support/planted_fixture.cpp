#include "planted_fixture.hpp"

#include <array>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "persona/error.hpp"
#include "persona/random.hpp"

namespace persona::fixture {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<const char*, 24> kSubreddits = {
    "AskReddit", "gaming",      "movies",    "books",     "science",   "worldnews",
    "cooking",   "fitness",     "travel",    "personalfinance", "technology", "pics",
    "history",   "DIY",         "photography", "soccer",  "nba",       "programming",
    "gardening", "relationships", "todayilearned", "food", "space",     "news"};

constexpr std::array<const char*, 4> kMusicSubreddits = {"Music", "hiphopheads", "metal", "indieheads"};

constexpr std::array<const char*, 20> kSyllables = {"ka", "lo", "mi", "ten", "ra", "vo", "sel", "dun",
                                                    "pri", "ba", "qua", "ne", "tor", "fi", "gal", "zu",
                                                    "wen", "ho", "sti", "mar"};

class TextSource {
 public:
  explicit TextSource(std::uint64_t seed) : rng_(seed) {
    std::set<std::string> seen;
    while (vocab_.size() < 1500) {
      std::string w;
      const auto n = 1 + rng_.below(3);
      for (std::uint64_t i = 0; i < n; ++i) w += kSyllables[rng_.below(kSyllables.size())];
      if (seen.insert(w).second) vocab_.push_back(w);
    }
  }

  // Unique text of min..max tokens.
  std::string next(std::size_t min_tokens, std::size_t max_tokens) {
    for (;;) {
      const std::size_t n = min_tokens + rng_.below(max_tokens - min_tokens + 1);
      std::string t;
      for (std::size_t i = 0; i < n; ++i) {
        if (i) t += ' ';
        t += vocab_[rng_.below(vocab_.size())];
      }
      if (used_.insert(t).second) return t;
    }
  }

  CounterRng& rng() { return rng_; }

 private:
  CounterRng rng_;
  std::vector<std::string> vocab_;
  std::set<std::string> used_;
};

std::ofstream open(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace

void write_planted_fixture(const fs::path& dir, const PlantedParams& params) {
  fs::create_directories(dir);
  TextSource src(params.seed);
  CounterRng& rng = src.rng();

  std::vector<std::string> planted_texts;
  {
    auto out = open(dir / "corpus.jsonl");
    std::size_t next_id = 0;
    auto emit = [&](const std::string& user, Genre g, const std::string& sub, const std::string& body) {
      json j = {{"sample_id", "s" + std::to_string(next_id++)},
                {"user_id", user},
                {"genre", std::string(to_string(g))},
                {"subreddit", sub},
                {"body", body}};
      out << j.dump() << '\n';
    };
    for (Genre g : kGenres) {
      for (std::size_t u = 0; u < params.users_per_genre; ++u) {
        const std::string user = std::string(to_string(g)) + "_u" + std::to_string(u);
        std::string last;
        for (std::size_t t = 0; t < params.texts_per_user; ++t) {
          last = src.next(40, 60);
          emit(user, g, kSubreddits[rng.below(kSubreddits.size())], last);
          if (g == params.planted_genre) planted_texts.push_back(last);
        }
        // Noise the filter must remove: a short text, a music-community
        // text and an exact repeat.
        if (u % 5 == 0) emit(user, g, kSubreddits[rng.below(kSubreddits.size())], src.next(5, 30));
        if (u % 7 == 0) emit(user, g, kMusicSubreddits[index_of(g) % kMusicSubreddits.size()], src.next(40, 60));
        if (u % 11 == 0) emit(user, g, kSubreddits[rng.below(kSubreddits.size())], last);
      }
    }
    out << "{not json\n";
    out << json{{"sample_id", "bad-genre"}, {"user_id", "x"}, {"genre", "Polka"}, {"subreddit", "news"},
                {"body", src.next(40, 60)}}.dump()
        << '\n';
  }

  {
    auto out = open(dir / "blocklist.txt");
    out << "# music communities excluded from scoring\n";
    for (const char* s : kMusicSubreddits) out << "r/" << s << '\n';
  }

  std::vector<std::string> annotated;
  {
    auto out = open(dir / "passages.jsonl");
    auto emit = [&](Trait t, Level l, Generator g, std::size_t i, const std::string& text) {
      const std::string id = std::string(to_string(t)) + "-" + std::string(to_string(l)) + "-" +
                             std::string(to_string(g)) + "-" + std::to_string(i);
      json j = {{"passage_id", id},
                {"trait", std::string(to_string(t))},
                {"level", std::string(to_string(l))},
                {"generator", std::string(to_string(g))},
                {"text", text}};
      out << j.dump() << '\n';
      if (g == Generator::TestGen && i < 2) annotated.push_back(id);
    };
    for (Trait t : kTraits) {
      if (t == params.planted_trait) {
        // Every k-th planted-genre text, so each user contributes equally.
        const auto take = static_cast<std::size_t>(params.planted_fraction * static_cast<double>(params.texts_per_user) + 0.5);
        std::size_t n = 0;
        for (std::size_t i = 0; i < planted_texts.size(); ++i) {
          if (i % params.texts_per_user < take) emit(t, Level::High, Generator::TrainGen, n++, planted_texts[i]);
        }
        for (std::size_t i = 0; i < n; ++i) emit(t, Level::Low, Generator::TrainGen, i, src.next(40, 60));
      } else {
        for (Level l : {Level::High, Level::Low}) {
          for (std::size_t i = 0; i < params.filler_per_level; ++i) emit(t, l, Generator::TrainGen, i, src.next(40, 60));
        }
      }
      for (Level l : {Level::High, Level::Low}) {
        for (std::size_t i = 0; i < params.test_per_level; ++i) emit(t, l, Generator::TestGen, i, src.next(40, 60));
      }
    }
  }

  {
    // Three annotators per passage; the third disagrees on every fourth one.
    auto out = open(dir / "annotations.csv");
    out << "passage_id,annotator_id,label\n";
    for (std::size_t i = 0; i < annotated.size(); ++i) {
      const std::string& id = annotated[i];
      const bool high = id.find("-high-") != std::string::npos;
      const char* truth = high ? "high" : "low";
      const char* other = high ? "low" : "high";
      out << id << ",a1," << truth << '\n';
      out << id << ",a2," << truth << '\n';
      out << id << ",a3," << (i % 4 == 3 ? other : truth) << '\n';
    }
  }

  {
    json cfg = {
        {"paths",
         {{"corpus", "corpus.jsonl"},
          {"blocklist", "blocklist.txt"},
          {"passages", "passages.jsonl"},
          {"annotations", "annotations.csv"},
          {"out", "out"}}},
        {"filter", {{"min_tokens", 40}, {"dedup", true}}},
        {"provider", {{"kind", "test-hash"}, {"dim", params.dim}, {"seed", 7}}},
        {"traits", {{"l2_lambda", 1e-3}, {"learning_rate", 0.5}, {"max_iters", 500}}},
        {"genre", {{"l2_lambda", 1e-3}, {"learning_rate", 0.5}, {"max_iters", 2000}}},
        {"split", {{"train_frac", 0.8}, {"seed", 42}, {"stratified", false}}},
        {"analysis", {{"alpha", 0.05}, {"unit", "per-user"}}},
    };
    auto out = open(dir / "config.json");
    out << cfg.dump(2) << '\n';
  }
}

}  // namespace persona::fixture
