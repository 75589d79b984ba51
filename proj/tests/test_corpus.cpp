#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "persona/corpus.hpp"
#include "persona/error.hpp"
#include "persona/random.hpp"
#include "persona/text.hpp"
#include "test_util.hpp"

using namespace persona;

namespace {

std::string line(const std::string& id, const std::string& user, const std::string& genre,
                 const std::string& sub, const std::string& body) {
  return "{\"sample_id\":\"" + id + "\",\"user_id\":\"" + user + "\",\"genre\":\"" + genre +
         "\",\"subreddit\":\"" + sub + "\",\"body\":\"" + body + "\"}\n";
}

LoadResult parse(const std::string& text, const CorpusSchema& schema = {}) {
  std::istringstream in(text);
  return parse_corpus(in, schema);
}

std::string words(std::size_t n, const std::string& w = "w") {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + w + std::to_string(i);
  return s;
}

TextSample make_sample(std::string id, std::string user, Genre g, std::string sub, std::string body) {
  TextSample s{std::move(id), std::move(user), g, std::move(sub), std::move(body), 0};
  s.token_count = count_tokens(s.body);
  return s;
}

// Random corpus with short texts, repeats (modulo case and spacing) and a
// few blocklisted communities.
Corpus random_corpus(CounterRng& rng, std::size_t n) {
  const char* subs[] = {"news", "Metal", "books", "music", "pics"};
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t user = rng.below(12);
    const Genre g = kGenres[user % kNumGenres];
    std::string body;
    if (rng.below(4) == 0 && !c.samples.empty()) {
      body = to_lower(c.samples[rng.below(c.samples.size())].body) + "  ";
    } else {
      body = words(rng.below(8), "t" + std::to_string(rng.below(3)));
    }
    c.samples.push_back(make_sample("s" + std::to_string(i), "u" + std::to_string(user), g,
                               subs[rng.below(5)], body));
  }
  return c;
}

std::vector<std::string> ids(const Corpus& c) {
  std::vector<std::string> v;
  for (const auto& s : c.samples) v.push_back(s.sample_id);
  return v;
}

}  // namespace

TEST_CASE("load: valid lines become samples") {
  const auto r = parse(line("1", "u1", "Metal", "news", "a b c") + line("2", "u2", "Indie", "pics", "x") +
                       line("3", "u1", "Metal", "news", "d"));
  CHECK(r.corpus.size() == 3);
  CHECK(r.report.accepted == 3);
  CHECK(r.report.rejected == 0);
  CHECK(r.corpus.samples[0].token_count == 3);
  CHECK(r.corpus.samples[0].genre == Genre::Metal);
}

TEST_CASE("load: bad lines are counted with a reason, never dropped silently") {
  const auto r = parse(line("1", "u1", "Jazz", "news", "a") + "{oops\n" + "\n" +
                       "{\"user_id\":\"u3\",\"genre\":\"Metal\",\"subreddit\":\"s\"}\n" +
                       line("5", "u5", "Metal", "s", "ok") + line("5", "u6", "Metal", "s", "dup id"));
  CHECK(r.report.lines == 6);
  CHECK(r.report.accepted == 1);
  CHECK(r.report.rejected == 5);
  REQUIRE(r.report.rejections.size() == 5);
  CHECK(r.report.rejections[0].reason.find("unknown genre") != std::string::npos);
  CHECK(r.report.rejections[0].line == 1);
  CHECK(r.report.rejections[1].reason == "malformed JSON");
  CHECK(r.report.rejections[3].reason.find("body") != std::string::npos);
  CHECK(r.report.rejections[4].reason.find("duplicate sample_id") != std::string::npos);
}

TEST_CASE("load: schema mapping and generated ids") {
  CorpusSchema schema;
  schema.user_id = "author";
  schema.body = "text";
  const auto r = parse("{\"author\":\"a\",\"genre\":\"classical\",\"subreddit\":\"s\",\"text\":\"hi there\"}\n", schema);
  REQUIRE(r.corpus.size() == 1);
  CHECK(r.corpus.samples[0].user_id == "a");
  CHECK(r.corpus.samples[0].sample_id == "line:1");
  CHECK(r.corpus.samples[0].genre == Genre::Classical);
}

TEST_CASE("load: a user under two genres is fatal") {
  CHECK_THROWS_AS(parse(line("1", "u", "Metal", "s", "a") + line("2", "u", "Indie", "s", "b")), DataError);
}

TEST_CASE("load: unreadable file is fatal") {
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), DataError);
}

TEST_CASE("write_corpus round-trips and adds token_count") {
  testing::TempDir dir;
  const auto r = parse(line("1", "u1", "HipHop", "news", "a b") + line("2", "u2", "Indie", "pics", "c"));
  write_corpus(r.corpus, dir / "c.jsonl");
  CHECK(testing::read_text(dir / "c.jsonl").find("\"token_count\":2") != std::string::npos);
  const auto back = load_corpus(dir / "c.jsonl");
  REQUIRE(back.corpus.size() == 2);
  CHECK(back.corpus.samples[0].genre == Genre::HipHop);
  CHECK(back.corpus.samples[1].body == "c");
}

TEST_CASE("filter: length, dedup and blocklist examples") {
  Corpus c;
  c.samples.push_back(make_sample("short", "u1", Genre::Metal, "news", words(39)));
  c.samples.push_back(make_sample("long", "u1", Genre::Metal, "news", words(40)));
  c.samples.push_back(make_sample("dup", "u2", Genre::Metal, "news", "  " + to_lower(words(40)) + " "));
  c.samples.push_back(make_sample("blocked", "u3", Genre::Metal, "Metal", words(50, "z")));
  FilterConfig cfg;
  cfg.blocklist = {"metal"};
  const auto r = filter_corpus(c, cfg);
  CHECK(ids(r.corpus) == std::vector<std::string>{"long"});
  CHECK(r.report.removed_length == 1);
  CHECK(r.report.removed_dedup == 1);
  CHECK(r.report.removed_blocklist == 1);
  CHECK(r.report.kept == 1);

  cfg.dedup = false;
  CHECK(filter_corpus(c, cfg).corpus.size() == 2);
}

TEST_CASE("filter properties over random corpora") {
  CounterRng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const Corpus c = random_corpus(rng, 1 + rng.below(40));
    FilterConfig cfg;
    cfg.min_tokens = 1 + rng.below(6);
    cfg.blocklist = {"METAL", "music"};
    cfg.dedup = rng.below(2) == 0;
    const auto once = filter_corpus(c, cfg);
    const auto twice = filter_corpus(once.corpus, cfg);

    // Idempotent.
    CHECK(ids(twice.corpus) == ids(once.corpus));
    // Monotone, with counts summing to the removals.
    const auto in_ids = ids(c);
    for (const auto& id : ids(once.corpus)) {
      CHECK(std::find(in_ids.begin(), in_ids.end(), id) != in_ids.end());
    }
    const auto& rep = once.report;
    CHECK(rep.removed_blocklist + rep.removed_length + rep.removed_dedup == c.size() - once.corpus.size());
    // Every kept sample satisfies the predicates.
    std::set<std::string> bodies;
    for (const auto& s : once.corpus.samples) {
      CHECK(s.token_count >= cfg.min_tokens);
      CHECK(to_lower(s.subreddit) != "metal");
      CHECK(to_lower(s.subreddit) != "music");
      if (cfg.dedup) CHECK(bodies.insert(normalize_text(s.body)).second);
    }
  }
}

TEST_CASE("corpus_stats arithmetic") {
  Corpus c;
  for (int i = 0; i < 2; ++i) c.samples.push_back(make_sample("a" + std::to_string(i), "u1", Genre::Indie, "s", "x"));
  for (int i = 0; i < 4; ++i) c.samples.push_back(make_sample("b" + std::to_string(i), "u2", Genre::Indie, "s", "x"));
  const auto st = corpus_stats(c);
  const auto& row = st.per_genre[index_of(Genre::Indie)];
  CHECK(row.users == 2);
  CHECK(row.texts == 6);
  CHECK(row.mean_texts_per_user == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(st.total.users == 2);
  CHECK(st.per_genre[index_of(Genre::Metal)].mean_texts_per_user == 0.0);

  const auto empty = corpus_stats(Corpus{});
  CHECK(empty.total.users == 0);
  CHECK(empty.total.mean_texts_per_user == 0.0);

  std::ostringstream out;
  write_corpus_stats_csv(st, out);
  CHECK(out.str().rfind("genre,users,total_texts,mean_texts_per_user\n", 0) == 0);
  CHECK(out.str().find("Indie,2,6,3.000000\n") != std::string::npos);
  CHECK(out.str().find("total,2,6,3.000000\n") != std::string::npos);
}

TEST_CASE("corpus_stats invariants over random corpora") {
  CounterRng rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    Corpus c = random_corpus(rng, rng.below(60));
    const auto st = corpus_stats(c);
    std::size_t users = 0, texts = 0;
    for (const auto& row : st.per_genre) {
      users += row.users;
      texts += row.texts;
      if (row.users) CHECK(std::abs(row.mean_texts_per_user - double(row.texts) / double(row.users)) < 1e-9);
    }
    CHECK(users == st.total.users);
    CHECK(texts == st.total.texts);
    rng.shuffle(c.samples);
    const auto shuffled = corpus_stats(c);
    CHECK(shuffled.total.users == st.total.users);
    CHECK(shuffled.total.texts == st.total.texts);
    for (std::size_t g = 0; g < kNumGenres; ++g) CHECK(shuffled.per_genre[g].texts == st.per_genre[g].texts);
  }
}

TEST_CASE("subreddit_distribution counts distinct users and ranks") {
  Corpus c;
  for (int i = 0; i < 5; ++i) c.samples.push_back(make_sample("p" + std::to_string(i), "u1", Genre::Metal, "solo", "x"));
  auto one = subreddit_distribution(c, 10);
  REQUIRE(one.size() == 1);
  CHECK(one[0].users[index_of(Genre::Metal)] == 1);

  Corpus d;
  int n = 0;
  for (int u = 0; u < 3; ++u) d.samples.push_back(make_sample("a" + std::to_string(n++), "x" + std::to_string(u), Genre::Indie, "small", "x"));
  for (int u = 0; u < 5; ++u) d.samples.push_back(make_sample("a" + std::to_string(n++), "y" + std::to_string(u), Genre::Indie, "big", "x"));
  auto top = subreddit_distribution(d, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].subreddit == "big");
  CHECK(subreddit_distribution(d, 100).size() == 2);

  Corpus t;
  t.samples.push_back(make_sample("1", "a", Genre::Indie, "zeta", "x"));
  t.samples.push_back(make_sample("2", "b", Genre::Indie, "alpha", "x"));
  auto tie = subreddit_distribution(t, 2);
  CHECK(tie[0].subreddit == "alpha");
  CHECK(tie[1].subreddit == "zeta");
}

TEST_CASE("read_blocklist strips comments and prefixes") {
  testing::TempDir dir;
  testing::write_text(dir / "b.txt", "# music\nr/Metal\n\n hiphopheads \n");
  const auto b = read_blocklist(dir / "b.txt");
  CHECK(b.count("Metal") == 1);
  CHECK(b.count("hiphopheads") == 1);
  CHECK(b.size() == 2);
}
