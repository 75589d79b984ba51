#include "persona/genbigfive.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <regex>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "persona/error.hpp"
#include "persona/format.hpp"
#include "persona/text.hpp"

namespace persona {

using json = nlohmann::json;

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::string render_prompt(const PromptTemplate& tpl) {
  if (trim(tpl.definition).empty()) throw DataError("prompt template has an empty definition");
  if (trim(tpl.ending).empty()) throw DataError("prompt template has an empty ending");
  std::string text = tpl.definition + "\n\n" + tpl.ending;
  replace_all(text, "{trait}", full_name(tpl.trait));
  replace_all(text, "{level}", to_string(tpl.target_level));
  return text;
}

PromptTemplate PromptLibrary::make(Trait trait, Level level, const std::string& ending_key) const {
  auto it = endings.find(ending_key);
  if (it == endings.end()) throw UsageError("no prompt ending named '" + ending_key + "'");
  return PromptTemplate{trait, definitions[index_of(trait)], it->second, level};
}

PromptLibrary load_prompt_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read prompt templates '" + path.string() + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw DataError("prompt templates are not JSON");
  PromptLibrary lib;
  for (Trait t : kTraits) {
    const std::string key(to_string(t));
    if (!doc["definitions"].contains(key)) throw DataError("prompt templates lack a " + key + " definition");
    lib.definitions[index_of(t)] = doc["definitions"][key].get<std::string>();
  }
  for (auto& [key, value] : doc["endings"].items()) lib.endings[key] = value.get<std::string>();
  return lib;
}

// ---------------------------------------------------------------------------

std::string clean_passage(std::string_view raw) {
  // Enumeration markers: "3.", "3)", "(3)", "-", "*", bullets, "Paragraph 3:".
  static const std::regex marker(
      R"(^\s*(?:\(\d{1,3}\)|\d{1,3}[.)]|[-*]|\xE2\x80\xA2|(?:paragraph|passage|text)\s*\d{1,3}\s*[:.)-])\s+)",
      std::regex::icase);
  static const std::array<std::pair<std::string_view, std::string_view>, 4> quotes = {{
      {"\"", "\""},
      {"'", "'"},
      {"\xE2\x80\x9C", "\xE2\x80\x9D"},  // curly double
      {"\xE2\x80\x98", "\xE2\x80\x99"},  // curly single
  }};

  std::string text = trim(raw);
  for (bool changed = true; changed;) {
    changed = false;
    std::string stripped = std::regex_replace(text, marker, "", std::regex_constants::format_first_only);
    if (stripped != text) {
      text = trim(stripped);
      changed = true;
    }
    for (const auto& [open, close] : quotes) {
      if (text.size() >= open.size() + close.size() && text.starts_with(open) &&
          text.ends_with(close)) {
        text = trim(std::string_view(text).substr(open.size(), text.size() - open.size() - close.size()));
        changed = true;
        break;
      }
    }
  }
  return collapse_whitespace(text);
}

namespace {

std::string make_passage_id(Trait trait, Level level, Generator generator, std::size_t n) {
  return std::string(to_string(trait)) + "-" + std::string(to_string(level)) + "-" +
         std::string(to_string(generator)) + "-" + std::to_string(n);
}

}  // namespace

IngestResult ingest_passage_lines(std::span<const std::string> lines, Trait trait, Level level,
                                  Generator generator) {
  IngestResult result;
  auto& report = result.report;
  std::unordered_set<std::string> seen;
  for (const auto& raw : lines) {
    ++report.lines;
    std::string text;
    const std::string stripped = trim(raw);
    if (!stripped.empty() && stripped.front() == '{') {
      json obj = json::parse(stripped, nullptr, false);
      if (obj.is_discarded() || !obj.is_object() || !obj.contains("text") || !obj["text"].is_string()) {
        ++report.dropped_malformed;
        continue;
      }
      text = clean_passage(obj["text"].get<std::string>());
    } else {
      text = clean_passage(stripped);
    }
    if (text.empty()) {
      ++report.dropped_empty;
      continue;
    }
    if (!seen.insert(normalize_text(text)).second) {
      ++report.dropped_duplicate;
      continue;
    }
    LabeledPassage p;
    p.passage_id = make_passage_id(trait, level, generator, result.passages.size());
    p.trait = trait;
    p.level = level;
    p.generator = generator;
    p.word_count = count_tokens(text);
    p.text = std::move(text);
    result.passages.push_back(std::move(p));
  }
  report.kept = result.passages.size();
  return result;
}

IngestResult ingest_passages(const std::filesystem::path& path, Trait trait, Level level,
                             Generator generator) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read passages '" + path.string() + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return ingest_passage_lines(lines, trait, level, generator);
}

IngestResult parse_passages(std::istream& in) {
  IngestResult result;
  auto& report = result.report;
  std::unordered_set<std::string> seen_text;
  std::unordered_set<std::string> seen_id;
  std::string line;
  while (std::getline(in, line)) {
    ++report.lines;
    if (trim(line).empty()) {
      ++report.dropped_empty;
      continue;
    }
    json obj = json::parse(line, nullptr, false);
    auto str = [&](const char* key) -> std::optional<std::string> {
      if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) return std::nullopt;
      return obj[key].get<std::string>();
    };
    const auto id = str("passage_id");
    const auto trait = str("trait") ? parse_trait(*str("trait")) : std::nullopt;
    const auto level = str("level") ? parse_level(*str("level")) : std::nullopt;
    const auto gen = str("generator") ? parse_generator(*str("generator")) : std::nullopt;
    const auto raw = str("text");
    if (obj.is_discarded() || !id || id->empty() || !trait || !level || !gen || !raw) {
      ++report.dropped_malformed;
      continue;
    }
    if (!seen_id.insert(*id).second) throw DataError("duplicate passage_id '" + *id + "'");
    std::string text = clean_passage(*raw);
    if (text.empty()) {
      ++report.dropped_empty;
      continue;
    }
    if (!seen_text.insert(normalize_text(text)).second) {
      ++report.dropped_duplicate;
      continue;
    }
    LabeledPassage p{*id, *trait, *level, *gen, std::move(text), 0};
    p.word_count = count_tokens(p.text);
    result.passages.push_back(std::move(p));
  }
  report.kept = result.passages.size();
  return result;
}

IngestResult load_passages(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read passages '" + path.string() + "'");
  return parse_passages(in);
}

void write_passages(std::span<const LabeledPassage> passages, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& p : passages) {
    json obj = json::object();
    obj["passage_id"] = p.passage_id;
    obj["trait"] = std::string(to_string(p.trait));
    obj["level"] = std::string(to_string(p.level));
    obj["generator"] = std::string(to_string(p.generator));
    obj["text"] = p.text;
    out << obj.dump() << '\n';
  }
}

std::vector<LabeledPassage> select_passages(std::span<const LabeledPassage> passages, Trait trait,
                                            Generator generator) {
  std::vector<LabeledPassage> out;
  for (const auto& p : passages) {
    if (p.trait == trait && p.generator == generator) out.push_back(p);
  }
  return out;
}

std::array<DatasetRow, kNumTraits> dataset_stats(std::span<const LabeledPassage> passages) {
  std::array<DatasetRow, kNumTraits> rows{};
  std::array<std::array<std::size_t, 2>, kNumTraits> words{};
  for (Trait t : kTraits) rows[index_of(t)].trait = t;
  for (const auto& p : passages) {
    auto& row = rows[index_of(p.trait)];
    const bool train = p.generator == Generator::TrainGen;
    PoolStats& pool = train ? row.train : row.test;
    ++pool.texts;
    if (p.level == Level::High) ++pool.high;
    words[index_of(p.trait)][train ? 0 : 1] += p.word_count;
  }
  for (auto& row : rows) {
    const auto& w = words[index_of(row.trait)];
    row.train.mean_words = row.train.texts ? static_cast<double>(w[0]) / static_cast<double>(row.train.texts) : 0.0;
    row.test.mean_words = row.test.texts ? static_cast<double>(w[1]) / static_cast<double>(row.test.texts) : 0.0;
  }
  return rows;
}

void write_dataset_stats_csv(const std::array<DatasetRow, kNumTraits>& rows, std::ostream& out) {
  out << "trait,train_texts,train_mean_wc,train_high_frac,test_texts,test_mean_wc,test_high_frac\n";
  for (const auto& r : rows) {
    out << to_string(r.trait) << ',' << r.train.texts << ',' << fixed(r.train.mean_words) << ','
        << fixed(r.train.high_fraction()) << ',' << r.test.texts << ',' << fixed(r.test.mean_words)
        << ',' << fixed(r.test.high_fraction()) << '\n';
  }
}

// ---------------------------------------------------------------------------

std::vector<AnnotationRecord> parse_annotations(std::istream& in) {
  std::vector<AnnotationRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (lineno == 1 && !fields.empty() && trim(fields[0]) == "passage_id") continue;
    if (fields.size() != 3) {
      throw DataError("annotations line " + std::to_string(lineno) + ": expected 3 fields");
    }
    const auto label = parse_level(trim(fields[2]));
    if (!label) {
      throw DataError("annotations line " + std::to_string(lineno) + ": label must be low or high");
    }
    AnnotationRecord r{trim(fields[0]), trim(fields[1]), *label};
    if (!seen.emplace(r.passage_id, r.annotator_id).second) {
      throw DataError("annotator '" + r.annotator_id + "' labeled passage '" + r.passage_id +
                      "' twice");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read annotations '" + path.string() + "'");
  return parse_annotations(in);
}

Level majority_vote(std::span<const AnnotationRecord> records) {
  std::set<std::string> annotators;
  std::size_t high = 0;
  for (const auto& r : records) {
    if (!annotators.insert(r.annotator_id).second) {
      throw DataError("annotator '" + r.annotator_id + "' voted twice");
    }
    if (r.label == Level::High) ++high;
  }
  const std::size_t n = records.size();
  if (n < 3 || n % 2 == 0) {
    throw DataError("majority vote needs an odd number (>= 3) of annotators, got " + std::to_string(n));
  }
  const std::size_t low = n - high;
  if (high == low) throw DataError("majority vote tie");
  return high > low ? Level::High : Level::Low;
}

std::map<std::string, Level> adjudicate(std::span<const AnnotationRecord> records,
                                        std::vector<std::string>* skipped) {
  std::map<std::string, std::vector<AnnotationRecord>> by_passage;
  for (const auto& r : records) by_passage[r.passage_id].push_back(r);
  std::map<std::string, Level> out;
  for (const auto& [id, recs] : by_passage) {
    try {
      out[id] = majority_vote(recs);
    } catch (const DataError&) {
      if (!skipped) throw;
      skipped->push_back(id);
    }
  }
  return out;
}

double agreement_rate(const std::map<std::string, Level>& adjudicated,
                      const std::map<std::string, Level>& reference) {
  auto missing = [](const std::map<std::string, Level>& from, const std::map<std::string, Level>& in) {
    std::string list;
    std::size_t n = 0;
    for (const auto& [id, _] : from) {
      if (in.contains(id)) continue;
      if (n < 10) list += (n ? ", " : "") + id;
      ++n;
    }
    if (n > 10) list += ", ... (" + std::to_string(n) + " total)";
    return list;
  };
  const std::string only_adj = missing(adjudicated, reference);
  const std::string only_ref = missing(reference, adjudicated);
  if (!only_adj.empty() || !only_ref.empty()) {
    throw DataError("label sets cover different passages; only adjudicated: [" + only_adj +
                    "]; only reference: [" + only_ref + "]");
  }
  if (adjudicated.empty()) throw DataError("agreement rate over an empty passage set");
  std::size_t match = 0;
  for (const auto& [id, label] : adjudicated) {
    if (reference.at(id) == label) ++match;
  }
  return static_cast<double>(match) / static_cast<double>(adjudicated.size());
}

double cohen_kappa(std::span<const Level> rater_a, std::span<const Level> rater_b) {
  if (rater_a.size() != rater_b.size()) throw DataError("kappa: raters labeled different item counts");
  if (rater_a.empty()) throw DataError("kappa: no items");
  const double n = static_cast<double>(rater_a.size());
  std::size_t agree = 0, a_high = 0, b_high = 0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    if (rater_a[i] == rater_b[i]) ++agree;
    if (rater_a[i] == Level::High) ++a_high;
    if (rater_b[i] == Level::High) ++b_high;
  }
  const double po = static_cast<double>(agree) / n;
  const double pa = static_cast<double>(a_high) / n;
  const double pb = static_cast<double>(b_high) / n;
  const double pe = pa * pb + (1.0 - pa) * (1.0 - pb);
  if (pe >= 1.0) {
    if (po >= 1.0) return 1.0;
    throw DataError("undefined kappa");
  }
  return (po - pe) / (1.0 - pe);
}

PairwiseKappa mean_pairwise_kappa(std::span<const AnnotationRecord> records) {
  std::map<std::string, std::map<std::string, Level>> by_annotator;
  for (const auto& r : records) by_annotator[r.annotator_id][r.passage_id] = r.label;
  if (by_annotator.size() < 2) throw DataError("kappa needs at least two annotators");

  PairwiseKappa out;
  double sum = 0.0;
  for (auto a = by_annotator.begin(); a != by_annotator.end(); ++a) {
    for (auto b = std::next(a); b != by_annotator.end(); ++b) {
      std::vector<Level> la, lb;
      for (const auto& [pid, label] : a->second) {
        auto it = b->second.find(pid);
        if (it == b->second.end()) continue;
        la.push_back(label);
        lb.push_back(it->second);
      }
      if (la.empty()) {
        ++out.pairs_skipped;
        continue;
      }
      try {
        sum += cohen_kappa(la, lb);
        ++out.pairs_used;
      } catch (const DataError&) {
        ++out.pairs_skipped;
      }
    }
  }
  if (out.pairs_used == 0) throw DataError("no annotator pair with a defined kappa");
  out.mean = sum / static_cast<double>(out.pairs_used);
  return out;
}

}  // namespace persona
