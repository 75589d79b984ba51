#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "persona/types.hpp"

namespace persona {

struct LabeledPassage {
  std::string passage_id;
  Trait trait = Trait::OPN;
  Level level = Level::Low;
  Generator generator = Generator::TrainGen;
  std::string text;
  std::size_t word_count = 0;
};

// ---- prompts ---------------------------------------------------------------

// `ending` may contain the placeholders {trait} (full trait name) and {level}
// ("high"/"low"); they are substituted at render time.
struct PromptTemplate {
  Trait trait = Trait::OPN;
  std::string definition;
  std::string ending;
  Level target_level = Level::High;
};

// definition + "\n\n" + ending with placeholders substituted. Throws
// DataError when the definition or the ending is empty.
std::string render_prompt(const PromptTemplate& tpl);

struct PromptLibrary {
  std::array<std::string, kNumTraits> definitions;
  std::map<std::string, std::string> endings;  // keyed "primary", "a", "b", ...

  PromptTemplate make(Trait trait, Level level, const std::string& ending_key) const;
};

PromptLibrary load_prompt_library(const std::filesystem::path& path);

// ---- ingestion -------------------------------------------------------------

// Strips surrounding quotes and leading enumeration markers ("3.", "(3)",
// "- ", "Paragraph 3:") until neither applies, then collapses whitespace.
std::string clean_passage(std::string_view raw);

struct IngestReport {
  std::size_t lines = 0;
  std::size_t kept = 0;
  std::size_t dropped_empty = 0;
  std::size_t dropped_duplicate = 0;
  std::size_t dropped_malformed = 0;
};

struct IngestResult {
  std::vector<LabeledPassage> passages;
  IngestReport report;
};

// One passage per line (a line holding a JSON object with a "text" key is
// also accepted). Passages are cleaned, deduplicated on normalized text and
// given ids "<TRAIT>-<level>-<generator>-<n>" in kept order.
IngestResult ingest_passages(const std::filesystem::path& path, Trait trait, Level level,
                             Generator generator);
IngestResult ingest_passage_lines(std::span<const std::string> lines, Trait trait, Level level,
                                  Generator generator);

// JSONL with keys passage_id, trait, level, generator, text. Texts are cleaned
// and deduplicated the same way; ids are kept.
IngestResult load_passages(const std::filesystem::path& path);
IngestResult parse_passages(std::istream& in);
void write_passages(std::span<const LabeledPassage> passages, const std::filesystem::path& path);

// Passages for one trait and generator pool, in input order.
std::vector<LabeledPassage> select_passages(std::span<const LabeledPassage> passages, Trait trait,
                                            Generator generator);

struct PoolStats {
  std::size_t texts = 0;
  std::size_t high = 0;
  double mean_words = 0.0;  // 0 for an empty pool
  double high_fraction() const {
    return texts == 0 ? 0.0 : static_cast<double>(high) / static_cast<double>(texts);
  }
};

struct DatasetRow {
  Trait trait = Trait::OPN;
  PoolStats train;
  PoolStats test;
};

std::array<DatasetRow, kNumTraits> dataset_stats(std::span<const LabeledPassage> passages);
void write_dataset_stats_csv(const std::array<DatasetRow, kNumTraits>& rows, std::ostream& out);

// ---- adjudication ----------------------------------------------------------

struct AnnotationRecord {
  std::string passage_id;
  std::string annotator_id;
  Level label = Level::Low;
};

// CSV "passage_id,annotator_id,label" with a header row. A second label from
// the same annotator for the same passage is a DataError.
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);
std::vector<AnnotationRecord> parse_annotations(std::istream& in);

// Label with strictly more votes. Requires an odd number >= 3 of distinct
// annotators; anything else throws DataError.
Level majority_vote(std::span<const AnnotationRecord> records);

// Majority label per passage. Passages whose records violate the
// majority_vote precondition are reported in `skipped`.
std::map<std::string, Level> adjudicate(std::span<const AnnotationRecord> records,
                                        std::vector<std::string>* skipped = nullptr);

// Fraction of passages whose labels agree. Both maps must cover the same
// passages; otherwise DataError names the ids present in only one of them.
double agreement_rate(const std::map<std::string, Level>& adjudicated,
                      const std::map<std::string, Level>& reference);

// Two-rater Cohen's kappa over aligned label sequences:
// (p_o - p_e) / (1 - p_e), p_e from each rater's marginals. When p_e == 1 the
// result is 1 if p_o == 1, otherwise DataError("undefined kappa").
double cohen_kappa(std::span<const Level> rater_a, std::span<const Level> rater_b);

struct PairwiseKappa {
  double mean = 0.0;
  std::size_t pairs_used = 0;
  std::size_t pairs_skipped = 0;  // no co-annotated passage, or undefined
};

// Mean of Cohen's kappa over every annotator pair, each pair restricted to
// the passages both annotated.
PairwiseKappa mean_pairwise_kappa(std::span<const AnnotationRecord> records);

}  // namespace persona
