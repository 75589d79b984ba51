#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "persona/types.hpp"

namespace persona {

// Sum by recursive halving; the result depends only on the order of the
// input, never on how work is scheduled.
double pairwise_sum(std::span<const double> values);
double mean(std::span<const double> values);
// Sample variance (n - 1 denominator); requires n >= 2.
double sample_variance(std::span<const double> values);

// ---- one-way ANOVA ---------------------------------------------------------

struct AnovaResult {
  double f = 0.0;  // +inf when within-group variation is zero (degenerate)
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double p = 1.0;
  double log10_p = 0.0;
  bool degenerate = false;
};

// F = MSB / MSW from definitional sums of squares; p is the F upper tail.
// Needs >= 2 groups of >= 2 finite values. Throws DataError("no variation")
// when every value is equal.
AnovaResult anova_oneway(std::span<const std::vector<double>> groups);

// ---- Mann-Whitney U --------------------------------------------------------

enum class MannWhitneyMode { Auto, Exact, Normal };

struct MannWhitneyResult {
  double u_a = 0.0;  // pairs (x in a, y in b) with x > y, ties counted 1/2
  double u_b = 0.0;  // n_a * n_b - u_a
  double p = 1.0;    // two-tailed
  double log10_p = 0.0;
  bool exact = false;
  bool degenerate = false;  // all pooled values identical; p = 1
};

// Ranks use midranks for ties. Exact mode counts the permutation null
// distribution of the rank sum (ties included) and reports
// min(1, 2 * min(P(U <= u), P(U >= u))). Normal mode uses the tie-corrected
// variance with a 0.5 continuity correction. Auto picks exact when
// n_a + n_b <= 16.
MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b,
                               MannWhitneyMode mode = MannWhitneyMode::Auto);

// ---- effect sizes ----------------------------------------------------------

// (mean_a - mean_b) / pooled sd, sample variances. Needs n >= 2 per group;
// zero pooled variance throws DataError("degenerate effect size").
double cohens_d(std::span<const double> a, std::span<const double> b);

enum class EffectLabel { Negligible, Small, Medium, Large };

// By |d|: [0, 0.2) negligible, [0.2, 0.5) small, [0.5, 0.8) medium, >= 0.8 large.
EffectLabel effect_label(double d);
std::string_view to_string(EffectLabel label);

// ---- pairwise matrix -------------------------------------------------------

struct GenreGroup {
  Genre genre = Genre::Classical;
  std::vector<double> values;
};

struct PairwiseTestResult {
  Genre genre_a = Genre::Classical;
  Genre genre_b = Genre::Classical;
  double cohens_d = 0.0;  // positive: genre_a higher; NaN when degenerate
  double u_statistic = 0.0;  // U of genre_a
  double p = 1.0;
  double log10_p = 0.0;
  bool significant = false;  // p < alpha
  bool degenerate = false;
  std::string note;
};

struct EffectMatrix {
  Trait trait = Trait::OPN;
  std::vector<Genre> genres;
  double alpha = 0.05;
  std::vector<PairwiseTestResult> cells;  // every ordered pair a != b, row-major in `genres` order

  const PairwiseTestResult& at(Genre a, Genre b) const;
};

// Cohen's d and the normal-approximation Mann-Whitney test for every ordered
// pair. A degenerate cell is flagged and the others are still computed.
EffectMatrix pairwise_matrix(Trait trait, std::span<const GenreGroup> groups, double alpha = 0.05);

// p-values are clamped to 1e-300 for display; log10_p carries the real value.
void write_anova_csv_header(std::ostream& out);
void write_anova_csv_row(Trait trait, const AnovaResult& r, std::ostream& out);
void write_pairwise_csv_header(std::ostream& out);
void write_pairwise_csv_rows(const EffectMatrix& m, std::ostream& out);
// Supplementary: p multiplied by the number of unordered pairs, capped at 1.
void write_bonferroni_csv_header(std::ostream& out);
void write_bonferroni_csv_rows(const EffectMatrix& m, std::ostream& out);

}  // namespace persona
