#include "persona/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include "persona/error.hpp"
#include "persona/format.hpp"
#include "persona/special.hpp"

namespace persona {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
  if (values.empty()) throw DataError("mean of an empty sample");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw DataError("sample variance needs at least two values");
  const double m = mean(values);
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(),
                 [m](double v) { return (v - m) * (v - m); });
  return pairwise_sum(sq) / static_cast<double>(values.size() - 1);
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError(std::string(what) + ": non-finite value");
  }
}

constexpr double kLn10 = std::numbers::ln10;

}  // namespace

// ---------------------------------------------------------------------------

AnovaResult anova_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw DataError("ANOVA needs at least two groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.size() < 2) throw DataError("ANOVA needs at least two values per group");
    require_finite(g, "ANOVA");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  const double grand = mean(pooled);
  std::vector<double> between, within;
  for (const auto& g : groups) {
    const double m = mean(g);
    between.push_back(static_cast<double>(g.size()) * (m - grand) * (m - grand));
    for (double v : g) within.push_back((v - m) * (v - m));
  }
  const double ssb = pairwise_sum(between);
  const double ssw = pairwise_sum(within);

  AnovaResult r;
  r.df_between = groups.size() - 1;
  r.df_within = pooled.size() - groups.size();
  if (ssw == 0.0) {
    if (ssb == 0.0) throw DataError("no variation");
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    r.log10_p = -std::numeric_limits<double>::infinity();
    r.degenerate = true;
    return r;
  }
  const double dfb = static_cast<double>(r.df_between);
  const double dfw = static_cast<double>(r.df_within);
  r.f = (ssb / dfb) / (ssw / dfw);
  r.p = f_survival(r.f, dfb, dfw);
  r.log10_p = log_f_survival(r.f, dfb, dfw) / kLn10;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct Ranking {
  std::vector<double> ranks;  // midranks, pooled order (a first, then b)
  double tie_term = 0.0;      // sum of t^3 - t over tie groups
};

Ranking midranks(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  Ranking r;
  r.ranks.assign(n, 0.0);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of 1-based i+1..j+1
    for (std::size_t k = i; k <= j; ++k) r.ranks[order[k]] = rank;
    const double t = static_cast<double>(j - i + 1);
    r.tie_term += t * t * t - t;
    i = j + 1;
  }
  return r;
}

// Exact two-tailed p from the permutation distribution of the doubled rank
// sum of group a. Doubled midranks are integers, so the distribution is a
// subset-sum count over integers.
double exact_p(const std::vector<double>& ranks, std::size_t n_a, double observed_rank_sum) {
  std::vector<long> doubled;
  long total = 0;
  for (double r : ranks) {
    doubled.push_back(std::lround(2.0 * r));
    total += doubled.back();
  }
  const std::size_t max_sum = static_cast<std::size_t>(total);
  // counts[k][s]: subsets of size k with doubled rank sum s.
  std::vector<std::vector<double>> counts(n_a + 1, std::vector<double>(max_sum + 1, 0.0));
  counts[0][0] = 1.0;
  for (std::size_t item = 0; item < doubled.size(); ++item) {
    const auto w = static_cast<std::size_t>(doubled[item]);
    for (std::size_t k = std::min(n_a, item + 1); k >= 1; --k) {
      const auto& prev = counts[k - 1];
      auto& cur = counts[k];
      for (std::size_t s = max_sum; s >= w; --s) {
        if (prev[s - w] != 0.0) cur[s] += prev[s - w];
        if (s == w) break;
      }
    }
  }
  const auto observed = static_cast<std::size_t>(std::lround(2.0 * observed_rank_sum));
  const auto& dist = counts[n_a];
  double all = 0.0, lower = 0.0, upper = 0.0;
  for (std::size_t s = 0; s <= max_sum; ++s) {
    all += dist[s];
    if (s <= observed) lower += dist[s];
    if (s >= observed) upper += dist[s];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / all);
}

}  // namespace

MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b,
                               MannWhitneyMode mode) {
  if (a.empty() || b.empty()) throw DataError("Mann-Whitney needs at least one value per group");
  require_finite(a, "Mann-Whitney");
  require_finite(b, "Mann-Whitney");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const std::size_t n = a.size() + b.size();

  const Ranking ranking = midranks(a, b);
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranking.ranks[i];

  MannWhitneyResult r;
  r.u_a = rank_sum_a - na * (na + 1.0) / 2.0;
  r.u_b = na * nb - r.u_a;

  const double nd = static_cast<double>(n);
  if (ranking.tie_term == nd * nd * nd - nd) {  // one tie group holding everything
    r.degenerate = true;
    r.p = 1.0;
    r.log10_p = 0.0;
    return r;
  }

  const bool exact = mode == MannWhitneyMode::Exact || (mode == MannWhitneyMode::Auto && n <= 16);
  if (exact) {
    r.exact = true;
    r.p = exact_p(ranking.ranks, a.size(), rank_sum_a);
    r.log10_p = std::log10(r.p);
    return r;
  }

  const double mu = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((nd + 1.0) - ranking.tie_term / (nd * (nd - 1.0)));
  const double z = std::max(std::fabs(r.u_a - mu) - 0.5, 0.0) / std::sqrt(var);
  r.p = std::min(1.0, 2.0 * normal_sf(z));
  r.log10_p = std::min(0.0, (std::numbers::ln2 + log_normal_sf(z)) / kLn10);
  return r;
}

// ---------------------------------------------------------------------------

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("Cohen's d needs at least two values per group");
  require_finite(a, "Cohen's d");
  require_finite(b, "Cohen's d");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled =
      ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
  if (!(pooled > 0.0)) throw DataError("degenerate effect size");
  return (mean(a) - mean(b)) / std::sqrt(pooled);
}

EffectLabel effect_label(double d) {
  const double m = std::fabs(d);
  if (m < 0.2) return EffectLabel::Negligible;
  if (m < 0.5) return EffectLabel::Small;
  if (m < 0.8) return EffectLabel::Medium;
  return EffectLabel::Large;
}

std::string_view to_string(EffectLabel label) {
  switch (label) {
    case EffectLabel::Negligible: return "negligible";
    case EffectLabel::Small: return "small";
    case EffectLabel::Medium: return "medium";
    case EffectLabel::Large: return "large";
  }
  return "?";
}

// ---------------------------------------------------------------------------

const PairwiseTestResult& EffectMatrix::at(Genre a, Genre b) const {
  for (const auto& c : cells) {
    if (c.genre_a == a && c.genre_b == b) return c;
  }
  throw DataError("no cell for (" + std::string(to_string(a)) + ", " + std::string(to_string(b)) + ")");
}

EffectMatrix pairwise_matrix(Trait trait, std::span<const GenreGroup> groups, double alpha) {
  if (groups.size() < 2) throw DataError("pairwise matrix needs at least two genres");
  for (const auto& g : groups) {
    if (g.values.size() < 2) {
      throw DataError("genre " + std::string(to_string(g.genre)) + " has fewer than two samples");
    }
  }
  EffectMatrix m;
  m.trait = trait;
  m.alpha = alpha;
  for (const auto& g : groups) m.genres.push_back(g.genre);
  for (const auto& ga : groups) {
    for (const auto& gb : groups) {
      if (ga.genre == gb.genre) continue;
      PairwiseTestResult cell;
      cell.genre_a = ga.genre;
      cell.genre_b = gb.genre;
      try {
        cell.cohens_d = cohens_d(ga.values, gb.values);
      } catch (const DataError& e) {
        cell.cohens_d = std::numeric_limits<double>::quiet_NaN();
        cell.degenerate = true;
        cell.note = e.what();
      }
      const auto mw = mann_whitney(ga.values, gb.values, MannWhitneyMode::Normal);
      cell.u_statistic = mw.u_a;
      cell.p = mw.p;
      cell.log10_p = mw.log10_p;
      if (mw.degenerate) {
        cell.degenerate = true;
        if (cell.note.empty()) cell.note = "all values identical";
      }
      cell.significant = cell.p < alpha;
      m.cells.push_back(std::move(cell));
    }
  }
  return m;
}

namespace {

std::string display_p(double p) { return sci(std::max(p, 1e-300)); }

}  // namespace

void write_anova_csv_header(std::ostream& out) { out << "trait,F,df_between,df_within,p,log10_p\n"; }

void write_anova_csv_row(Trait trait, const AnovaResult& r, std::ostream& out) {
  out << to_string(trait) << ',' << fixed(r.f) << ',' << r.df_between << ',' << r.df_within << ','
      << display_p(r.p) << ',' << fixed(r.log10_p) << '\n';
}

void write_pairwise_csv_header(std::ostream& out) {
  out << "trait,genre_a,genre_b,cohens_d,effect_label,U,p,significant\n";
}

void write_pairwise_csv_rows(const EffectMatrix& m, std::ostream& out) {
  for (const auto& c : m.cells) {
    const bool has_d = std::isfinite(c.cohens_d);
    out << to_string(m.trait) << ',' << to_string(c.genre_a) << ',' << to_string(c.genre_b) << ','
        << fixed(c.cohens_d) << ',' << (has_d ? to_string(effect_label(c.cohens_d)) : "undefined")
        << ',' << fixed(c.u_statistic) << ',' << display_p(c.p) << ','
        << (c.significant ? "true" : "false") << '\n';
  }
}

void write_bonferroni_csv_header(std::ostream& out) {
  out << "trait,genre_a,genre_b,p,comparisons,p_bonferroni,significant_bonferroni\n";
}

void write_bonferroni_csv_rows(const EffectMatrix& m, std::ostream& out) {
  const std::size_t k = m.genres.size();
  const double comparisons = static_cast<double>(k * (k - 1) / 2);
  for (const auto& c : m.cells) {
    const double adjusted = std::min(1.0, c.p * comparisons);
    out << to_string(m.trait) << ',' << to_string(c.genre_a) << ',' << to_string(c.genre_b) << ','
        << display_p(c.p) << ',' << k * (k - 1) / 2 << ',' << display_p(adjusted) << ','
        << (adjusted < m.alpha ? "true" : "false") << '\n';
  }
}

}  // namespace persona
