#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "numeric_checks.hpp"
#include "oracles.hpp"
#include "persona/error.hpp"
#include "persona/random.hpp"
#include "persona/stats.hpp"

using namespace persona;
using namespace persona::testing;

namespace {

std::vector<double> draw(CounterRng& rng, std::size_t n, bool ties) {
  std::vector<double> v(n);
  for (auto& x : v) x = ties ? static_cast<double>(rng.below(4)) : rng.normal();
  return v;
}

}  // namespace

TEST_CASE("pairwise_sum and moments") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(pairwise_sum(v) == 10.0);
  CHECK(mean(v) == 2.5);
  CHECK(std::abs(sample_variance(v) - 5.0 / 3.0) < 1e-15);
  CHECK_THROWS_AS(sample_variance(std::vector<double>{1.0}), DataError);
}

TEST_CASE("ANOVA hand example") {
  const std::vector<std::vector<double>> g{{1, 2, 3}, {2, 3, 4}};
  const auto r = anova_oneway(g);
  CHECK(std::abs(r.f - 1.5) < 1e-12);
  CHECK(r.df_between == 1);
  CHECK(r.df_within == 4);
  CHECK(std::abs(r.p - 0.28786413472669066200) < 1e-12);
}

TEST_CASE("ANOVA degenerate and invalid inputs") {
  CHECK_THROWS_AS(anova_oneway(std::vector<std::vector<double>>{{1, 1}, {1, 1}}), DataError);
  CHECK_THROWS_AS(anova_oneway(std::vector<std::vector<double>>{{1, 2}}), DataError);
  CHECK_THROWS_AS(anova_oneway(std::vector<std::vector<double>>{{1}, {2, 3}}), DataError);
  const auto r = anova_oneway(std::vector<std::vector<double>>{{1, 1}, {2, 2}});
  CHECK(r.degenerate);
  CHECK(std::isinf(r.f));
}

TEST_CASE("ANOVA is invariant to affine maps and group order") {
  CounterRng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> g(4);
    for (auto& grp : g) grp = draw(rng, 5 + rng.below(6), false);
    const auto r = anova_oneway(g);
    auto h = g;
    for (auto& grp : h) {
      for (auto& x : grp) x = 3.0 * x - 7.0;
    }
    std::swap(h[0], h[3]);
    const auto s = anova_oneway(h);
    CHECK(std::abs(r.f - s.f) < 1e-9 * std::max(1.0, r.f));
    CHECK(r.p >= 0.0);
    CHECK(r.p <= 1.0);
  }
}

TEST_CASE("Mann-Whitney hand example") {
  const std::vector<double> a{1, 2}, b{3, 4};
  const auto r = mann_whitney(a, b, MannWhitneyMode::Exact);
  CHECK(r.u_a == 0.0);
  CHECK(r.u_b == 4.0);
  CHECK(std::abs(r.p - 1.0 / 3.0) < 1e-15);
  CHECK(r.exact);
}

TEST_CASE("exact Mann-Whitney matches enumeration") {
  CounterRng rng(22);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t na = 1 + rng.below(6);
    const std::size_t nb = 1 + rng.below(12 - na);
    const bool ties = trial % 2 == 0;
    const auto a = draw(rng, na, ties), b = draw(rng, nb, ties);
    const auto r = mann_whitney(a, b, MannWhitneyMode::Exact);
    if (r.degenerate) {
      CHECK(r.p == 1.0);
      continue;
    }
    CHECK(r.u_a == u_by_pairs(a, b));
    CHECK(r.u_a + r.u_b == static_cast<double>(na * nb));
    CHECK(std::abs(r.p - brute_force_mw_p(a, b)) < 1e-12);
  }
}

TEST_CASE("normal Mann-Whitney tracks the exact p for moderate n") {
  CounterRng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = draw(rng, 8, false);
    auto b = draw(rng, 8, false);
    for (auto& x : b) x += 0.5;
    const auto exact = mann_whitney(a, b, MannWhitneyMode::Exact);
    const auto approx = mann_whitney(a, b, MannWhitneyMode::Normal);
    CHECK(approx.u_a == exact.u_a);
    CHECK(std::abs(approx.p - exact.p) < 0.03);
  }
}

TEST_CASE("Mann-Whitney symmetry and degeneracy") {
  CounterRng rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = draw(rng, 20, trial % 3 == 0), b = draw(rng, 25, trial % 3 == 0);
    const auto ab = mann_whitney(a, b), ba = mann_whitney(b, a);
    CHECK(ab.u_a == ba.u_b);
    CHECK(std::abs(ab.p - ba.p) < 1e-14);
    CHECK(ab.p <= 1.0);
  }
  const std::vector<double> same{2, 2, 2};
  const auto r = mann_whitney(same, same);
  CHECK(r.degenerate);
  CHECK(r.p == 1.0);
  CHECK_THROWS_AS(mann_whitney(std::vector<double>{}, same), DataError);
}

TEST_CASE("Cohen's d") {
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  CHECK(std::abs(cohens_d(a, b) + 1.0) < 1e-15);
  CHECK_THROWS_AS(cohens_d(std::vector<double>{1, 1}, std::vector<double>{1, 1}), DataError);
  CounterRng rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    auto x = draw(rng, 6 + rng.below(10), false), y = draw(rng, 6 + rng.below(10), false);
    const double d = cohens_d(x, y);
    CHECK(cohens_d(y, x) == -d);
    const double scale = 0.1 + 5.0 * rng.uniform(), shift = rng.normal(0.0, 10.0);
    for (auto& v : x) v = scale * v + shift;
    for (auto& v : y) v = scale * v + shift;
    CHECK(std::abs(cohens_d(x, y) - d) < 1e-9);
  }
}

TEST_CASE("effect labels") {
  CHECK(effect_label(0.1) == EffectLabel::Negligible);
  CHECK(effect_label(-0.2) == EffectLabel::Small);
  CHECK(effect_label(0.5) == EffectLabel::Medium);
  CHECK(effect_label(-0.79) == EffectLabel::Medium);
  CHECK(effect_label(0.8) == EffectLabel::Large);
  CHECK(to_string(EffectLabel::Large) == "large");
}

TEST_CASE("pairwise matrix invariants") {
  CounterRng rng(26);
  std::vector<GenreGroup> groups;
  for (Genre g : kGenres) groups.push_back({g, draw(rng, 30, false)});
  groups[2].values.assign(30, 0.25);
  groups[3].values.assign(30, 0.25);
  const auto m = pairwise_matrix(Trait::EXT, groups, 0.05);
  CHECK(m.cells.size() == kGenres.size() * (kGenres.size() - 1));
  for (const auto& c : m.cells) {
    const auto& r = m.at(c.genre_b, c.genre_a);
    CHECK(r.p == c.p);
    CHECK(r.significant == c.significant);
    CHECK(c.significant == (c.p < 0.05));
    if (c.degenerate) {
      CHECK(std::isnan(c.cohens_d));
      CHECK(!c.note.empty());
    } else {
      CHECK(r.cohens_d == -c.cohens_d);
    }
  }
  CHECK(m.at(kGenres[2], kGenres[3]).degenerate);
  CHECK(!m.at(kGenres[0], kGenres[1]).degenerate);

  std::ostringstream out;
  write_pairwise_csv_header(out);
  write_pairwise_csv_rows(m, out);
  std::size_t lines = 0;
  for (char ch : out.str()) lines += ch == '\n';
  CHECK(lines == m.cells.size() + 1);
}
