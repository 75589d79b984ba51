#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "persona/profile.hpp"
#include "persona/stats.hpp"

namespace persona {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_table(const std::filesystem::path& path);
std::string markdown_table(const CsvTable& table);

// Parsers for the analysis CSVs, used to rebuild figure inputs.
std::vector<GenreTraitSummary> read_genre_traits_csv(const std::filesystem::path& path);
std::vector<EffectMatrix> read_pairwise_csv(const std::filesystem::path& path, double alpha);

// Heatmap colour of one cell: red for a significant positive d, blue for a
// significant negative d, white otherwise. Saturation grows with |d| and
// saturates at 1.5.
std::string effect_color(const PairwiseTestResult& cell);

// Static SVG charts. Output depends only on the inputs.
std::string genre_trait_chart_svg(std::span<const GenreTraitSummary> genres);
std::string effect_heatmap_svg(std::span<const EffectMatrix> matrices);

void write_fig2_csv(std::span<const GenreTraitSummary> genres, std::ostream& out);
void write_fig3_csv(std::span<const EffectMatrix> matrices, std::ostream& out);

}  // namespace persona
