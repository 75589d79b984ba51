#include "persona/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "persona/error.hpp"
#include "persona/format.hpp"

namespace persona {

namespace fs = std::filesystem;

CsvTable read_csv_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  t.header = parse_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto row = parse_csv_line(line);
    if (row.size() != t.header.size()) {
      throw DataError("'" + path.string() + "' has a row with " + std::to_string(row.size()) +
                      " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string markdown_table(const CsvTable& table) {
  std::ostringstream out;
  auto row = [&](const std::vector<std::string>& cells) {
    out << '|';
    for (const auto& c : cells) out << ' ' << c << " |";
    out << '\n';
  };
  row(table.header);
  out << '|';
  for (std::size_t i = 0; i < table.header.size(); ++i) out << " --- |";
  out << '\n';
  for (const auto& r : table.rows) row(r);
  return out.str();
}

namespace {

std::size_t column(const CsvTable& t, const std::string& name) {
  auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw DataError("CSV lacks column '" + name + "'");
  return static_cast<std::size_t>(it - t.header.begin());
}

Genre genre_field(const std::string& s) {
  auto g = parse_genre(s);
  if (!g) throw DataError("unknown genre '" + s + "'");
  return *g;
}

Trait trait_field(const std::string& s) {
  auto t = parse_trait(s);
  if (!t) throw DataError("unknown trait '" + s + "'");
  return *t;
}

std::string num(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kGenreColors[kNumGenres] = {"#4e79a7", "#f28e2b", "#59a14f", "#b07aa1", "#76716e"};

}  // namespace

std::vector<GenreTraitSummary> read_genre_traits_csv(const fs::path& path) {
  const CsvTable t = read_csv_table(path);
  const std::size_t cg = column(t, "genre"), ct = column(t, "trait"), cm = column(t, "mean"),
                    cs = column(t, "sd"), cn = column(t, "n_users");
  std::map<Genre, GenreTraitSummary> by_genre;
  for (const auto& r : t.rows) {
    const Genre g = genre_field(r[cg]);
    auto& summary = by_genre[g];
    summary.genre = g;
    auto& ts = summary.traits[index_of(trait_field(r[ct]))];
    ts.mean = parse_double(r[cm]);
    ts.sd = parse_double(r[cs]);
    ts.n_users = static_cast<std::size_t>(parse_double(r[cn]));
    ts.degenerate = ts.n_users < 2;
  }
  std::vector<GenreTraitSummary> out;
  for (auto& [g, s] : by_genre) out.push_back(s);
  return out;
}

std::vector<EffectMatrix> read_pairwise_csv(const fs::path& path, double alpha) {
  const CsvTable t = read_csv_table(path);
  const std::size_t ct = column(t, "trait"), ca = column(t, "genre_a"), cb = column(t, "genre_b"),
                    cd = column(t, "cohens_d"), cu = column(t, "U"), cp = column(t, "p"),
                    cs = column(t, "significant");
  std::vector<EffectMatrix> out;
  for (const auto& r : t.rows) {
    const Trait trait = trait_field(r[ct]);
    if (out.empty() || out.back().trait != trait) {
      out.push_back({});
      out.back().trait = trait;
      out.back().alpha = alpha;
    }
    EffectMatrix& m = out.back();
    PairwiseTestResult c;
    c.genre_a = genre_field(r[ca]);
    c.genre_b = genre_field(r[cb]);
    c.cohens_d = parse_double(r[cd]);
    c.u_statistic = parse_double(r[cu]);
    c.p = parse_double(r[cp]);
    c.significant = r[cs] == "true";
    c.degenerate = !std::isfinite(c.cohens_d);
    for (Genre g : {c.genre_a, c.genre_b}) {
      if (std::find(m.genres.begin(), m.genres.end(), g) == m.genres.end()) m.genres.push_back(g);
    }
    m.cells.push_back(c);
  }
  for (auto& m : out) std::sort(m.genres.begin(), m.genres.end());
  return out;
}

std::string effect_color(const PairwiseTestResult& cell) {
  if (!cell.significant || !std::isfinite(cell.cohens_d) || cell.cohens_d == 0.0) return "#ffffff";
  const double s = std::min(1.0, std::abs(cell.cohens_d) / 1.5);
  // Interpolate from a light tint toward the full hue.
  const int full[2][3] = {{178, 24, 43}, {33, 102, 172}};
  const int* hue = cell.cohens_d > 0 ? full[0] : full[1];
  const double t = 0.25 + 0.75 * s;
  char buf[8];
  auto mix = [&](int c) { return static_cast<int>(std::lround(255.0 + (c - 255.0) * t)); };
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(hue[0]), mix(hue[1]), mix(hue[2]));
  return buf;
}

std::string genre_trait_chart_svg(std::span<const GenreTraitSummary> genres) {
  const int bar = 14, gap = 24, left = 60, top = 40, height = 300;
  const int group = static_cast<int>(genres.size()) * bar;
  const int width = left + static_cast<int>(kNumTraits) * (group + gap) + 160;
  const int total_h = top + height + 60;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << total_h
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">Mean trait score per genre community</text>\n";
  const int base = top + height;
  for (int tick = 0; tick <= 5; ++tick) {
    const double v = tick * 0.2;
    const int y = base - static_cast<int>(std::lround(v * height));
    s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 160 << "\" y2=\"" << y
      << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << num(v, 1) << "</text>\n";
  }
  for (std::size_t t = 0; t < kNumTraits; ++t) {
    const int x0 = left + gap / 2 + static_cast<int>(t) * (group + gap);
    for (std::size_t g = 0; g < genres.size(); ++g) {
      const auto& ts = genres[g].traits[t];
      const double v = std::clamp(ts.mean, 0.0, 1.0);
      const int h = static_cast<int>(std::lround(v * height));
      const int x = x0 + static_cast<int>(g) * bar;
      s << "<rect x=\"" << x << "\" y=\"" << base - h << "\" width=\"" << bar - 2 << "\" height=\"" << h
        << "\" fill=\"" << kGenreColors[index_of(genres[g].genre)] << "\"><title>"
        << xml_escape(display_name(genres[g].genre)) << ' ' << to_string(kTraits[t]) << ": "
        << num(ts.mean, 3) << " (sd " << num(ts.sd, 3) << ")</title></rect>\n";
      if (!ts.degenerate) {
        const int lo = base - static_cast<int>(std::lround(std::clamp(ts.mean - ts.sd, 0.0, 1.0) * height));
        const int hi = base - static_cast<int>(std::lround(std::clamp(ts.mean + ts.sd, 0.0, 1.0) * height));
        const int cx = x + (bar - 2) / 2;
        s << "<line x1=\"" << cx << "\" y1=\"" << lo << "\" x2=\"" << cx << "\" y2=\"" << hi
          << "\" stroke=\"#333333\"/>\n";
      }
    }
    s << "<text x=\"" << x0 + group / 2 << "\" y=\"" << base + 20 << "\" text-anchor=\"middle\">"
      << full_name(kTraits[t]) << "</text>\n";
  }
  const int lx = width - 140;
  for (std::size_t g = 0; g < genres.size(); ++g) {
    const int y = top + static_cast<int>(g) * 20;
    s << "<rect x=\"" << lx << "\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\""
      << kGenreColors[index_of(genres[g].genre)] << "\"/>\n";
    s << "<text x=\"" << lx + 18 << "\" y=\"" << y + 11 << "\">" << xml_escape(display_name(genres[g].genre))
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string effect_heatmap_svg(std::span<const EffectMatrix> matrices) {
  const int cell = 44, label = 80, pad = 30, title = 24;
  const int panel = label + 5 * cell;
  const int width = pad + static_cast<int>(matrices.size()) * (panel + pad);
  const int height = title + label + 5 * cell + 50;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    const EffectMatrix& m = matrices[i];
    const int x0 = pad + static_cast<int>(i) * (panel + pad);
    const int y0 = title + 40;
    s << "<text x=\"" << x0 + label + 5 * cell / 2 << "\" y=\"" << title << "\" text-anchor=\"middle\" font-size=\"14\">"
      << full_name(m.trait) << "</text>\n";
    for (std::size_t k = 0; k < m.genres.size(); ++k) {
      const int off = static_cast<int>(k) * cell;
      s << "<text x=\"" << x0 + label - 6 << "\" y=\"" << y0 + off + cell / 2 + 4
        << "\" text-anchor=\"end\">" << xml_escape(display_name(m.genres[k])) << "</text>\n";
      s << "<text x=\"" << x0 + label + off + cell / 2 << "\" y=\"" << y0 - 8
        << "\" text-anchor=\"middle\">" << xml_escape(display_name(m.genres[k])) << "</text>\n";
    }
    for (std::size_t r = 0; r < m.genres.size(); ++r) {
      for (std::size_t c = 0; c < m.genres.size(); ++c) {
        const int x = x0 + label + static_cast<int>(c) * cell;
        const int y = y0 + static_cast<int>(r) * cell;
        if (r == c) {
          s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
            << "\" fill=\"#eeeeee\" stroke=\"#999999\"/>\n";
          continue;
        }
        const PairwiseTestResult* found = nullptr;
        for (const auto& p : m.cells) {
          if (p.genre_a == m.genres[r] && p.genre_b == m.genres[c]) found = &p;
        }
        const std::string fill = found ? effect_color(*found) : "#ffffff";
        s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"" << fill << "\" stroke=\"#999999\"/>\n";
        if (found) {
          const std::string text = std::isfinite(found->cohens_d) ? num(found->cohens_d) : "n/a";
          s << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"middle\">"
            << text << "</text>\n";
        }
      }
    }
  }
  s << "<text x=\"" << pad << "\" y=\"" << height - 12
    << "\">Cohen's d of row genre vs column genre; red/blue: significant positive/negative, white: not significant</text>\n";
  s << "</svg>\n";
  return s.str();
}

void write_fig2_csv(std::span<const GenreTraitSummary> genres, std::ostream& out) {
  out << "genre,OPN,CON,EXT,AGR,NEU\n";
  for (const auto& g : genres) {
    out << to_string(g.genre);
    for (const auto& ts : g.traits) out << ',' << fixed(ts.mean);
    out << '\n';
  }
}

void write_fig3_csv(std::span<const EffectMatrix> matrices, std::ostream& out) {
  out << "trait,genre_a,genre_b,cohens_d,significant,color\n";
  for (const auto& m : matrices) {
    for (const auto& c : m.cells) {
      out << to_string(m.trait) << ',' << to_string(c.genre_a) << ',' << to_string(c.genre_b) << ','
          << fixed(c.cohens_d) << ',' << (c.significant ? "true" : "false") << ',' << effect_color(c) << '\n';
    }
  }
}

}  // namespace persona
