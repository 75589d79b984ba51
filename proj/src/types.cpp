#include "persona/types.hpp"

#include <string>

#include "persona/text.hpp"

namespace persona {
namespace {

// Lowercase and drop '-', '_' and spaces so "Hip-Hop" == "hiphop".
std::string squash(std::string_view s) {
  std::string out;
  for (char c : to_lower(s)) {
    if (c != '-' && c != '_' && c != ' ') out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view to_string(Genre g) {
  switch (g) {
    case Genre::Classical: return "Classical";
    case Genre::HipHop: return "HipHop";
    case Genre::Electronic: return "Electronic";
    case Genre::Indie: return "Indie";
    case Genre::Metal: return "Metal";
  }
  return "?";
}

std::string_view display_name(Genre g) {
  return g == Genre::HipHop ? std::string_view("Hip-Hop") : to_string(g);
}

std::string_view to_string(Trait t) {
  switch (t) {
    case Trait::OPN: return "OPN";
    case Trait::CON: return "CON";
    case Trait::EXT: return "EXT";
    case Trait::AGR: return "AGR";
    case Trait::NEU: return "NEU";
  }
  return "?";
}

std::string_view full_name(Trait t) {
  switch (t) {
    case Trait::OPN: return "Openness";
    case Trait::CON: return "Conscientiousness";
    case Trait::EXT: return "Extroversion";
    case Trait::AGR: return "Agreeableness";
    case Trait::NEU: return "Neuroticism";
  }
  return "?";
}

std::string_view to_string(Level l) { return l == Level::High ? "high" : "low"; }

std::string_view to_string(Generator g) {
  return g == Generator::TrainGen ? "train-gen" : "test-gen";
}

std::optional<Genre> parse_genre(std::string_view s) {
  const std::string k = squash(s);
  for (Genre g : kGenres) {
    if (k == squash(to_string(g))) return g;
  }
  if (k == "classicalmusic") return Genre::Classical;
  return std::nullopt;
}

std::optional<Trait> parse_trait(std::string_view s) {
  const std::string k = squash(s);
  for (Trait t : kTraits) {
    if (k == squash(to_string(t)) || k == squash(full_name(t))) return t;
  }
  if (k == "extraversion") return Trait::EXT;
  return std::nullopt;
}

std::optional<Level> parse_level(std::string_view s) {
  const std::string k = squash(s);
  if (k == "high") return Level::High;
  if (k == "low") return Level::Low;
  return std::nullopt;
}

std::optional<Generator> parse_generator(std::string_view s) {
  const std::string k = squash(s);
  if (k == "traingen" || k == "train") return Generator::TrainGen;
  if (k == "testgen" || k == "test") return Generator::TestGen;
  return std::nullopt;
}

}  // namespace persona
