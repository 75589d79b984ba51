#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace persona {

enum class Genre { Classical, HipHop, Electronic, Indie, Metal };
inline constexpr std::size_t kNumGenres = 5;
inline constexpr std::array<Genre, kNumGenres> kGenres = {
    Genre::Classical, Genre::HipHop, Genre::Electronic, Genre::Indie, Genre::Metal};

// Canonical order OPN, CON, EXT, AGR, NEU.
enum class Trait { OPN, CON, EXT, AGR, NEU };
inline constexpr std::size_t kNumTraits = 5;
inline constexpr std::array<Trait, kNumTraits> kTraits = {
    Trait::OPN, Trait::CON, Trait::EXT, Trait::AGR, Trait::NEU};

enum class Level { Low, High };
enum class Generator { TrainGen, TestGen };

constexpr std::size_t index_of(Genre g) { return static_cast<std::size_t>(g); }
constexpr std::size_t index_of(Trait t) { return static_cast<std::size_t>(t); }

std::string_view to_string(Genre g);
std::string_view to_string(Trait t);
std::string_view to_string(Level l);
std::string_view to_string(Generator g);

// Case-insensitive; also accepts "Hip-Hop"/"hip_hop" and full trait names
// such as "Openness".
std::optional<Genre> parse_genre(std::string_view s);
std::optional<Trait> parse_trait(std::string_view s);
std::optional<Level> parse_level(std::string_view s);
std::optional<Generator> parse_generator(std::string_view s);

// Display name used in reports ("Hip-Hop").
std::string_view display_name(Genre g);
std::string_view full_name(Trait t);

}  // namespace persona
