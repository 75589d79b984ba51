#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace persona {

// Number of maximal runs of non-whitespace bytes. This is the single
// tokenizer used for corpus token counts and passage word counts.
std::size_t count_tokens(std::string_view text);

// ASCII-lowercase and collapse every whitespace run to one space; leading and
// trailing whitespace is dropped. Used as the dedup key.
std::string normalize_text(std::string_view text);

// Collapse whitespace runs to one space and trim, preserving case.
std::string collapse_whitespace(std::string_view text);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace persona
