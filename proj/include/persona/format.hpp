#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace persona {

// Exact round-trip encoding of a double as a C99 hex-float ("0x1.8p+0").
std::string to_hexfloat(double value);
double from_hexfloat(std::string_view text);

// Fixed-point with the given number of decimals ("%.6f"); "inf"/"-inf"/"nan"
// for non-finite values.
std::string fixed(double value, int decimals = 6);
// Scientific with 6 significant decimals ("%.6e").
std::string sci(double value);

// Quote a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view field);
// Splits one CSV record, honoring double-quoted fields.
std::vector<std::string> parse_csv_line(std::string_view line);
// Strict decimal parse of a whole field; throws DataError otherwise.
double parse_double(std::string_view text);

}  // namespace persona
