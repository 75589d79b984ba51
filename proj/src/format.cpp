#include "persona/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>

#include "persona/error.hpp"

namespace persona {

std::string to_hexfloat(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  double mag = std::fabs(value);
  auto res = std::to_chars(buf, buf + sizeof buf, mag, std::chars_format::hex);
  std::string out = std::signbit(value) ? "-0x" : "0x";
  out.append(buf, res.ptr);
  return out;
}

double from_hexfloat(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    throw DataError("malformed hex-float '" + std::string(text) + "'");
  }
  text.remove_prefix(2);
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value, std::chars_format::hex);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw DataError("malformed hex-float '0x" + std::string(text) + "'");
  }
  return negative ? -value : value;
}

std::string fixed(double value, int decimals) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string out = buf;
  // "-0.000000" and "0.000000" must not differ between platforms.
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

std::string sci(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", value);
  return buf;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> parse_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty()) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace persona
