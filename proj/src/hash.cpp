#include "persona/hash.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "persona/error.hpp"

namespace persona {

Fnv1a& Fnv1a::update(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= p[i];
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Fnv1a& Fnv1a::update(std::string_view bytes) { return update(bytes.data(), bytes.size()); }

std::string Fnv1a::hex() const { return hex64(state_); }

std::uint64_t fnv1a(std::string_view bytes) { return Fnv1a{}.update(bytes).digest(); }

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "' for hashing");
  Fnv1a h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

}  // namespace persona
