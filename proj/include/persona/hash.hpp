#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace persona {

// 64-bit FNV-1a. Stable across platforms; used for fingerprints, cache keys
// and manifest file hashes (not for security).
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes);
  Fnv1a& update(const void* data, std::size_t size);
  template <typename T>
  Fnv1a& update_pod(const T& value) {
    return update(&value, sizeof(T));
  }
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);
std::string hash_file(const std::filesystem::path& path);

}  // namespace persona
