#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace asbim::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a; stable across platforms, used to name substreams.
constexpr std::uint64_t tag_hash(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of an independent child stream. Streams are addressed by (tag, index)
/// so adding folds or imputations never shifts the draws of another stream.
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index = 0) {
  return splitmix64(splitmix64(parent ^ tag_hash(tag)) + splitmix64(index + 1));
}

inline Engine substream(std::uint64_t parent, std::string_view tag, std::uint64_t index = 0) {
  return Engine{derive_seed(parent, tag, index)};
}

}  // namespace asbim::rng
