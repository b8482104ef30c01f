#pragma once

#include <cstdint>
#include <string_view>

namespace hadithscope {

// MurmurHash3 64-bit finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

// Platform-stable 64-bit string hash: FNV-1a over the bytes, finalized with
// mix64. Unlike std::hash its value is fixed across compilers and runs.
constexpr std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed = 0) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h ^ bytes.size());
}

}  // namespace hadithscope
