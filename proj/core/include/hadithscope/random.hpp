#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace hadithscope {

// std::uniform_int_distribution is implementation-defined; these helpers keep
// seeded draws identical across standard libraries.

// Uniform integer in [0, bound). bound must be positive.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = gen();
  while (x >= limit) x = gen();
  return x % bound;
}

// Uniform double in [0, 1).
inline double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace hadithscope
