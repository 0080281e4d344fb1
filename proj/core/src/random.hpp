#pragma once

#include <cstdint>
#include <random>

namespace ssbm::detail {

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

// Uniform on [0, 1) with 53 random bits; unlike std::uniform_real_distribution
// the mapping is fixed, so streams agree across standard libraries.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ssbm::detail
