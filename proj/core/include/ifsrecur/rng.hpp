#pragma once

#include <array>
#include <cstdint>

namespace ifsrecur {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Uniform double in [0, 1) from the 53 high bits of one Philox block.
/// The block is addressed by (seed, stream, index) and holds no state.
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Uniform double in [-R, R].
inline double uniform_symmetric(std::uint64_t seed, std::uint64_t stream, std::uint64_t index, double radius) {
  return radius * (2.0 * uniform01(seed, stream, index) - 1.0);
}

}  // namespace ifsrecur
