#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace agglab {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Counter-based: the output block is a pure function of (key, counter), so any
// draw can be regenerated from its coordinates without replaying a stream.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit constexpr Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Block operator()(Block ctr) const {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

  static constexpr Block single_round(Block c, std::array<std::uint32_t, 2> k) {
    std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
            static_cast<std::uint32_t>(p0)};
  }

  std::array<std::uint32_t, 2> key_;
};

// Random variates addressed by (stream, index, slot). Every stochastic
// routine in the library takes an explicit seed and derives streams from it,
// so results do not depend on thread scheduling.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : philox_(seed) {}

  // Two uniforms in (0, 1) with 53-bit resolution for block (stream, index, slot).
  std::array<double, 2> uniform_pair(std::uint32_t stream, std::uint64_t index,
                                     std::uint32_t slot) const {
    auto b = philox_({static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32), stream, slot});
    return {to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
  }

  // Two independent standard normals (Box-Muller).
  std::array<double, 2> normal_pair(std::uint32_t stream, std::uint64_t index,
                                    std::uint32_t slot) const {
    auto [u1, u2] = uniform_pair(stream, index, slot);
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  double uniform(std::uint32_t stream, std::uint64_t index, std::uint32_t slot = 0) const {
    return uniform_pair(stream, index, slot)[0];
  }

  // Uniform integer in [0, bound) by rejection-free multiply-shift on 53 bits.
  std::uint64_t below(std::uint64_t bound, std::uint32_t stream, std::uint64_t index,
                      std::uint32_t slot = 0) const {
    double u = uniform(stream, index, slot);
    auto v = static_cast<std::uint64_t>(u * static_cast<double>(bound));
    return v < bound ? v : bound - 1;
  }

 private:
  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    std::uint64_t bits = (std::uint64_t{hi} << 21) ^ (lo >> 11);  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  Philox4x32 philox_;
};

}  // namespace agglab
