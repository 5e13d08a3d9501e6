#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rtp::sim {

/// All randomness uses the 64-bit Mersenne Twister (std::mt19937_64) seeded
/// directly with a 64-bit seed. Replica i of a run with base seed s uses
/// seed s ^ i, so replica 0 reproduces the single-path run.
using Rng = std::mt19937_64;

constexpr std::uint64_t replica_seed(std::uint64_t base, std::uint64_t index) { return base ^ index; }

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n), n > 0 (multiply-shift).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

inline double exponential(Rng& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

}  // namespace rtp::sim
