#pragma once

// Seeding and random draws shared by environments, representations and learners.
//
// Every random stream is an std::mt19937_64 seeded from a 64-bit value derived
// from (parent seed, stream id) through derive_seed(). The derivation is
// parent + (stream + 1) * 0x9E3779B97F4A7C15 (mod 2^64) followed by the
// SplitMix64 finalizer. The multiplier is odd and the finalizer is a bijection
// on 64-bit words, so for a fixed parent distinct stream ids below 2^64 map to
// distinct seeds.

#include <cstdint>
#include <random>

namespace ccbench {

using rng_engine = std::mt19937_64;

/// SplitMix64 output function; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept
{
    return mix64(parent + (stream + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Named sub-streams of one run.
namespace streams {
inline constexpr std::uint64_t environment = 0;
inline constexpr std::uint64_t representation = 1;
inline constexpr std::uint64_t parameters = 2;
} // namespace streams

inline rng_engine make_engine(std::uint64_t seed) { return rng_engine{seed}; }

/// Integer uniform on the inclusive range [lo, hi].
inline int uniform_int(rng_engine& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>{lo, hi}(rng);
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(rng_engine& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(rng_engine& rng, double p) { return uniform01(rng) < p; }

} // namespace ccbench
