#pragma once

#include <cstdint>
#include <random>

namespace redkit {

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/*!
 * Derive the seed of sub-stream \c stream from a 64-bit master seed.
 *
 * The rule is   seed_i = splitmix64(splitmix64(master) ^ splitmix64(~i)).
 * It depends only on (master, i), so realization i receives the same
 * generator whether it runs first, last, or on another thread.
 */
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) noexcept
{
    return splitmix64(splitmix64(master) ^ splitmix64(~stream));
}

using Engine = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Engine& eng)
{
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Bernoulli trial with success probability p; p == 1 always succeeds.
inline bool bernoulli(Engine& eng, double p)
{
    return uniform01(eng) < p;
}

}  // namespace redkit
