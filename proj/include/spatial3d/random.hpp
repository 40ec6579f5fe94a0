#pragma once

// Platform-stable draws from std::mt19937_64. The standard distributions are
// implementation-defined, which would let synthesized datasets differ between
// standard libraries.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace spatial3d {

using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [lo, hi] by rejection (no modulo bias).
inline std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi)
{
    const std::uint64_t span = hi - lo + 1;
    if (span == 0) {
        return rng();
    }
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw = rng();
    while (draw >= limit) {
        draw = rng();
    }
    return lo + draw % span;
}

/// Standard normal via Box-Muller.
inline double standard_normal(Rng& rng)
{
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Mixes a string key into a seed (FNV-1a over the bytes, then splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view key)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(base ^ splitmix64(h));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key)
{
    return splitmix64(base ^ splitmix64(key + 0x632be59bd9b4e019ULL));
}

} // namespace spatial3d
