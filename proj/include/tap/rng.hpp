#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace tap {

// All randomness in the project flows through one generator type with
// hand-rolled draw helpers. mt19937_64 output is pinned by the standard,
// the std::*_distribution adapters are not, so we avoid them to keep
// runs reproducible across toolchains.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic sub-seed for worker/class/video k derived from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
    return splitmix64(master ^ splitmix64(k));
}

/// Uniform integer in [0, n), rejection sampled.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~0ull - (~0ull % n);
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

/// Uniform integer in [lo, hi] inclusive.
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Uniform real in [0, 1).
inline double uniform_real(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller.
inline double gaussian(Rng& rng) {
    double u1 = uniform_real(rng);
    double u2 = uniform_real(rng);
    while (u1 <= 0.0) u1 = uniform_real(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline bool coin_flip(Rng& rng) {
    return (rng() & 1ull) != 0;
}

}  // namespace tap
