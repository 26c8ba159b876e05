#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ccshap {

using Rng = std::mt19937_64;

/// Seed used when the caller does not provide one.
inline constexpr std::uint64_t kDefaultSeed = 20240917;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a; stable across platforms and runs (unlike std::hash).
constexpr std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derive an independent stream seed from a master seed, a purpose label,
/// a subset identity and a repetition index.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                                    std::uint64_t subset = 0, std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(master ^ 0x5851f42d4c957f2dULL);
    h = splitmix64(h ^ stable_hash(purpose));
    h = splitmix64(h ^ subset);
    h = splitmix64(h ^ index);
    return h;
}

inline Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

/// Uniform double in [0, 1) built from 53 random bits, so results do not
/// depend on the standard library's generate_canonical.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace ccshap
