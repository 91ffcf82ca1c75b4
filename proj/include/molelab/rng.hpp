#pragma once
// Seed derivation. Every stochastic component in the project receives its
// randomness through an explicit 64-bit seed; child streams are derived with
// splitmix64 mixing so that replications, evaluations, islands and epochs get
// independent, reproducible engines no matter how work is scheduled.

#include <cstdint>
#include <random>

namespace molelab {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) noexcept {
    return splitmix64(seed ^ splitmix64(key));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b) noexcept {
    return derive_seed(derive_seed(seed, a), b);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64{splitmix64(seed)};
}

} // namespace molelab
