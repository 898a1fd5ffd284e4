#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace labelsift {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

/// Child seed for a position in a task tree, independent of execution order.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(seed);
    for (const auto p : path) {
        h = mix64(h ^ mix64(p + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

/// Uniform integer in [0, bound) by rejection sampling; identical across standard libraries.
[[nodiscard]] inline std::uint64_t uniform_below(Rng &rng, std::uint64_t bound) {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound + 1) % bound;
    std::uint64_t x = rng();
    while (x > limit) {
        x = rng();
    }
    return x % bound;
}

/// Uniform real in [0, 1) built from the top 53 bits.
[[nodiscard]] inline double uniform_unit(Rng &rng) {
    return static_cast<double>(rng() >> 11U) * 0x1.0p-53;
}

/// Fisher-Yates shuffle driven by uniform_below.
template <typename It>
void shuffle(It first, It last, Rng &rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_below(rng, i);
        std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1), first + static_cast<std::ptrdiff_t>(j));
    }
}

}  // namespace labelsift
