#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>

namespace v2v {

/// Pixels at or below this storage value count as background everywhere a
/// foreground mask is needed (generation and metrics).
inline constexpr int kBackgroundThreshold = 10;

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Independent stream seed for a named sub-task (clip id, epoch, ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
    return splitmix64(seed ^ splitmix64(fnv1a(tag)));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ splitmix64(b + 0x632be59bd9b4e019ull));
}

/// Uniform integer in [0, n) by rejection; unlike std::uniform_int_distribution
/// the sequence is identical across standard library implementations.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = Rng::max() - Rng::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class It>
void shuffle(It first, It last, Rng& rng) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
        auto j = static_cast<decltype(i)>(uniform_below(rng, static_cast<std::uint64_t>(i + 1)));
        std::iter_swap(first + i, first + j);
    }
}

}  // namespace v2v
