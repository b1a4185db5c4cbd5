#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace geosched {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_string(std::string_view s) {
    // FNV-1a 64 bit
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

/// Derives an independent substream seed from a root seed and a tag path.
/// Every stochastic component draws from its own substream so that adding
/// or reordering consumers elsewhere cannot shift its random sequence.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                 std::initializer_list<std::uint64_t> indices = {}) {
    std::uint64_t h = detail::splitmix64(root ^ detail::hash_string(tag));
    for (std::uint64_t i : indices) {
        h = detail::splitmix64(h ^ i);
    }
    return h;
}

/// Deterministic engine for a derived substream.
inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view tag,
                                std::initializer_list<std::uint64_t> indices = {}) {
    return std::mt19937_64(derive_seed(root, tag, indices));
}

} // namespace geosched
