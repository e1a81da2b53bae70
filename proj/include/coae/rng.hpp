#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace coae {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives the seed of a named substream from a root seed. Every random draw in the
// project comes from a stream obtained this way, so a run is reproducible from its
// root seed alone. `path` is a sequence of stream identifiers (see StreamId) and
// indices, e.g. {StreamId::sweep, linewidth_index, osnr_index}.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t state = mix64(root);
    for (std::uint64_t id : path) state = mix64(state ^ mix64(id + 0x632be59bd9b4e019ULL));
    return state;
}

namespace stream {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t data = 2;
inline constexpr std::uint64_t channel = 3;
inline constexpr std::uint64_t sweep = 4;
inline constexpr std::uint64_t verify = 5;
} // namespace stream

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(root, path));
}

} // namespace coae
