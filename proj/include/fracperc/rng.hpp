#pragma once

#include <cstdint>

// Counter-based randomness: every tree node's label is a pure function of
// (seed, word), so sampling order, lazy deepening and thread count cannot
// change a realization.

namespace fracperc {

inline constexpr std::uint64_t kGolden64 = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x += kGolden64;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Hash state of a word prefix; extend one symbol at a time.
inline std::uint64_t hash_root(std::uint64_t seed) { return mix64(seed); }

inline std::uint64_t hash_child(std::uint64_t parent_hash, std::uint32_t symbol) {
    return mix64(parent_hash ^ (static_cast<std::uint64_t>(symbol) * 0xd6e8feb86659fd93ull));
}

// Uniform in [0, 1) with 53 random bits.
inline double unit_from(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// The retention draw for the node with the given word hash.
inline double node_uniform(std::uint64_t word_hash) {
    return unit_from(mix64(word_hash ^ 0xa0761d6478bd642full));
}

inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial) {
    return mix64(base_seed ^ (trial * 0xe7037ed1a0b428dbull));
}

}  // namespace fracperc
