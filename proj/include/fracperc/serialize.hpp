#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tree.hpp"

namespace fracperc {

// Bit-packed tree format "FPT1": header (magic, u16 d, u16 M, u32 depth,
// u64 seed, all little-endian), then breadth-first one child bitmask per
// kept node of levels 0..depth-1, bit j-1 = child symbol j kept,
// little-endian bit order within bytes.

namespace detail {

inline void put_le(std::ostream& os, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        const int c = is.get();
        if (c == std::char_traits<char>::eof()) throw std::runtime_error("fpt: truncated stream");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

}  // namespace detail

inline void serialize_tree(const RealizationTree& tree, std::ostream& os) {
    os.write("FPT1", 4);
    detail::put_le(os, static_cast<std::uint64_t>(tree.d()), 2);
    detail::put_le(os, static_cast<std::uint64_t>(tree.M()), 2);
    detail::put_le(os, static_cast<std::uint64_t>(tree.depth()), 4);
    detail::put_le(os, tree.seed(), 8);
    const int nc = tree.cells();
    const int mask_bytes = (nc + 7) / 8;
    std::vector<unsigned char> mask(static_cast<std::size_t>(mask_bytes));
    for (int lvl = 0; lvl < tree.depth(); ++lvl) {
        const std::size_t parents = tree.count(lvl);
        const auto off = tree.child_offsets(lvl);
        const auto next = tree.level(lvl + 1);
        for (std::size_t i = 0; i < parents; ++i) {
            std::fill(mask.begin(), mask.end(), 0);
            for (std::uint32_t c = off[i]; c < off[i + 1]; ++c) {
                const int bit = static_cast<int>(next[c].sym) - 1;
                mask[static_cast<std::size_t>(bit / 8)] |= static_cast<unsigned char>(1u << (bit % 8));
            }
            os.write(reinterpret_cast<const char*>(mask.data()), mask_bytes);
        }
    }
    if (!os) throw std::runtime_error("fpt: write failed");
}

inline RealizationTree deserialize_tree(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "FPT1", 4) != 0) throw std::runtime_error("fpt: bad magic");
    const int d = static_cast<int>(detail::get_le(is, 2));
    const int M = static_cast<int>(detail::get_le(is, 2));
    const int depth = static_cast<int>(detail::get_le(is, 4));
    const std::uint64_t seed = detail::get_le(is, 8);
    if (d < 1 || d > kMaxDim || M < 2 || M > kMaxBase) throw std::runtime_error("fpt: bad header");
    const int nc = RetentionSpec::cells_per_level(d, M);
    const std::size_t mask_bytes = static_cast<std::size_t>((nc + 7) / 8);
    RealizationTree::Builder b(d, M, seed);
    std::size_t parents = 1;
    for (int lvl = 0; lvl < depth; ++lvl) {
        std::vector<unsigned char> masks(parents * mask_bytes, 0);
        std::size_t kept = 0;
        for (std::size_t i = 0; i < parents * mask_bytes; ++i) {
            const unsigned char byte = static_cast<unsigned char>(detail::get_le(is, 1));
            const int bit_base = static_cast<int>(i % mask_bytes) * 8;
            if (bit_base + 8 > nc && (byte >> (nc - bit_base)) != 0)
                throw std::runtime_error("fpt: mask has bits beyond M^d");
            masks[i] = byte;
            kept += static_cast<std::size_t>(__builtin_popcount(byte));
        }
        b.add_level_bytes(masks, parents);
        parents = kept;
    }
    return b.build();
}

inline void save_tree(const RealizationTree& tree, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("fpt: cannot open for write: " + path);
    serialize_tree(tree, os);
}

inline RealizationTree load_tree(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("fpt: cannot open for read: " + path);
    return deserialize_tree(is);
}

}  // namespace fracperc
