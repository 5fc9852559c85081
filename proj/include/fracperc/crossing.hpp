#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "tree.hpp"

namespace fracperc {

// Left-right percolation crossing of E_n: true iff the edge-adjacency
// (4-connectivity) graph on kept level-n squares joins column 0 to column
// M^n - 1. Cells are closed but corner-touching squares are not adjacent.
inline bool percolation_crossing(const RealizationTree& tree, int n) {
    if (tree.d() != 2) throw std::invalid_argument("percolation_crossing: requires d = 2");
    if (n == 0) return true;
    const auto coords = tree.survival_coords(n);
    const std::size_t cells = coords.size() / 2;
    if (cells == 0) return false;
    std::uint64_t width = 1;
    for (int k = 0; k < n; ++k) width *= static_cast<std::uint64_t>(tree.M());

    auto key = [width](std::uint64_t col, std::uint64_t row) { return col * width + row; };
    std::unordered_set<std::uint64_t> kept;
    kept.reserve(cells * 2);
    std::vector<std::uint64_t> frontier;
    for (std::size_t i = 0; i < cells; ++i) {
        const std::uint64_t col = coords[2 * i], row = coords[2 * i + 1];
        kept.insert(key(col, row));
        if (col == 0) frontier.push_back(key(col, row));
    }
    std::unordered_set<std::uint64_t> seen(frontier.begin(), frontier.end());
    while (!frontier.empty()) {
        const std::uint64_t k = frontier.back();
        frontier.pop_back();
        const std::uint64_t col = k / width, row = k % width;
        if (col == width - 1) return true;
        const std::uint64_t neigh[4][2] = {{col + 1, row}, {col - 1, row}, {col, row + 1}, {col, row - 1}};
        for (int j = 0; j < 4; ++j) {
            const std::uint64_t c = neigh[j][0], r = neigh[j][1];
            if (c >= width || r >= width) continue;  // unsigned wrap covers col==0/row==0
            const std::uint64_t nk = key(c, r);
            if (kept.count(nk) && seen.insert(nk).second) frontier.push_back(nk);
        }
    }
    return false;
}

}  // namespace fracperc
