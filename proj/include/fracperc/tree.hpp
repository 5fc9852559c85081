#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace fracperc {

// A sampled realization, stored breadth-first as per-level arrays of kept
// nodes. Level k+1 nodes are grouped by parent in parent order, children in
// symbol order, so each level carries a CSR-style offset table. Memory is
// O(#kept nodes). Trees are immutable after sampling except for explicit
// lazy deepening (single writer).
class RealizationTree {
public:
    struct Node {
        std::uint32_t parent;
        Symbol sym;
    };

    static RealizationTree sample(const RetentionSpec& spec, int depth, std::uint64_t seed) {
        if (depth < 0) throw std::invalid_argument("sample: negative depth");
        RealizationTree t;
        t.d_ = spec.d;
        t.M_ = spec.M;
        t.seed_ = seed;
        t.spec_ = spec;
        t.hashes_.push_back({hash_root(seed)});
        t.ensure_depth(depth);
        return t;
    }

    // Assembles a tree from explicit child-kept masks, level by level.
    // Used by deserialization and by hand-built test fixtures.
    class Builder {
    public:
        Builder(int d, int M, std::uint64_t seed = 0) : d_(d), M_(M), seed_(seed) {
            if (d < 1 || d > kMaxDim || M < 2 || M > kMaxBase) throw std::invalid_argument("tree builder: bad d/M");
        }

        // masks[i] = child bitmask of the i-th kept node of the deepest level,
        // bit j-1 set iff child symbol j is kept. The byte form carries
        // ceil(M^d / 8) bytes per node, little-endian bit order within bytes.
        Builder& add_level(const std::vector<std::uint64_t>& masks);
        Builder& add_level_bytes(const std::vector<unsigned char>& masks, std::size_t parents);

        RealizationTree build() {
            RealizationTree t;
            t.d_ = d_;
            t.M_ = M_;
            t.seed_ = seed_;
            t.levels_ = std::move(levels_);
            t.offsets_ = std::move(offsets_);
            return t;
        }

    private:
        int d_, M_;
        std::uint64_t seed_;
        std::vector<std::vector<Node>> levels_{};
        std::vector<std::vector<std::uint32_t>> offsets_{};
        friend class RealizationTree;
    };

    int d() const { return d_; }
    int M() const { return M_; }
    int cells() const { return RetentionSpec::cells_per_level(d_, M_); }
    int depth() const { return static_cast<int>(levels_.size()); }
    std::uint64_t seed() const { return seed_; }
    bool rng_backed() const { return spec_.has_value(); }
    const RetentionSpec& spec() const {
        if (!spec_) throw std::logic_error("tree has no attached spec");
        return *spec_;
    }

    // #E_n; level 0 is the root.
    std::size_t count(int level) const {
        if (level == 0) return 1;
        check_level(level);
        return levels_[static_cast<std::size_t>(level) - 1].size();
    }

    std::span<const Node> level(int n) const {
        check_level(n);
        if (n == 0) throw std::invalid_argument("level: root has no node record");
        return levels_[static_cast<std::size_t>(n) - 1];
    }

    // Children of node `idx` of level n live at [offset[idx], offset[idx+1])
    // in level n+1 of this table.
    std::span<const std::uint32_t> child_offsets(int n) const {
        if (n < 0 || n >= depth()) throw std::out_of_range("child_offsets: level out of range");
        return offsets_[static_cast<std::size_t>(n)];
    }

    // Materialize levels up to n; only RNG-backed trees can deepen.
    void ensure_depth(int n) {
        if (n <= depth()) return;
        if (!rng_backed()) throw std::logic_error("ensure_depth: tree is not RNG-backed");
        const auto& p = spec_->p;
        const int nc = cells();
        while (depth() < n) {
            const std::size_t parents = count(depth());
            const auto& ph = hashes_.back();
            std::vector<Node> next;
            std::vector<std::uint64_t> nh;
            std::vector<std::uint32_t> off(parents + 1, 0);
            for (std::size_t i = 0; i < parents; ++i) {
                off[i] = static_cast<std::uint32_t>(next.size());
                for (int j = 1; j <= nc; ++j) {
                    const double pj = p[static_cast<std::size_t>(j) - 1];
                    if (pj <= 0.0) continue;
                    const std::uint64_t h = hash_child(ph[i], static_cast<std::uint32_t>(j));
                    if (pj >= 1.0 || node_uniform(h) < pj) {
                        next.push_back({static_cast<std::uint32_t>(i), static_cast<Symbol>(j)});
                        nh.push_back(h);
                    }
                }
            }
            off[parents] = static_cast<std::uint32_t>(next.size());
            levels_.push_back(std::move(next));
            offsets_.push_back(std::move(off));
            hashes_.push_back(std::move(nh));
        }
    }

    // Kept words of length n (lexicographically ordered by construction).
    std::vector<Word> survival_words(int n) const {
        check_level(n);
        std::vector<Word> out;
        if (n == 0) {
            out.emplace_back();
            return out;
        }
        std::vector<Word> prev{Word{}};
        for (int k = 1; k <= n; ++k) {
            const auto& lv = levels_[static_cast<std::size_t>(k) - 1];
            std::vector<Word> cur(lv.size());
            for (std::size_t i = 0; i < lv.size(); ++i) {
                cur[i] = prev[lv[i].parent];
                cur[i].push_back(lv[i].sym);
            }
            prev = std::move(cur);
        }
        return prev;
    }

    // Integer cell positions of E_n, flat with stride d (axis-major per cell).
    std::vector<std::uint64_t> survival_coords(int n) const {
        check_level(n);
        const std::size_t dd = static_cast<std::size_t>(d_);
        std::vector<std::uint64_t> prev(dd, 0);
        if (n == 0) return prev;
        for (int k = 1; k <= n; ++k) {
            const auto& lv = levels_[static_cast<std::size_t>(k) - 1];
            std::vector<std::uint64_t> cur(lv.size() * dd);
            for (std::size_t i = 0; i < lv.size(); ++i) {
                const int s = static_cast<int>(lv[i].sym) - 1;
                int x = s;
                for (std::size_t t = 0; t < dd; ++t) {
                    cur[i * dd + t] = prev[lv[i].parent * dd + t] * static_cast<std::uint64_t>(M_) +
                                      static_cast<std::uint64_t>(x % M_);
                    x /= M_;
                }
            }
            prev = std::move(cur);
        }
        return prev;
    }

    bool kept(const Word& w) const {
        if (static_cast<int>(w.size()) > depth()) throw std::out_of_range("kept: word longer than sampled depth");
        std::uint32_t node = 0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            const auto& lv = levels_[k];
            const auto& off = offsets_[k];
            const std::uint32_t lo = off[node], hi = off[node + 1];
            const Symbol s = w[k];
            const Node* first = lv.data() + lo;
            const Node* last = lv.data() + hi;
            const Node* it = std::lower_bound(first, last, s, [](const Node& n, Symbol v) { return n.sym < v; });
            if (it == last || it->sym != s) return false;
            node = static_cast<std::uint32_t>(it - lv.data());
        }
        return true;
    }

private:
    void check_level(int n) const {
        if (n < 0 || n > depth()) throw std::out_of_range("level exceeds sampled depth");
    }

    int d_ = 0, M_ = 0;
    std::uint64_t seed_ = 0;
    std::optional<RetentionSpec> spec_;
    std::vector<std::vector<Node>> levels_;          // levels_[k] = kept nodes of level k+1
    std::vector<std::vector<std::uint32_t>> offsets_;  // offsets_[k] = CSR from level k into k+1
    std::vector<std::vector<std::uint64_t>> hashes_;   // word hashes, RNG-backed trees only
};

inline RealizationTree::Builder& RealizationTree::Builder::add_level(const std::vector<std::uint64_t>& masks) {
    const int nc = RetentionSpec::cells_per_level(d_, M_);
    if (nc > 64) throw std::invalid_argument("add_level: word masks support M^d <= 64; use add_level_bytes");
    const int mask_bytes = (nc + 7) / 8;
    std::vector<unsigned char> bytes;
    bytes.reserve(masks.size() * static_cast<std::size_t>(mask_bytes));
    for (std::uint64_t m : masks)
        for (int b = 0; b < mask_bytes; ++b) bytes.push_back(static_cast<unsigned char>(m >> (8 * b)));
    return add_level_bytes(bytes, masks.size());
}

inline RealizationTree::Builder& RealizationTree::Builder::add_level_bytes(
    const std::vector<unsigned char>& masks, std::size_t parents) {
    const std::size_t expected = levels_.empty() ? 1 : levels_.back().size();
    if (parents != expected) throw std::invalid_argument("add_level: one mask per kept parent required");
    const int nc = RetentionSpec::cells_per_level(d_, M_);
    const std::size_t mask_bytes = static_cast<std::size_t>((nc + 7) / 8);
    if (masks.size() != parents * mask_bytes) throw std::invalid_argument("add_level: mask byte count mismatch");
    std::vector<Node> next;
    std::vector<std::uint32_t> off(parents + 1, 0);
    for (std::size_t i = 0; i < parents; ++i) {
        off[i] = static_cast<std::uint32_t>(next.size());
        const unsigned char* mask = masks.data() + i * mask_bytes;
        for (int j = 1; j <= nc; ++j)
            if (mask[(j - 1) / 8] >> ((j - 1) % 8) & 1u)
                next.push_back({static_cast<std::uint32_t>(i), static_cast<Symbol>(j)});
    }
    off[parents] = static_cast<std::uint32_t>(next.size());
    levels_.push_back(std::move(next));
    offsets_.push_back(std::move(off));
    return *this;
}

// The d-fold product of one-dimensional realizations. A product cell is kept
// iff every coordinate word is kept in its factor; cells sharing a coordinate
// projection are correlated through that factor.
class ProductRealization {
public:
    explicit ProductRealization(std::vector<RealizationTree> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw std::invalid_argument("product: no factors");
        for (const auto& f : factors_) {
            if (f.d() != 1) throw std::invalid_argument("product: factors must be one-dimensional");
            if (f.M() != factors_.front().M()) throw std::invalid_argument("product: mismatched base M");
            if (f.depth() != factors_.front().depth()) throw std::invalid_argument("product: mismatched depth");
        }
    }

    int d() const { return static_cast<int>(factors_.size()); }
    int M() const { return factors_.front().M(); }
    int depth() const { return factors_.front().depth(); }
    const RealizationTree& factor(int i) const { return factors_[static_cast<std::size_t>(i)]; }

    // A word over {1..M^d}: digit t of each symbol addresses factor t.
    bool kept(const Word& w) const {
        const int dd = d();
        for (int t = 0; t < dd; ++t) {
            Word wt(w.size());
            for (std::size_t k = 0; k < w.size(); ++k) {
                int x = static_cast<int>(w[k]) - 1;
                for (int u = 0; u < t; ++u) x /= M();
                wt[k] = static_cast<Symbol>(x % M() + 1);
            }
            if (!factors_[static_cast<std::size_t>(t)].kept(wt)) return false;
        }
        return true;
    }

    std::size_t count(int n) const {
        std::size_t c = 1;
        for (const auto& f : factors_) c *= f.count(n);
        return c;
    }

    // Cartesian product of the factor survival sets, flat with stride d.
    std::vector<std::uint64_t> survival_coords(int n) const {
        const int dd = d();
        std::vector<std::vector<std::uint64_t>> per(static_cast<std::size_t>(dd));
        for (int t = 0; t < dd; ++t) per[static_cast<std::size_t>(t)] = factors_[static_cast<std::size_t>(t)].survival_coords(n);
        std::vector<std::uint64_t> out;
        out.reserve(count(n) * static_cast<std::size_t>(dd));
        std::vector<std::size_t> idx(static_cast<std::size_t>(dd), 0);
        if (count(n) == 0) return out;
        for (;;) {
            for (int t = 0; t < dd; ++t) out.push_back(per[static_cast<std::size_t>(t)][idx[static_cast<std::size_t>(t)]]);
            int t = dd - 1;
            while (t >= 0 && ++idx[static_cast<std::size_t>(t)] == per[static_cast<std::size_t>(t)].size()) {
                idx[static_cast<std::size_t>(t)] = 0;
                --t;
            }
            if (t < 0) break;
        }
        return out;
    }

private:
    std::vector<RealizationTree> factors_;
};

inline ProductRealization sample_product_realization(std::vector<RealizationTree> factors) {
    return ProductRealization(std::move(factors));
}

}  // namespace fracperc
