#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracperc {

// A word addresses a level-n M-adic cell; symbols are 1-based in {1..M^d}.
using Symbol = std::uint16_t;
using Word = std::vector<Symbol>;

inline constexpr int kMaxBase = 64;
inline constexpr int kMaxDim = 8;
inline constexpr long kMaxCellsPerLevel = 65536;

inline double cell_side(int M, int level) {
    return std::pow(static_cast<double>(M), -static_cast<double>(level));
}

// Model parameters: ambient dimension d, subdivision base M and the M^d
// retention probabilities in lexicographic cell order. In 2-D the cell with
// index i sits at column u, row v where i-1 = M*(v-1) + (u-1); in general the
// axis-t digit of i-1 (base M) is the cell position along axis t.
struct RetentionSpec {
    int d = 0;
    int M = 0;
    std::vector<double> p;

    int cells() const { return cells_per_level(d, M); }

    static int cells_per_level(int d, int M) {
        long n = 1;
        for (int k = 0; k < d; ++k) n *= M;
        return static_cast<int>(n);
    }

    double sum_p() const {
        double s = 0.0;
        for (double v : p) s += v;
        return s;
    }

    bool homogeneous() const {
        for (double v : p)
            if (v != p.front()) return false;
        return !p.empty();
    }

    // Exactly one entry 1, all others 0: the degenerate singleton survival case.
    bool singleton() const {
        int ones = 0;
        for (double v : p) {
            if (v == 1.0)
                ++ones;
            else if (v != 0.0)
                return false;
        }
        return ones == 1;
    }

    // 0-based position along `axis` of the 1-based symbol.
    int digit(Symbol s, int axis) const {
        int x = static_cast<int>(s) - 1;
        for (int t = 0; t < axis; ++t) x /= M;
        return x % M;
    }

    Symbol symbol_from_digits(std::span<const int> digits) const {
        long idx = 0;
        for (int t = d - 1; t >= 0; --t) idx = idx * M + digits[t];
        return static_cast<Symbol>(idx + 1);
    }
};

inline RetentionSpec validate_spec(int d, int M, std::vector<double> p) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("spec: dimension must be in [1," + std::to_string(kMaxDim) + "]");
    if (M < 2 || M > kMaxBase) throw std::invalid_argument("spec: base M must be in [2," + std::to_string(kMaxBase) + "]");
    long cells = 1;
    for (int k = 0; k < d; ++k) {
        cells *= M;
        if (cells > kMaxCellsPerLevel) throw std::invalid_argument("spec: M^d exceeds supported cell count");
    }
    if (static_cast<long>(p.size()) != cells)
        throw std::invalid_argument("spec: expected " + std::to_string(cells) + " probabilities, got " +
                                    std::to_string(p.size()));
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("spec: probability outside [0,1]");
    return RetentionSpec{d, M, std::move(p)};
}

inline RetentionSpec homogeneous_spec(int d, int M, double p) {
    return validate_spec(d, M, std::vector<double>(static_cast<std::size_t>(RetentionSpec::cells_per_level(d, M)), p));
}

// Random Sierpinski carpet: M=3, d=2, center cell probability q, others p.
inline RetentionSpec carpet_spec(double p, double q = 0.0) {
    std::vector<double> v(9, p);
    v[4] = q;  // i=5: column 2, row 2
    return validate_spec(2, 3, std::move(v));
}

// Tensor product of d one-dimensional specs; entry for the cell at position
// (a_1..a_d) is the product of the factors' entries.
inline RetentionSpec product_spec(const std::vector<RetentionSpec>& factors) {
    if (factors.empty()) throw std::invalid_argument("product_spec: no factors");
    const int M = factors.front().M;
    for (const auto& f : factors) {
        if (f.d != 1) throw std::invalid_argument("product_spec: factors must be one-dimensional");
        if (f.M != M) throw std::invalid_argument("product_spec: mismatched base M");
    }
    const int d = static_cast<int>(factors.size());
    const int cells = RetentionSpec::cells_per_level(d, M);
    std::vector<double> p(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) {
        double prod = 1.0;
        int x = i;
        for (int t = 0; t < d; ++t) {
            prod *= factors[static_cast<std::size_t>(t)].p[static_cast<std::size_t>(x % M)];
            x /= M;
        }
        p[static_cast<std::size_t>(i)] = prod;
    }
    return RetentionSpec{d, M, std::move(p)};
}

// Geometry of the cell addressed by a word: lower corner and side length.
struct CellBox {
    std::vector<double> lo;
    double side = 1.0;

    std::vector<double> center() const {
        std::vector<double> c(lo);
        for (double& v : c) v += side / 2.0;
        return c;
    }
};

inline CellBox cell_geometry(const Word& word, const RetentionSpec& spec) {
    CellBox box;
    box.lo.assign(static_cast<std::size_t>(spec.d), 0.0);
    std::vector<long> ipos(static_cast<std::size_t>(spec.d), 0);
    for (Symbol s : word) {
        if (s < 1 || static_cast<int>(s) > spec.cells()) throw std::invalid_argument("cell_geometry: symbol out of range");
        for (int t = 0; t < spec.d; ++t)
            ipos[static_cast<std::size_t>(t)] = ipos[static_cast<std::size_t>(t)] * spec.M + spec.digit(s, t);
    }
    box.side = cell_side(spec.M, static_cast<int>(word.size()));
    for (int t = 0; t < spec.d; ++t) box.lo[static_cast<std::size_t>(t)] = static_cast<double>(ipos[static_cast<std::size_t>(t)]) * box.side;
    return box;
}

// Axis-aligned square, the level-n cell geometry used on the plane.
struct Square {
    double x0 = 0.0, y0 = 0.0, side = 1.0;
};

}  // namespace fracperc
