#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "interval_union.hpp"
#include "tree.hpp"

namespace fracperc {

inline constexpr const char* kGammaConvention =
    "gamma_k = sum_i p_i * q_{i-k}, residues of i-k reduced into {1..M}; "
    "k = M carries the zero shift. Cyclic relabelings permute the gamma "
    "indices without changing Gamma.";

struct CorrelationProfile {
    std::vector<double> gammas;  // gamma_1..gamma_M
    double Gamma = 1.0;
    std::string convention = kGammaConvention;

    double zero_shift() const { return gammas.back(); }
};

// Cyclic cross-correlation coefficients of two 1-D retention vectors.
inline CorrelationProfile gamma_profile(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size() || p.empty()) throw std::invalid_argument("gamma_profile: length mismatch");
    const int M = static_cast<int>(p.size());
    CorrelationProfile prof;
    prof.gammas.resize(static_cast<std::size_t>(M));
    for (int k = 1; k <= M; ++k) {
        double g = 0.0;
        for (int i = 1; i <= M; ++i) {
            int j = (i - k) % M;
            if (j <= 0) j += M;  // residues in {1..M}
            g += p[static_cast<std::size_t>(i) - 1] * q[static_cast<std::size_t>(j) - 1];
        }
        prof.gammas[static_cast<std::size_t>(k) - 1] = g;
    }
    prof.Gamma = 1.0;
    for (double g : prof.gammas) prof.Gamma *= g;
    return prof;
}

enum class DifferenceVerdict { IntervalAS, NoIntervalAS, Inconclusive };

inline const char* to_string(DifferenceVerdict v) {
    switch (v) {
        case DifferenceVerdict::IntervalAS: return "IntervalAS";
        case DifferenceVerdict::NoIntervalAS: return "NoIntervalAS";
        default: return "Inconclusive";
    }
}

struct DifferenceDecision {
    DifferenceVerdict verdict = DifferenceVerdict::Inconclusive;
    CorrelationProfile profile;
    int order = 1;
    bool correlated_caveat = false;  // order >= 2: collapsed constructions are correlated
    std::string note;
};

inline constexpr long kDefaultCollapseCap = 6561;  // 3^8

// Order-n collapse of a 1-D retention vector: entry for the word (i_1..i_n)
// is the product of the p_{i_k}, in lexicographic word order. Only the
// retention expectations survive collapsing; the collapsed construction
// itself is correlated across cells.
inline std::vector<double> collapse_spec(const std::vector<double>& p, int order,
                                         long cap = kDefaultCollapseCap) {
    if (order < 1) throw std::invalid_argument("collapse_spec: order must be >= 1");
    const long M = static_cast<long>(p.size());
    long len = 1;
    for (int k = 0; k < order; ++k) {
        len *= M;
        if (len > cap) throw std::invalid_argument("collapse_spec: M^order exceeds cap");
    }
    std::vector<double> out(static_cast<std::size_t>(len), 1.0);
    for (long idx = 0; idx < len; ++idx) {
        double prod = 1.0;
        long rest = idx;
        // most-significant digit first gives lexicographic word order
        for (long div = len / M; div >= 1; div /= M) {
            prod *= p[static_cast<std::size_t>(rest / div)];
            rest %= div;
        }
        out[static_cast<std::size_t>(idx)] = prod;
    }
    return out;
}

// Interval decision for E2 - E1 from the gamma profile: all gammas above 1
// certifies an interval a.s.; two cyclically consecutive gammas below 1
// excludes intervals a.s.; anything else is inconclusive.
inline DifferenceDecision difference_interval_decision(const std::vector<double>& p,
                                                       const std::vector<double>& q, int order = 1,
                                                       long cap = kDefaultCollapseCap) {
    DifferenceDecision dec;
    dec.order = order;
    const auto pc = order == 1 ? p : collapse_spec(p, order, cap);
    const auto qc = order == 1 ? q : collapse_spec(q, order, cap);
    dec.profile = gamma_profile(pc, qc);
    const auto& g = dec.profile.gammas;
    const std::size_t M = g.size();
    bool all_above = true, consecutive_below = false;
    for (std::size_t i = 0; i < M; ++i) {
        if (!(g[i] > 1.0)) all_above = false;
        if (g[i] < 1.0 && g[(i + 1) % M] < 1.0) consecutive_below = true;
    }
    if (all_above) {
        dec.verdict = DifferenceVerdict::IntervalAS;
    } else if (consecutive_below) {
        dec.verdict = DifferenceVerdict::NoIntervalAS;
    } else {
        dec.verdict = DifferenceVerdict::Inconclusive;
        dec.note = "neither hypothesis holds; retry at a higher collapse order";
    }
    if (order >= 2) {
        dec.correlated_caveat = true;
        dec.note += dec.note.empty() ? "" : "; ";
        dec.note += "collapsed constructions are correlated; verdict is expectation-level";
    }
    return dec;
}

enum class MeasureVerdict { PositiveMeasureAS, Inconclusive };

inline const char* to_string(MeasureVerdict v) {
    return v == MeasureVerdict::PositiveMeasureAS ? "PositiveMeasureAS" : "Inconclusive";
}

struct MeasureDecision {
    MeasureVerdict verdict = MeasureVerdict::Inconclusive;
    CorrelationProfile profile;
};

// Gamma > 1 certifies Leb(E2 - E1) > 0 for two independent copies of the
// same spec; the criterion has no converse.
inline MeasureDecision difference_measure_decision(const std::vector<double>& p) {
    MeasureDecision dec;
    dec.profile = gamma_profile(p, p);
    if (dec.profile.Gamma > 1.0) dec.verdict = MeasureVerdict::PositiveMeasureAS;
    return dec;
}

// Level-n approximation of E2 - E1 for two 1-D realizations: the union over
// kept pairs (I from tree1, J from tree2) of J - I, each an interval of
// length 2*M^-n. Computed by a shifted-bitset difference over the kept
// position sets.
inline IntervalUnion empirical_difference_set(const RealizationTree& tree1, const RealizationTree& tree2,
                                              int n) {
    if (tree1.d() != 1 || tree2.d() != 1) throw std::invalid_argument("empirical_difference_set: requires d = 1");
    if (tree1.M() != tree2.M()) throw std::invalid_argument("empirical_difference_set: mismatched base M");
    if (n > tree1.depth() || n > tree2.depth()) throw std::out_of_range("empirical_difference_set: depth exceeded");
    const auto a = tree1.survival_coords(n);
    const auto b = tree2.survival_coords(n);
    if (a.empty() || b.empty()) return {};

    std::uint64_t len = 1;
    for (int k = 0; k < n; ++k) len *= static_cast<std::uint64_t>(tree1.M());
    const std::uint64_t span = 2 * len - 1;  // differences j - i + (len-1) in [0, 2len-2]
    const std::size_t words_b = static_cast<std::size_t>((len + 63) / 64);
    const std::size_t words_d = static_cast<std::size_t>((span + 63) / 64);
    std::vector<std::uint64_t> bits_b(words_b, 0), diff(words_d, 0);
    for (std::uint64_t j : b) bits_b[static_cast<std::size_t>(j / 64)] |= 1ull << (j % 64);
    for (std::uint64_t i : a) {
        const std::uint64_t shift = len - 1 - i;  // diff index = j + shift
        const std::size_t ws = static_cast<std::size_t>(shift / 64);
        const int bs = static_cast<int>(shift % 64);
        for (std::size_t w = 0; w < words_b; ++w) {
            const std::uint64_t v = bits_b[w];
            if (!v) continue;
            diff[w + ws] |= v << bs;
            if (bs && w + ws + 1 < words_d) diff[w + ws + 1] |= v >> (64 - bs);
        }
    }

    const double side = cell_side(tree1.M(), n);
    std::vector<Interval> parts;
    for (std::size_t w = 0; w < words_d; ++w) {
        std::uint64_t v = diff[w];
        while (v) {
            const int bit = __builtin_ctzll(v);
            v &= v - 1;
            const std::uint64_t idx = 64 * w + static_cast<std::uint64_t>(bit);
            if (idx >= span) continue;
            // signed difference of kept positions
            const double delta = static_cast<double>(idx) - static_cast<double>(len - 1);
            parts.push_back({(delta - 1.0) * side, (delta + 1.0) * side});
        }
    }
    return IntervalUnion::from(std::move(parts));
}

}  // namespace fracperc
