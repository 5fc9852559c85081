#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "crossing.hpp"
#include "stats.hpp"
#include "tree.hpp"

namespace fracperc {

inline double mean_offspring(const RetentionSpec& spec) { return spec.sum_p(); }

// Offspring probability generating function g(s) = prod_i (1 - p_i + p_i s).
inline double offspring_pgf(const RetentionSpec& spec, double s) {
    double g = 1.0;
    for (double pi : spec.p) g *= 1.0 - pi + pi * s;
    return g;
}

struct ExtinctionResult {
    double q = 1.0;        // smallest fixed point of the pgf in [0,1]
    bool singleton = false;  // exactly one p_i = 1, rest 0: E is a.s. a singleton
};

// Smallest fixed point of g on [0,1] by bisection to 1e-12. For the
// singleton spec g(s) = s everywhere; survival is sure and q = 0 with the
// flag set.
inline ExtinctionResult extinction_probability(const RetentionSpec& spec) {
    ExtinctionResult r;
    if (spec.singleton()) {
        r.q = 0.0;
        r.singleton = true;
        return r;
    }
    if (spec.sum_p() <= 1.0) {
        r.q = 1.0;
        return r;
    }
    if (offspring_pgf(spec, 0.0) == 0.0) {
        r.q = 0.0;  // some p_i = 1: every node branches, survival is sure
        return r;
    }
    double lo = 0.0, hi = 1.0;
    // g - id is positive on [0,q), negative on (q,1)
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (offspring_pgf(spec, mid) > mid)
            lo = mid;
        else
            hi = mid;
    }
    r.q = 0.5 * (lo + hi);
    return r;
}

struct DimensionResult {
    double dim = 0.0;
    bool extinct_as = false;  // sum p_i <= 1: value reported as 0
};

// dim_H(E) = dim_B(E) = log(sum p_i) / log M, conditioned on E nonempty.
inline DimensionResult dimension_formula(const RetentionSpec& spec) {
    DimensionResult r;
    const double s = spec.sum_p();
    if (s <= 1.0 && !spec.singleton()) {
        r.extinct_as = true;
        return r;
    }
    r.dim = std::log(s) / std::log(static_cast<double>(spec.M));
    return r;
}

// m_r = expected number of retained squares in column r (d = 2 only).
inline std::vector<double> column_sums(const RetentionSpec& spec) {
    if (spec.d != 2) throw std::invalid_argument("column_sums: requires d = 2");
    std::vector<double> m(static_cast<std::size_t>(spec.M), 0.0);
    for (int i = 0; i < spec.cells(); ++i)
        m[static_cast<std::size_t>(spec.digit(static_cast<Symbol>(i + 1), 0))] += spec.p[static_cast<std::size_t>(i)];
    return m;
}

enum class DmStage { I, II, III, IVPlus };

inline const char* to_string(DmStage s) {
    switch (s) {
        case DmStage::I: return "I";
        case DmStage::II: return "II";
        case DmStage::III: return "III";
        default: return "IV-or-higher";
    }
}

struct McBudget {
    int depth = 6;
    int trials = 200;
    std::uint64_t seed = 1;
    int threads = 1;
    bool bracket_pc = false;
};

struct StageReport {
    DmStage stage = DmStage::I;
    bool singleton = false;
    bool interval_as = false;  // min m_r > 1: proj_x contains an interval a.s. on survival
    double sum_p = 0.0;
    double sum_m_log_m = 0.0;
    double sum_log_m = 0.0;
    double min_m = 0.0;
    std::vector<double> m;
    std::optional<FrequencyEstimate> crossing;       // V-vs-VI evidence only
    std::optional<std::pair<double, double>> pc_bracket;
};

inline FrequencyEstimate estimate_crossing(const RetentionSpec& spec, int depth, int trials,
                                           std::uint64_t seed, int threads = 1) {
    std::vector<char> hit(static_cast<std::size_t>(trials), 0);
    parallel_for_indexed(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        auto tree = RealizationTree::sample(spec, depth, trial_seed(seed, t));
        hit[t] = percolation_crossing(tree, depth) ? 1 : 0;
    });
    std::size_t hits = 0;
    for (char h : hit) hits += static_cast<std::size_t>(h);
    return wilson_estimate(hits, static_cast<std::size_t>(trials));
}

// Depth-limited Monte Carlo bracket for the homogeneous crossing threshold:
// smallest lattice p whose crossing frequency reaches 1/2, together with the
// largest below it. Heuristic evidence only.
inline std::pair<double, double> bracket_pc(int M, int depth, int trials, std::uint64_t seed,
                                            int threads = 1, int resolution = 64) {
    double lo = 1.0 / static_cast<double>(M), hi = 1.0;
    for (int step = 0; step < 30; ++step) {
        if ((hi - lo) * resolution <= 1.0) break;
        const double mid = 0.5 * (lo + hi);
        const auto est = estimate_crossing(homogeneous_spec(2, M, mid), depth, trials,
                                           trial_seed(seed, static_cast<std::uint64_t>(step)), threads);
        (est.freq >= 0.5 ? hi : lo) = mid;
    }
    return {lo, hi};
}

// Stage classifier from the column-sum criteria; boundary ties follow the
// non-strict inequalities exactly as stated. Stages V and VI are not
// analytically separable from IV here, so anything past III reports as
// IV-or-higher with the interval flag and optional crossing evidence.
inline StageReport classify_dm_stage(const RetentionSpec& spec, std::optional<McBudget> budget = {}) {
    if (spec.d != 2) throw std::invalid_argument("classify_dm_stage: requires d = 2");
    StageReport rep;
    rep.singleton = spec.singleton();
    rep.sum_p = spec.sum_p();
    rep.m = column_sums(spec);
    double sum_mlm = 0.0, sum_lm = 0.0, min_m = std::numeric_limits<double>::infinity();
    for (double mr : rep.m) {
        sum_mlm += mr > 0.0 ? mr * std::log(mr) : 0.0;
        sum_lm += mr > 0.0 ? std::log(mr) : -std::numeric_limits<double>::infinity();
        min_m = std::min(min_m, mr);
    }
    rep.sum_m_log_m = sum_mlm;
    rep.sum_log_m = sum_lm;
    rep.min_m = min_m;
    rep.interval_as = min_m > 1.0;

    if (rep.sum_p <= 1.0 && !rep.singleton)
        rep.stage = DmStage::I;
    else if (sum_mlm <= 0.0)
        rep.stage = DmStage::II;
    else if (sum_lm <= 0.0)
        rep.stage = DmStage::III;
    else
        rep.stage = DmStage::IVPlus;

    if (budget && rep.stage != DmStage::I) {
        rep.crossing = estimate_crossing(spec, budget->depth, budget->trials, budget->seed, budget->threads);
        if (budget->bracket_pc && spec.homogeneous())
            rep.pc_bracket = bracket_pc(spec.M, budget->depth, budget->trials, budget->seed, budget->threads);
    }
    return rep;
}

}  // namespace fracperc
