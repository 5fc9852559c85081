#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "grid_function.hpp"
#include "interval_union.hpp"
#include "projection.hpp"

namespace fracperc {

// Affine image of the diagonal parameter under Pi_alpha . phi_word: a
// contraction of ratio M^-n whose offset is the word's shadow start.
struct ShadowMap {
    double offset = 0.0;
    double scale = 1.0;

    double operator()(double s) const { return offset + scale * s; }
    Interval image(const Interval& iv) const {
        return iv.empty() ? Interval::none() : Interval{(*this)(iv.lo), (*this)(iv.hi)};
    }
    Interval full() const { return {offset, offset + scale}; }
    // inverse (the expanding map psi)
    double pullback(double x) const { return (x - offset) / scale; }
};

inline ShadowMap shadow_map(const Word& word, double alpha, const RetentionSpec& spec) {
    if (spec.d != 2) throw std::invalid_argument("shadow_map: requires d = 2");
    const CellBox box = cell_geometry(word, spec);
    ShadowMap m;
    m.scale = box.side;
    m.offset = diagonal_point(alpha, box.lo[0] + box.side / 2, box.lo[1] + box.side / 2) - box.side / 2;
    return m;
}

inline Interval shadow(const Word& word, double alpha, const Interval& I, const RetentionSpec& spec) {
    return shadow_map(word, alpha, spec).image(I);
}

namespace detail {

// Depth-first walk over positive-probability words whose full shadow meets
// `clip`; calls visit(word_or_null, shadow_of_I, weight) at level n.
template <typename Visit>
void descend_shadows(double alpha, const Interval& I, int n, const RetentionSpec& spec, const Interval& clip,
                     bool want_words, Visit&& visit) {
    if (spec.d != 2) throw std::invalid_argument("descend_shadows: requires d = 2");
    if (I.empty()) return;
    struct Frame {
        double cx, cy, side, weight;
        int level;
    };
    const int M = spec.M;
    Word word;
    auto rec = [&](auto&& self, const Frame& f) -> void {
        const double pi_c = diagonal_point(alpha, f.cx, f.cy);
        const Interval full{pi_c - f.side / 2, pi_c + f.side / 2};
        if (full.hi < clip.lo || full.lo > clip.hi) return;
        if (f.level == n) {
            const Interval sh{pi_c - f.side / 2 + f.side * I.lo, pi_c - f.side / 2 + f.side * I.hi};
            if (sh.hi < clip.lo || sh.lo > clip.hi) return;
            visit(word, sh, f.weight);
            return;
        }
        const double cside = f.side / M;
        for (int j = 1; j <= spec.cells(); ++j) {
            const double pj = spec.p[static_cast<std::size_t>(j) - 1];
            if (pj <= 0.0) continue;
            const double u = static_cast<double>(spec.digit(static_cast<Symbol>(j), 0));
            const double v = static_cast<double>(spec.digit(static_cast<Symbol>(j), 1));
            Frame child{f.cx - f.side / 2 + (u + 0.5) * cside, f.cy - f.side / 2 + (v + 0.5) * cside,
                        cside, f.weight * pj, f.level + 1};
            if (want_words) word.push_back(static_cast<Symbol>(j));
            self(self, child);
            if (want_words) word.pop_back();
        }
    };
    rec(rec, Frame{0.5, 0.5, 1.0, 1.0, 0});
}

}  // namespace detail

// D_n(x, I, alpha): level-n words of positive probability whose shadow of I
// contains x, found by pruned descent (shadows are closed).
inline std::vector<Word> enumerate_D_n(double x, const Interval& I, double alpha, int n,
                                       const RetentionSpec& spec) {
    std::vector<Word> out;
    detail::descend_shadows(alpha, I, n, spec, Interval{x, x}, true,
                            [&](const Word& w, const Interval&, double) { out.push_back(w); });
    return out;
}

// sum over D_n(x, I, alpha) of the word probabilities.
inline double condition_sum_at(double x, const Interval& I, double alpha, int n, const RetentionSpec& spec) {
    double s = 0.0;
    detail::descend_shadows(alpha, I, n, spec, Interval{x, x}, false,
                            [&](const Word&, const Interval&, double w) { s += w; });
    return s;
}

// F_alpha f: exact piecewise-linear image under the expected inverse Markov
// operator. Output breakpoints are the level-1 shadow endpoints plus the
// shadow images of f's breakpoints.
inline GridFunction apply_F(const GridFunction& f, double alpha, const RetentionSpec& spec) {
    if (spec.d != 2) throw std::invalid_argument("apply_F: requires d = 2");
    Direction dir(alpha);
    const int M = spec.M;
    const double side = 1.0 / static_cast<double>(M);
    struct Term {
        ShadowMap map;
        double p;
    };
    std::vector<Term> terms;
    for (int j = 1; j <= spec.cells(); ++j) {
        const double pj = spec.p[static_cast<std::size_t>(j) - 1];
        if (pj <= 0.0) continue;
        const double u = static_cast<double>(spec.digit(static_cast<Symbol>(j), 0));
        const double v = static_cast<double>(spec.digit(static_cast<Symbol>(j), 1));
        ShadowMap m;
        m.scale = side;
        m.offset = diagonal_point(dir.alpha, (u + 0.5) * side, (v + 0.5) * side) - side / 2;
        terms.push_back({m, pj});
    }
    std::vector<double> knots{0.0, 1.0};
    for (const Term& t : terms) {
        knots.push_back(t.map.offset);
        knots.push_back(t.map.offset + t.map.scale);
        for (double b : f.breakpoints()) knots.push_back(t.map(b));
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::erase_if(knots, [](double x) { return x < 0.0 || x > 1.0; });

    std::vector<double> vals(knots.size(), 0.0);
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const double x = knots[i];
        double s = 0.0;
        for (const Term& t : terms) {
            if (x < t.map.offset || x > t.map.offset + t.map.scale) continue;
            s += t.p * f(std::clamp(t.map.pullback(x), 0.0, 1.0));
        }
        vals[i] = s;
    }
    // only the corner shadows reach the domain endpoints and f vanishes
    // there; rounding of the shadow offsets must not break that
    vals.front() = 0.0;
    vals.back() = 0.0;
    return GridFunction(std::move(knots), std::move(vals));
}

// Witness for Condition A: nested parameter intervals, an iteration order r
// and the exact margin min_{x in I2} sum_{D_r(x, I1)} p_w minus 2.
struct ConditionAWitness {
    double alpha = 0.0;
    Interval I1, I2;
    int r = 1;
    double margin = -2.0;

    bool certifies() const { return margin >= 0.0; }
};

// Exact margin of the candidate witness. The coverage sum is piecewise
// constant with breaks at the level-r shadow endpoints of I1; each open
// piece is evaluated exactly, endpoint values are checked directly (closed
// shadows make breakpoint values at least the neighboring piece values).
inline ConditionAWitness check_condition_A(double alpha, const Interval& I1, const Interval& I2, int r,
                                           const RetentionSpec& spec) {
    Direction dir(alpha);
    if (r < 0) throw std::invalid_argument("check_condition_A: negative r");
    if (I2.empty() || I2.lo < 0.0 || I2.hi > 1.0)
        throw std::invalid_argument("check_condition_A: I2 must be a nonempty subinterval of [0,1]");
    if (!I1.empty() && !(I1.lo >= I2.lo && I1.hi <= I2.hi && I1.lo >= 0.0 && I1.hi <= 1.0))
        throw std::invalid_argument("check_condition_A: nesting violated (need I1 inside I2 inside [0,1])");

    ConditionAWitness w;
    w.alpha = dir.alpha;
    w.I1 = I1;
    w.I2 = I2;
    w.r = r;

    std::vector<Interval> iv;
    std::vector<double> wt;
    if (!I1.empty())
        detail::descend_shadows(dir.alpha, I1, r, spec, I2, false, [&](const Word&, const Interval& sh, double p) {
            iv.push_back(sh);
            wt.push_back(p);
        });

    // direct point evaluation with closed intervals
    auto value_at = [&](double x) {
        double s = 0.0;
        for (std::size_t i = 0; i < iv.size(); ++i)
            if (iv[i].lo <= x && x <= iv[i].hi) s += wt[i];
        return s;
    };

    double min_val = std::min(value_at(I2.lo), value_at(I2.hi));

    std::vector<double> cuts;
    cuts.reserve(iv.size() * 2 + 2);
    for (const Interval& s : iv) {
        if (s.lo > I2.lo && s.lo < I2.hi) cuts.push_back(s.lo);
        if (s.hi > I2.lo && s.hi < I2.hi) cuts.push_back(s.hi);
    }
    cuts.push_back(I2.lo);
    cuts.push_back(I2.hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    if (cuts.size() >= 2) {
        // running coverage sum over the open pieces; the winning piece is
        // re-evaluated directly so the reported margin is summation-exact
        std::vector<std::size_t> by_lo(iv.size()), by_hi(iv.size());
        for (std::size_t i = 0; i < iv.size(); ++i) by_lo[i] = by_hi[i] = i;
        std::sort(by_lo.begin(), by_lo.end(), [&](std::size_t a, std::size_t b) { return iv[a].lo < iv[b].lo; });
        std::sort(by_hi.begin(), by_hi.end(), [&](std::size_t a, std::size_t b) { return iv[a].hi < iv[b].hi; });
        std::size_t next_lo = 0, next_hi = 0;
        double running = 0.0, best = std::numeric_limits<double>::infinity();
        std::size_t best_piece = 0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double a = cuts[i];
            while (next_lo < by_lo.size() && iv[by_lo[next_lo]].lo <= a) running += wt[by_lo[next_lo++]];
            while (next_hi < by_hi.size() && iv[by_hi[next_hi]].hi <= a) running -= wt[by_hi[next_hi++]];
            if (running < best) {
                best = running;
                best_piece = i;
            }
        }
        min_val = std::min(min_val, value_at(0.5 * (cuts[best_piece] + cuts[best_piece + 1])));
    }
    w.margin = min_val - 2.0;
    return w;
}

// Independent re-check of a witness on an evaluation grid over I2 via the
// pruned point descent: returns the minimal coverage sum seen.
inline double condition_A_grid_min(const ConditionAWitness& w, const RetentionSpec& spec, int points) {
    double lo = condition_sum_at(w.I2.lo, w.I1, w.alpha, w.r, spec);
    lo = std::min(lo, condition_sum_at(w.I2.hi, w.I1, w.alpha, w.r, spec));
    for (int k = 0; k < points; ++k) {
        const double x = w.I2.lo + (w.I2.hi - w.I2.lo) * (static_cast<double>(k) + 0.5) / static_cast<double>(points);
        lo = std::min(lo, condition_sum_at(x, w.I1, w.alpha, w.r, spec));
    }
    return lo;
}

inline constexpr int kDefaultSearchGrid = 64;
inline constexpr int kDefaultRMax = 6;

// Deterministic scan for a Condition A witness: concentric interval pairs on
// a 1/grid lattice, r ascending, wider pairs first. Cheap probe sums at
// three points gate the exact piece evaluation. When `shrink` is positive a
// candidate is accepted only if it still certifies with the inner interval
// shrunk by that amount, which is what robustness_radius will demand.
// Failure means no witness within the budget, never that A(alpha) is false.
inline std::optional<ConditionAWitness> search_condition_A(double alpha, const RetentionSpec& spec,
                                                           int r_max = kDefaultRMax,
                                                           int grid = kDefaultSearchGrid,
                                                           double shrink = 0.0) {
    Direction dir(alpha);
    if (r_max < 1 || grid < 4) throw std::invalid_argument("search_condition_A: bad budget");
    // sum over any D_r is at most (sum p)^r
    const double total = spec.sum_p();
    for (int r = 1; r <= r_max; ++r) {
        double bound = 1.0;
        for (int k = 0; k < r; ++k) bound *= total;
        if (bound < 2.0) continue;
        for (int w2 = grid / 2 - 1; w2 >= 1; --w2) {
            const Interval I2{0.5 - static_cast<double>(w2) / grid, 0.5 + static_cast<double>(w2) / grid};
            for (int w1 = w2 - 1; w1 >= 1; --w1) {
                const Interval I1{0.5 - static_cast<double>(w1) / grid, 0.5 + static_cast<double>(w1) / grid};
                const Interval probe_I1{I1.lo + shrink, I1.hi - shrink};
                if (probe_I1.empty()) continue;
                const double probe = std::min({condition_sum_at(I2.lo, probe_I1, dir.alpha, r, spec),
                                               condition_sum_at(0.5, probe_I1, dir.alpha, r, spec),
                                               condition_sum_at(I2.hi, probe_I1, dir.alpha, r, spec)});
                if (probe < 2.0) continue;
                if (shrink > 0.0 && !check_condition_A(dir.alpha, probe_I1, I2, r, spec).certifies()) continue;
                auto w = check_condition_A(dir.alpha, I1, I2, r, spec);
                if (w.certifies()) return w;
            }
        }
    }
    return std::nullopt;
}

// Angle interval certified by a witness whose inner interval can shrink by
// `shrink` and still carry the margin: J = [alpha - shrink*M^-r, alpha +
// shrink*M^-r], re-verified at both endpoints.
inline Interval robustness_radius(double alpha, const ConditionAWitness& w, double shrink,
                                  const RetentionSpec& spec) {
    Direction dir(alpha);
    if (shrink < 0.0) throw std::invalid_argument("robustness_radius: negative shrink");
    if (!w.certifies()) throw std::invalid_argument("robustness_radius: witness does not certify");
    if (shrink == 0.0) return {dir.alpha, dir.alpha};
    const Interval shrunk{w.I1.lo + shrink, w.I1.hi - shrink};
    if (shrunk.empty())
        throw std::invalid_argument("robustness_radius: margin too small to shrink (inner interval vanishes)");
    const auto at_alpha = check_condition_A(dir.alpha, shrunk, w.I2, w.r, spec);
    if (!at_alpha.certifies())
        throw std::invalid_argument("robustness_radius: margin too small to shrink (shrunk witness fails)");
    const double radius = shrink * cell_side(spec.M, w.r);
    constexpr double eps = 1e-9;
    Interval j{std::max(dir.alpha - radius, eps), std::min(dir.alpha + radius, std::numbers::pi / 2 - eps)};
    for (double beta : {j.lo, j.hi}) {
        const auto end = check_condition_A(beta, w.I1, w.I2, w.r, spec);
        if (!end.certifies())
            throw std::invalid_argument("robustness_radius: endpoint re-verification failed");
    }
    return j;
}

struct DirectionCover {
    struct Segment {
        Interval angles;
        ConditionAWitness witness;
        double shrink = 0.0;
    };
    std::vector<Segment> segments;
    bool complete = false;
    double failed_at = 0.0;
    std::string reason;

    bool covers(double lo, double hi) const {
        double reach = lo;
        for (const auto& s : segments) {
            if (s.angles.lo > reach) return false;
            reach = std::max(reach, s.angles.hi);
        }
        return reach >= hi;
    }
};

// Greedy sweep: anchor a witness at the current angle, certify a closed
// angle interval around it via robustness_radius, advance to its right
// endpoint. Re-uses the previous witness shape when it still certifies.
inline DirectionCover certify_all_directions(const RetentionSpec& spec, double alpha_lo, double alpha_hi,
                                             int r_max = kDefaultRMax) {
    if (!(0.0 < alpha_lo && alpha_lo < alpha_hi && alpha_hi < std::numbers::pi / 2))
        throw std::invalid_argument("certify_all_directions: need 0 < lo < hi < pi/2");
    DirectionCover cover;
    const double shrink_ladder[] = {8.0 / 64, 4.0 / 64, 2.0 / 64, 1.0 / 64};
    double current = alpha_lo;
    std::optional<ConditionAWitness> prev;
    const int max_segments = 50000;
    double prev_shrink = 0.0;
    while (static_cast<int>(cover.segments.size()) < max_segments) {
        bool advanced = false;
        // fast path: the previous witness, at its own shrink, usually
        // transfers to the new anchor angle
        if (prev) {
            try {
                const Interval j = robustness_radius(current, *prev, prev_shrink, spec);
                cover.segments.push_back({j, *prev, prev_shrink});
                current = j.hi;
                advanced = true;
            } catch (const std::invalid_argument&) {
            }
        }
        if (!advanced) {
            for (double shrink : shrink_ladder) {
                auto w = search_condition_A(current, spec, r_max, kDefaultSearchGrid, shrink);
                if (!w) continue;
                try {
                    const Interval j = robustness_radius(current, *w, shrink, spec);
                    cover.segments.push_back({j, *w, shrink});
                    current = j.hi;
                    prev = w;
                    prev_shrink = shrink;
                    advanced = true;
                    break;
                } catch (const std::invalid_argument&) {
                }
            }
        }
        if (!advanced) {
            cover.failed_at = current;
            cover.reason = "no robust Condition A witness within budget at this angle";
            return cover;
        }
        if (current >= alpha_hi) {
            cover.complete = true;
            return cover;
        }
    }
    cover.failed_at = current;
    cover.reason = "segment budget exhausted";
    return cover;
}

// Largest eps with F_alpha f >= (1+eps) f, or failure. Requires f positive
// on the interior; the endpoint behavior is controlled by one-sided slope
// ratios since f vanishes there.
struct ConditionBResult {
    bool ok = false;
    double epsilon = -1.0;
    std::string reason;
};

inline ConditionBResult check_condition_B(double alpha, const GridFunction& f, const RetentionSpec& spec) {
    if (f.identically_zero()) throw std::invalid_argument("check_condition_B: f is identically zero");
    ConditionBResult res;
    if (!f.strictly_positive_interior()) {
        res.reason = "f vanishes on the interior; Condition B needs strict interior positivity";
        return res;
    }
    const GridFunction g = apply_F(f, alpha, spec);
    double min_ratio = g.right_slope_at_zero() / f.right_slope_at_zero();
    min_ratio = std::min(min_ratio, g.left_slope_at_one() / f.left_slope_at_one());
    auto scan = [&](const std::vector<double>& xs) {
        for (double x : xs) {
            if (x <= 0.0 || x >= 1.0) continue;
            const double fx = f(x);
            if (fx <= 0.0) continue;  // only possible next to the endpoints by rounding
            min_ratio = std::min(min_ratio, g(x) / fx);
        }
    };
    scan(f.breakpoints());
    scan(g.breakpoints());
    res.epsilon = min_ratio - 1.0;
    res.ok = res.epsilon > 0.0;
    if (!res.ok) res.reason = "no eps > 0: F f fails to dominate (1+eps) f";
    return res;
}

}  // namespace fracperc
