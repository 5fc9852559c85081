#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "core.hpp"
#include "projection.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "tree.hpp"

namespace fracperc {

// Line {(x,y): nx*x + ny*y = c} with unit normal.
struct Line {
    double nx = 0.0, ny = 1.0, c = 0.0;

    static Line normalized(double nx, double ny, double c) {
        const double h = std::hypot(nx, ny);
        if (h == 0.0) throw std::invalid_argument("line: zero normal");
        return {nx / h, ny / h, c / h};
    }

    static Line through(double x1, double y1, double x2, double y2) {
        const double dx = x2 - x1, dy = y2 - y1;
        if (dx == 0.0 && dy == 0.0) throw std::invalid_argument("line: coincident points");
        return normalized(dy, -dx, dy * x1 - dx * y1);
    }

    // direction angle folded into [0, pi/2]: angle against the x-axis
    double axis_angle() const {
        const double a = std::abs(std::atan2(-nx, ny));  // direction = (ny, -nx)
        return a > std::numbers::pi / 2 ? std::numbers::pi - a : a;
    }
};

// Corner-touch must survive the inexactness of M-adic coordinates in binary
// floating point; with unit normals the rounding is ~1e-15 while genuine
// lattice gaps stay far above this.
inline constexpr double kLineTol = 1e-9;

// Closed-cell intersection test: the line meets the square iff c lies
// between the extreme corner dot products.
inline bool cell_intersects(const Square& q, const Line& l) {
    const double d00 = l.nx * q.x0 + l.ny * q.y0;
    const double d10 = l.nx * (q.x0 + q.side) + l.ny * q.y0;
    const double d01 = l.nx * q.x0 + l.ny * (q.y0 + q.side);
    const double d11 = l.nx * (q.x0 + q.side) + l.ny * (q.y0 + q.side);
    const double lo = std::min(std::min(d00, d10), std::min(d01, d11));
    const double hi = std::max(std::max(d00, d10), std::max(d01, d11));
    return lo - kLineTol <= l.c && l.c <= hi + kLineTol;
}

// #E_n(line): kept level-n squares meeting the line, by recursive descent
// pruning subtrees whose cell misses it.
inline std::size_t count_slice(const RealizationTree& tree, int n, const Line& line) {
    if (tree.d() != 2) throw std::invalid_argument("count_slice: requires d = 2");
    if (n > tree.depth()) throw std::out_of_range("count_slice: depth exceeded");
    if (n == 0) return cell_intersects({0, 0, 1}, line) ? 1 : 0;
    struct Frame {
        std::uint32_t node;
        std::uint64_t col, row;
    };
    std::size_t count = 0;
    std::vector<Frame> stack{{0, 0, 0}};
    std::vector<Frame> next;
    for (int lvl = 0; lvl < n; ++lvl) {
        const auto off = tree.child_offsets(lvl);
        const auto lv = tree.level(lvl + 1);
        const double side = cell_side(tree.M(), lvl + 1);
        next.clear();
        for (const Frame& f : stack) {
            for (std::uint32_t k = off[f.node]; k < off[f.node + 1]; ++k) {
                const int s = static_cast<int>(lv[k].sym) - 1;
                const std::uint64_t col = f.col * static_cast<std::uint64_t>(tree.M()) + static_cast<std::uint64_t>(s % tree.M());
                const std::uint64_t row = f.row * static_cast<std::uint64_t>(tree.M()) + static_cast<std::uint64_t>(s / tree.M());
                const Square cell{static_cast<double>(col) * side, static_cast<double>(row) * side, side};
                if (!cell_intersects(cell, line)) continue;
                if (lvl + 1 == n)
                    ++count;
                else
                    next.push_back({k, col, row});
            }
        }
        stack.swap(next);
        if (lvl + 1 < n && stack.empty()) break;
    }
    return count;
}

// Counts of kept cells per +-45 degree corner line. Lines y = x + b*side
// (diag) and y = -x + b*side (antidiag); a cell at (i, j) meets the line
// with offset b iff |j - i - b| <= 1 (resp. |i + j + 1 - b| <= 1).
struct DiagonalSweep {
    std::size_t best_count = 0;
    Line best_line;
};

inline DiagonalSweep best_diagonal_slice(const RealizationTree& tree, int n) {
    if (tree.d() != 2) throw std::invalid_argument("best_diagonal_slice: requires d = 2");
    const auto coords = tree.survival_coords(n);
    const std::size_t cells = coords.size() / 2;
    DiagonalSweep out;
    std::uint64_t width = 1;
    for (int k = 0; k < n; ++k) width *= static_cast<std::uint64_t>(tree.M());
    const double side = cell_side(tree.M(), n);
    std::vector<std::size_t> diag(2 * width + 1, 0), anti(2 * width + 1, 0);
    for (std::size_t i = 0; i < cells; ++i) {
        const std::int64_t col = static_cast<std::int64_t>(coords[2 * i]);
        const std::int64_t row = static_cast<std::int64_t>(coords[2 * i + 1]);
        diag[static_cast<std::size_t>(row - col + static_cast<std::int64_t>(width))] += 1;
        anti[static_cast<std::size_t>(row + col + 1)] += 1;
    }
    const std::int64_t w = static_cast<std::int64_t>(width);
    for (std::int64_t b = -w; b <= w; ++b) {
        std::size_t cd = 0;
        for (std::int64_t t = b - 1; t <= b + 1; ++t) {
            const std::int64_t di = t + w;
            if (di >= 0 && di < static_cast<std::int64_t>(diag.size())) cd += diag[static_cast<std::size_t>(di)];
        }
        if (cd > out.best_count) {
            out.best_count = cd;
            out.best_line = Line::normalized(-1.0, 1.0, static_cast<double>(b) * side);  // y = x + b*side
        }
    }
    for (std::int64_t b = 0; b <= 2 * w; ++b) {
        std::size_t ca = 0;
        for (std::int64_t t = b - 1; t <= b + 1; ++t)
            if (t >= 0 && t < static_cast<std::int64_t>(anti.size())) ca += anti[static_cast<std::size_t>(t)];
        if (ca > out.best_count) {
            out.best_count = ca;
            out.best_line = Line::normalized(1.0, 1.0, static_cast<double>(b) * side);  // y = -x + b*side
        }
    }
    return out;
}

// Combinatorially distinct candidate lines at depth n: lines through pairs
// of corners of kept cells, filtered to the angle cone (angle at least eps
// from both axes), deterministically subsampled beyond the cap.
inline std::vector<Line> corner_pair_candidates(const RealizationTree& tree, int n, double eps,
                                                std::size_t cap, std::uint64_t seed) {
    if (tree.d() != 2) throw std::invalid_argument("corner_pair_candidates: requires d = 2");
    const auto coords = tree.survival_coords(n);
    const std::size_t cells = coords.size() / 2;
    const double side = cell_side(tree.M(), n);
    std::uint64_t width = 1;
    for (int k = 0; k < n; ++k) width *= static_cast<std::uint64_t>(tree.M());

    std::set<std::pair<std::uint64_t, std::uint64_t>> corner_set;
    for (std::size_t i = 0; i < cells; ++i)
        for (std::uint64_t du = 0; du <= 1; ++du)
            for (std::uint64_t dv = 0; dv <= 1; ++dv)
                corner_set.insert({coords[2 * i] + du, coords[2 * i + 1] + dv});
    std::vector<std::pair<std::uint64_t, std::uint64_t>> corners(corner_set.begin(), corner_set.end());

    auto in_cone = [eps](std::int64_t dx, std::int64_t dy) {
        if (dx == 0 || dy == 0) return false;
        const double a = std::atan2(std::abs(static_cast<double>(dy)), std::abs(static_cast<double>(dx)));
        return a >= eps && a <= std::numbers::pi / 2 - eps;
    };
    auto canonical = [](std::int64_t dx, std::int64_t dy, std::int64_t px, std::int64_t py) {
        std::int64_t g = std::abs(std::gcd(dx, dy));
        dx /= g;
        dy /= g;
        if (dx < 0 || (dx == 0 && dy < 0)) {
            dx = -dx;
            dy = -dy;
        }
        // normal (dy, -dx) through the integer point (px, py)
        return std::tuple<std::int64_t, std::int64_t, std::int64_t>(dy, -dx, dy * px - dx * py);
    };

    std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> seen;
    std::vector<Line> lines;
    auto emit = [&](std::size_t a, std::size_t b) {
        const std::int64_t ix = static_cast<std::int64_t>(corners[a].first);
        const std::int64_t iy = static_cast<std::int64_t>(corners[a].second);
        const std::int64_t jx = static_cast<std::int64_t>(corners[b].first);
        const std::int64_t jy = static_cast<std::int64_t>(corners[b].second);
        const std::int64_t dx = jx - ix, dy = jy - iy;
        if (!in_cone(dx, dy)) return;
        const auto key = canonical(dx, dy, ix, iy);
        if (!seen.insert(key).second) return;
        const auto [knx, kny, kc] = key;
        lines.push_back(Line::normalized(static_cast<double>(knx), static_cast<double>(kny), static_cast<double>(kc) * side));
    };

    const std::size_t m = corners.size();
    if (m < 2) return lines;
    const std::size_t total_pairs = m * (m - 1) / 2;
    if (total_pairs <= cap) {
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b) emit(a, b);
    } else {
        std::uint64_t h = hash_root(seed);
        for (std::size_t k = 0; k < cap && lines.size() < cap; ++k) {
            h = mix64(h);
            const std::size_t a = static_cast<std::size_t>(h % m);
            h = mix64(h);
            std::size_t b = static_cast<std::size_t>(h % (m - 1));
            if (b >= a) ++b;
            emit(std::min(a, b), std::max(a, b));
        }
    }
    return lines;
}

struct SliceReport {
    std::vector<int> depths;
    std::vector<std::size_t> max_counts;        // max over candidate family and trials
    std::vector<Line> witness_lines;            // argmax line per depth
    std::vector<std::size_t> diag45_counts;     // best 45-degree count per depth (max over trials)
    std::vector<double> diag45_witness_share;   // fraction of surviving trials with 45-deg count >= depth
    SlopeFit loglog_fit;                        // log(max) against log(n)
    bool transparent_regime = false;            // homogeneous and M^-2 < p <= M^-1
    int surviving_trials = 0;
    int trials = 0;
};

// Maximum slice counts across depths: for each depth the max of #E_n(line)
// over the corner-pair candidate family, the exact 45-degree sweep and all
// surviving trials, with a log-log growth fit.
inline SliceReport max_slice_growth(const RetentionSpec& spec, std::span<const int> depths, double eps,
                                    int trials, std::uint64_t seed, int threads = 1,
                                    std::size_t line_cap = 512) {
    if (spec.d != 2) throw std::invalid_argument("max_slice_growth: requires d = 2");
    if (depths.empty()) throw std::invalid_argument("max_slice_growth: no depths");
    SliceReport rep;
    rep.depths.assign(depths.begin(), depths.end());
    rep.trials = trials;
    const double hp = spec.p.front();
    rep.transparent_regime = spec.homogeneous() && hp > 1.0 / (spec.M * spec.M) && hp <= 1.0 / spec.M;
    const int max_depth = *std::max_element(depths.begin(), depths.end());

    struct TrialOut {
        bool alive = false;
        std::vector<std::size_t> maxima;
        std::vector<Line> lines;
        std::vector<std::size_t> diag;
        std::vector<char> diag_witness;
    };
    std::vector<TrialOut> out(static_cast<std::size_t>(trials));
    parallel_for_indexed(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        auto tree = RealizationTree::sample(spec, max_depth, trial_seed(seed, t));
        auto& o = out[t];
        if (tree.count(max_depth) == 0) return;
        o.alive = true;
        o.maxima.assign(depths.size(), 0);
        o.lines.assign(depths.size(), Line{});
        o.diag.assign(depths.size(), 0);
        o.diag_witness.assign(depths.size(), 0);
        for (std::size_t di = 0; di < depths.size(); ++di) {
            const int n = depths[di];
            const auto sweep = best_diagonal_slice(tree, n);
            o.diag[di] = sweep.best_count;
            o.diag_witness[di] = sweep.best_count >= static_cast<std::size_t>(n) ? 1 : 0;
            o.maxima[di] = sweep.best_count;
            o.lines[di] = sweep.best_line;
            const auto lines = corner_pair_candidates(tree, n, eps, line_cap, trial_seed(seed ^ 0x51ecull, t));
            for (const Line& l : lines) {
                const std::size_t c = count_slice(tree, n, l);
                if (c > o.maxima[di]) {
                    o.maxima[di] = c;
                    o.lines[di] = l;
                }
            }
        }
    });

    rep.max_counts.assign(depths.size(), 0);
    rep.witness_lines.assign(depths.size(), Line{});
    rep.diag45_counts.assign(depths.size(), 0);
    rep.diag45_witness_share.assign(depths.size(), 0.0);
    for (const auto& o : out) {
        if (!o.alive) continue;
        ++rep.surviving_trials;
        for (std::size_t di = 0; di < depths.size(); ++di) {
            if (o.maxima[di] > rep.max_counts[di]) {
                rep.max_counts[di] = o.maxima[di];
                rep.witness_lines[di] = o.lines[di];
            }
            rep.diag45_counts[di] = std::max(rep.diag45_counts[di], o.diag[di]);
            rep.diag45_witness_share[di] += static_cast<double>(o.diag_witness[di]);
        }
    }
    if (rep.surviving_trials > 0)
        for (double& s : rep.diag45_witness_share) s /= static_cast<double>(rep.surviving_trials);

    std::vector<double> lx, ly;
    for (std::size_t di = 0; di < depths.size(); ++di)
        if (rep.max_counts[di] > 0) {
            lx.push_back(std::log(static_cast<double>(depths[di])));
            ly.push_back(std::log(static_cast<double>(rep.max_counts[di])));
        }
    if (lx.size() >= 2) rep.loglog_fit = least_squares_slope(lx, ly);
    return rep;
}

struct DimPreservationRow {
    double alpha = 0.0;
    double mean_slope = 0.0;
    double stderr_mean = 0.0;
    int surviving = 0;
};

struct DimPreservationTable {
    bool stage_one = false;   // extinction a.s.: no conditioned sample exists
    double expected = 0.0;    // min(1, dimension formula)
    std::vector<DimPreservationRow> rows;
};

// Box-dimension estimates of proj_alpha(E_n) per sampled direction for the
// homogeneous transparent setting, against min(1, log(M^2 p)/log M).
inline DimPreservationTable dimension_preservation_check(const RetentionSpec& spec,
                                                         std::span<const double> alphas, int depth,
                                                         int trials, std::uint64_t seed, int threads = 1) {
    if (spec.d != 2) throw std::invalid_argument("dimension_preservation_check: requires d = 2");
    if (!spec.homogeneous()) throw std::invalid_argument("dimension_preservation_check: homogeneous spec required");
    DimPreservationTable table;
    const double sum = spec.sum_p();
    if (sum <= 1.0) {
        table.stage_one = true;
        return table;
    }
    table.expected = std::min(1.0, std::log(sum) / std::log(static_cast<double>(spec.M)));
    std::vector<int> levels;
    for (int n = 2; n <= depth; ++n) levels.push_back(n);

    std::vector<std::vector<double>> slopes(alphas.size());  // per alpha, per surviving trial
    std::vector<std::vector<std::vector<double>>> per_trial(static_cast<std::size_t>(trials));
    parallel_for_indexed(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        auto tree = RealizationTree::sample(spec, depth, trial_seed(seed, t));
        if (tree.count(depth) == 0) return;
        auto& mine = per_trial[t];
        mine.resize(alphas.size());
        for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
            const auto counts = projection_box_counts(tree, ProjectionKind::orthogonal(alphas[ai]), levels);
            mine[ai].push_back(box_dimension_fit(levels, counts, spec.M).slope);
        }
    });
    for (const auto& mine : per_trial) {
        if (mine.empty()) continue;
        for (std::size_t ai = 0; ai < alphas.size(); ++ai) slopes[ai].push_back(mine[ai].front());
    }
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        DimPreservationRow row;
        row.alpha = alphas[ai];
        const auto st = mean_stats(slopes[ai]);
        row.mean_slope = st.mean;
        row.stderr_mean = st.stderr_mean;
        row.surviving = static_cast<int>(st.n);
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace fracperc
