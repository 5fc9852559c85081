#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "interval_union.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "tree.hpp"

namespace fracperc {

// Direction angle strictly inside (0, pi/2); the axis-parallel cases are
// handled by the closed-form column machinery instead.
struct Direction {
    double alpha;

    explicit Direction(double a) : alpha(a) {
        if (!(a > 0.0 && a < std::numbers::pi / 2.0))
            throw std::invalid_argument("direction: angle must lie strictly inside (0, pi/2)");
    }
};

// Parameter of the projection of (x, y) along direction alpha onto the
// anti-diagonal from (0,1) to (1,0), normalized arclength in [0,1].
inline double diagonal_point(double alpha, double x, double y) {
    const double c = std::cos(alpha), s = std::sin(alpha);
    return (x * s - y * c + c) / (c + s);
}

struct ProjectionKind {
    enum class Type { Orthogonal, Diagonal, Radial, CoRadial };

    Type type = Type::Orthogonal;
    double alpha = 0.0;   // orthogonal / diagonal
    double tx = 0.0, ty = 0.0;  // radial / co-radial center

    static ProjectionKind orthogonal(double alpha) { return {Type::Orthogonal, Direction(alpha).alpha, 0, 0}; }
    static ProjectionKind diagonal(double alpha) { return {Type::Diagonal, Direction(alpha).alpha, 0, 0}; }
    static ProjectionKind radial(double tx, double ty) {
        check_center(tx, ty);
        return {Type::Radial, 0, tx, ty};
    }
    static ProjectionKind coradial(double tx, double ty) {
        check_center(tx, ty);
        return {Type::CoRadial, 0, tx, ty};
    }

    static void check_center(double tx, double ty) {
        if (tx >= 0.0 && tx <= 1.0 && ty >= 0.0 && ty <= 1.0)
            throw std::invalid_argument("projection: center t must lie outside the closed unit square");
    }
};

namespace detail {

inline double wrap_pi(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

}  // namespace detail

// Exact projected interval of one closed axis-aligned square.
inline Interval project_square(const Square& q, const ProjectionKind& kind) {
    const double xs[2] = {q.x0, q.x0 + q.side};
    const double ys[2] = {q.y0, q.y0 + q.side};
    switch (kind.type) {
        case ProjectionKind::Type::Orthogonal: {
            // signed coordinate along the normal (-sin a, cos a) of the direction
            const double nx = -std::sin(kind.alpha), ny = std::cos(kind.alpha);
            double lo = nx * xs[0] + ny * ys[0], hi = lo;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const double v = nx * xs[i] + ny * ys[j];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            return {lo, hi};
        }
        case ProjectionKind::Type::Diagonal: {
            // linear in (x, y): extremes at corners
            double lo = diagonal_point(kind.alpha, xs[0], ys[0]), hi = lo;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const double v = diagonal_point(kind.alpha, xs[i], ys[j]);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            return {lo, hi};
        }
        case ProjectionKind::Type::Radial: {
            // angles about t; the square is convex and t outside, so the
            // angular extent is attained at corners. Unwrap around the
            // center bearing to handle the atan2 cut.
            const double ref = std::atan2(q.y0 + q.side / 2 - kind.ty, q.x0 + q.side / 2 - kind.tx);
            double lo = 0.0, hi = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const double a = std::atan2(ys[j] - kind.ty, xs[i] - kind.tx);
                    const double dv = detail::wrap_pi(a - ref);
                    lo = std::min(lo, dv);
                    hi = std::max(hi, dv);
                }
            return {ref + lo, ref + hi};
        }
        case ProjectionKind::Type::CoRadial: {
            // distance range: nearest point by clamping, farthest at a corner
            const double cx = std::clamp(kind.tx, xs[0], xs[1]);
            const double cy = std::clamp(kind.ty, ys[0], ys[1]);
            const double lo = std::hypot(cx - kind.tx, cy - kind.ty);
            double hi = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    hi = std::max(hi, std::hypot(xs[i] - kind.tx, ys[j] - kind.ty));
            return {lo, hi};
        }
    }
    throw std::logic_error("project_square: unreachable");
}

inline IntervalUnion project_cells(std::span<const Square> cells, const ProjectionKind& kind) {
    std::vector<Interval> parts;
    parts.reserve(cells.size());
    for (const Square& q : cells) parts.push_back(project_square(q, kind));
    return IntervalUnion::from(std::move(parts));
}

// Squares of E_n from a 2-D realization.
inline std::vector<Square> cells_at_level(const RealizationTree& tree, int n) {
    if (tree.d() != 2) throw std::invalid_argument("cells_at_level: requires d = 2");
    const auto coords = tree.survival_coords(n);
    const double side = cell_side(tree.M(), n);
    std::vector<Square> out(coords.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = {static_cast<double>(coords[2 * i]) * side, static_cast<double>(coords[2 * i + 1]) * side, side};
    return out;
}

// 1-D kept cells as intervals (d = 1).
inline std::vector<Interval> intervals_at_level(const RealizationTree& tree, int n) {
    if (tree.d() != 1) throw std::invalid_argument("intervals_at_level: requires d = 1");
    const auto coords = tree.survival_coords(n);
    const double side = cell_side(tree.M(), n);
    std::vector<Interval> out(coords.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = {static_cast<double>(coords[i]) * side, (static_cast<double>(coords[i]) + 1.0) * side};
    return out;
}

struct PersistenceResult {
    std::vector<int> depths;
    std::vector<double> freq_contains;  // fraction of trials with J inside the depth-n projection
    std::vector<double> freq_alive;     // fraction of trials with E_n nonempty
    int trials = 0;
};

// Per-depth frequency that a candidate interval J survives inside the
// projection of E_n. Projections of the nested E_n decrease to the
// projection of E, so these frequencies are non-increasing in n per trial.
inline PersistenceResult interval_persistence(const RetentionSpec& spec, const ProjectionKind& kind,
                                              Interval j, int max_depth, int trials, std::uint64_t seed,
                                              int threads = 1) {
    if (spec.d != 2) throw std::invalid_argument("interval_persistence: requires d = 2");
    const Interval range = project_square({0, 0, 1}, kind);
    if (!(j.lo >= range.lo - 1e-12 && j.hi <= range.hi + 1e-12))
        throw std::invalid_argument("interval_persistence: J outside the projection of the unit square");
    PersistenceResult res;
    res.trials = trials;
    for (int n = 1; n <= max_depth; ++n) res.depths.push_back(n);
    std::vector<std::vector<char>> contains(static_cast<std::size_t>(trials));
    std::vector<std::vector<char>> alive(static_cast<std::size_t>(trials));
    parallel_for_indexed(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        auto tree = RealizationTree::sample(spec, max_depth, trial_seed(seed, t));
        auto& c = contains[t];
        auto& a = alive[t];
        c.assign(static_cast<std::size_t>(max_depth), 0);
        a.assign(static_cast<std::size_t>(max_depth), 0);
        for (int n = 1; n <= max_depth; ++n) {
            const auto cells = cells_at_level(tree, n);
            if (cells.empty()) break;  // extinct stays extinct
            a[static_cast<std::size_t>(n) - 1] = 1;
            c[static_cast<std::size_t>(n) - 1] = project_cells(cells, kind).contains(j) ? 1 : 0;
        }
    });
    for (int n = 1; n <= max_depth; ++n) {
        std::size_t hc = 0, ha = 0;
        for (int t = 0; t < trials; ++t) {
            hc += static_cast<std::size_t>(contains[static_cast<std::size_t>(t)][static_cast<std::size_t>(n) - 1]);
            ha += static_cast<std::size_t>(alive[static_cast<std::size_t>(t)][static_cast<std::size_t>(n) - 1]);
        }
        res.freq_contains.push_back(static_cast<double>(hc) / static_cast<double>(trials));
        res.freq_alive.push_back(static_cast<double>(ha) / static_cast<double>(trials));
    }
    return res;
}

// Least-squares dimension estimate from covering counts at scales M^-n:
// slope of log(count) against n*log(M).
inline SlopeFit box_dimension_fit(std::span<const int> levels, std::span<const std::size_t> counts, int M) {
    if (levels.size() != counts.size()) throw std::invalid_argument("box_dimension_fit: size mismatch");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (counts[i] == 0) continue;
        x.push_back(static_cast<double>(levels[i]) * std::log(static_cast<double>(M)));
        y.push_back(std::log(static_cast<double>(counts[i])));
    }
    if (x.size() < 4) throw std::invalid_argument("box_dimension_fit: need counts for >= 4 levels");
    return least_squares_slope(x, y);
}

// Covering counts of the projection of E_n at its own scale M^-n, per level.
inline std::vector<std::size_t> projection_box_counts(const RealizationTree& tree, const ProjectionKind& kind,
                                                      std::span<const int> levels) {
    std::vector<std::size_t> out;
    out.reserve(levels.size());
    for (int n : levels)
        out.push_back(project_cells(cells_at_level(tree, n), kind).box_count(cell_side(tree.M(), n)));
    return out;
}

struct VisibleSample {
    std::vector<std::uint64_t> cells;  // first-hit level-n cells, flat (col,row)
    std::size_t count = 0;
    double h1_proxy = 0.0;  // count * M^-n
};

// First-hit cells of E_n for the family of lines in direction alpha spaced
// M^-n apart in the orthogonal parameter; "first" means nearest the +alpha
// side, i.e. the cells visible when looking along -alpha.
inline VisibleSample visible_set_sample(const RealizationTree& tree, double alpha, int n) {
    if (tree.d() != 2) throw std::invalid_argument("visible_set_sample: requires d = 2");
    Direction dir(alpha);
    const double ex = std::cos(dir.alpha), ey = std::sin(dir.alpha);
    const double nx = -ey, ny = ex;
    const auto coords = tree.survival_coords(n);
    const std::size_t cells = coords.size() / 2;
    VisibleSample out;
    if (cells == 0) return out;
    const double side = cell_side(tree.M(), n);
    const Interval range = project_square({0, 0, 1}, ProjectionKind::orthogonal(dir.alpha));
    std::uint64_t lines = 1;
    for (int k = 0; k < n; ++k) lines *= static_cast<std::uint64_t>(tree.M());
    const double spacing = (range.hi - range.lo) / static_cast<double>(lines);

    std::vector<std::int64_t> best(static_cast<std::size_t>(lines), -1);
    std::vector<double> best_exit(static_cast<std::size_t>(lines), 0.0);
    const double half_w = (side / 2.0) * (std::abs(nx) + std::abs(ny));
    for (std::size_t i = 0; i < cells; ++i) {
        const double x0 = static_cast<double>(coords[2 * i]) * side;
        const double y0 = static_cast<double>(coords[2 * i + 1]) * side;
        const double t = nx * (x0 + side / 2) + ny * (y0 + side / 2);
        const long j_lo = static_cast<long>(std::ceil((t - half_w - range.lo) / spacing - 0.5));
        const long j_hi = static_cast<long>(std::floor((t + half_w - range.lo) / spacing - 0.5));
        for (long j = std::max(0l, j_lo); j <= j_hi && j < static_cast<long>(lines); ++j) {
            const double tj = range.lo + (static_cast<double>(j) + 0.5) * spacing;
            // exit parameter of the line n.x = tj (base point tj*n) from the cell
            const double exit =
                std::min((x0 + side - tj * nx) / ex, (y0 + side - tj * ny) / ey);
            auto& b = best[static_cast<std::size_t>(j)];
            if (b < 0 || exit > best_exit[static_cast<std::size_t>(j)]) {
                b = static_cast<std::int64_t>(i);
                best_exit[static_cast<std::size_t>(j)] = exit;
            }
        }
    }
    std::vector<char> used(cells, 0);
    for (std::int64_t b : best)
        if (b >= 0) used[static_cast<std::size_t>(b)] = 1;
    for (std::size_t i = 0; i < cells; ++i)
        if (used[i]) {
            out.cells.push_back(coords[2 * i]);
            out.cells.push_back(coords[2 * i + 1]);
        }
    out.count = out.cells.size() / 2;
    out.h1_proxy = static_cast<double>(out.count) * side;
    return out;
}

}  // namespace fracperc
