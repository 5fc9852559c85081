#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "interval_union.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "tree.hpp"

namespace fracperc {

// Weighted sum of d one-dimensional percolations: factors, nonzero weights
// and the working depth.
struct SumsetConfig {
    int M = 3;
    std::vector<std::vector<double>> factor_p;  // d entries, each of length M
    std::vector<double> b;                      // nonzero weights
    int depth = 4;

    int d() const { return static_cast<int>(factor_p.size()); }

    void validate() const {
        if (d() < 2) throw std::invalid_argument("sumset: need d >= 2 factors");
        if (b.size() != factor_p.size()) throw std::invalid_argument("sumset: one weight per factor");
        for (double w : b)
            if (w == 0.0) throw std::invalid_argument("sumset: weights must be nonzero");
        for (const auto& p : factor_p)
            if (static_cast<int>(p.size()) != M) throw std::invalid_argument("sumset: factor length must equal M");
    }
};

struct ProductConditionReport {
    double p_product = 0.0;        // prod of the homogeneous factor probabilities
    double cond1_threshold = 0.0;  // M^{-d+1}
    bool cond1 = false;            // p_product > M^{-d+1}
    bool pairwise_transparent = false;  // p_i * p_j < 1/M for all pairs
    double worst_pair = 0.0;
    std::optional<std::vector<double>> reduced;  // scaled probabilities meeting both, if found
};

// Both conditions of the d-fold sum theorem for homogeneous factors given by
// their single probabilities; when cond1 holds but a pair is opaque,
// proposes uniformly scaled probabilities meeting both (retention of the
// interval property is monotone in the p_i).
inline ProductConditionReport condition_check_product(const SumsetConfig& cfg) {
    cfg.validate();
    const int d = cfg.d();
    std::vector<double> pi(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const auto& p = cfg.factor_p[static_cast<std::size_t>(i)];
        for (double v : p)
            if (v != p.front()) throw std::invalid_argument("condition_check_product: factors must be homogeneous");
        pi[static_cast<std::size_t>(i)] = p.front();
    }
    ProductConditionReport rep;
    rep.p_product = 1.0;
    for (double v : pi) rep.p_product *= v;
    rep.cond1_threshold = std::pow(static_cast<double>(cfg.M), -static_cast<double>(d) + 1.0);
    rep.cond1 = rep.p_product > rep.cond1_threshold;
    rep.worst_pair = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            rep.worst_pair = std::max(rep.worst_pair, pi[static_cast<std::size_t>(i)] * pi[static_cast<std::size_t>(j)]);
    rep.pairwise_transparent = rep.worst_pair < 1.0 / cfg.M;

    if (rep.cond1 && !rep.pairwise_transparent && d >= 3) {
        // uniform scale t: need t^d * p > M^{1-d} and t^2 * worst_pair < 1/M
        const double t_min = std::pow(rep.cond1_threshold / rep.p_product, 1.0 / d);
        const double t_max = std::sqrt(1.0 / (cfg.M * rep.worst_pair));
        if (t_min < t_max) {
            const double t = std::min(1.0, std::sqrt(t_min * t_max));
            std::vector<double> reduced(pi);
            for (double& v : reduced) v *= t;
            rep.reduced = std::move(reduced);
        }
    }
    return rep;
}

namespace detail {

inline std::vector<std::vector<std::uint64_t>> factor_positions(std::span<const RealizationTree* const> trees,
                                                                int n) {
    std::vector<std::vector<std::uint64_t>> pos;
    pos.reserve(trees.size());
    for (const RealizationTree* t : trees) {
        if (t->d() != 1) throw std::invalid_argument("sumset: factors must be one-dimensional");
        if (n > t->depth()) throw std::out_of_range("sumset: depth exceeded");
        pos.push_back(t->survival_coords(n));
    }
    return pos;
}

}  // namespace detail

// Level-n approximation of sum_i b_i E^i: union over kept position tuples of
// the weighted interval sums, merged.
inline IntervalUnion sumset_approximation(std::span<const RealizationTree* const> trees,
                                          std::span<const double> b, int n) {
    if (trees.size() != b.size() || trees.empty()) throw std::invalid_argument("sumset: one weight per tree");
    for (double w : b)
        if (w == 0.0) throw std::invalid_argument("sumset: weights must be nonzero");
    const auto pos = detail::factor_positions(trees, n);
    for (const auto& p : pos)
        if (p.empty()) return {};
    const double side = cell_side(trees.front()->M(), n);
    double blo = 0.0, bhi = 0.0;
    for (double w : b) {
        blo += std::min(w, 0.0);
        bhi += std::max(w, 0.0);
    }
    std::vector<Interval> parts;
    const std::size_t d = trees.size();
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
        double a = 0.0;
        for (std::size_t i = 0; i < d; ++i) a += b[i] * static_cast<double>(pos[i][idx[i]]);
        parts.push_back({(a + blo) * side, (a + bhi) * side});
        std::size_t i = d;
        while (i > 0 && ++idx[i - 1] == pos[i - 1].size()) idx[--i] = 0;
        if (i == 0) break;
    }
    return IntervalUnion::from(std::move(parts));
}

// Number of kept level-n product cells meeting the hyperplane sum(x) = a,
// by joint descent pruning on the coordinate-sum range.
inline std::size_t hyperplane_cell_count(std::span<const RealizationTree* const> trees, int n, double a) {
    if (trees.empty()) throw std::invalid_argument("hyperplane_cell_count: no trees");
    for (const RealizationTree* t : trees) {
        if (t->d() != 1) throw std::invalid_argument("hyperplane_cell_count: factors must be one-dimensional");
        if (n > t->depth()) throw std::out_of_range("hyperplane_cell_count: depth exceeded");
    }
    const std::size_t d = trees.size();
    std::size_t count = 0;

    struct Frame {
        std::vector<std::uint32_t> nodes;
        std::vector<std::uint64_t> pos;
        int level;
    };
    auto rec = [&](auto&& self, const Frame& f) -> void {
        const double side = cell_side(trees.front()->M(), f.level);
        double lo = 0.0;
        for (std::uint64_t p : f.pos) lo += static_cast<double>(p);
        const double hi = (lo + static_cast<double>(d)) * side;
        if (!(lo * side <= a && a <= hi)) return;
        if (f.level == n) {
            ++count;
            return;
        }
        // child tuples: cartesian product of each factor's children
        std::vector<std::pair<std::uint32_t, std::uint64_t>> kids;  // flattened per factor below
        std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> per(d);
        for (std::size_t i = 0; i < d; ++i) {
            const auto off = trees[i]->child_offsets(f.level);
            const auto lv = trees[i]->level(f.level + 1);
            for (std::uint32_t k = off[f.nodes[i]]; k < off[f.nodes[i] + 1]; ++k) {
                const std::uint64_t p = f.pos[i] * static_cast<std::uint64_t>(trees[i]->M()) +
                                        static_cast<std::uint64_t>(lv[k].sym - 1);
                per[i].push_back({k, p});
            }
            if (per[i].empty()) return;
        }
        std::vector<std::size_t> idx(d, 0);
        for (;;) {
            Frame child;
            child.level = f.level + 1;
            child.nodes.resize(d);
            child.pos.resize(d);
            for (std::size_t i = 0; i < d; ++i) {
                child.nodes[i] = per[i][idx[i]].first;
                child.pos[i] = per[i][idx[i]].second;
            }
            self(self, child);
            std::size_t i = d;
            while (i > 0 && ++idx[i - 1] == per[i - 1].size()) idx[--i] = 0;
            if (i == 0) break;
        }
    };
    Frame root;
    root.nodes.assign(d, 0);
    root.pos.assign(d, 0);
    root.level = 0;
    rec(rec, root);
    return count;
}

// Partition of product cells (flat coords, stride d) into classes whose
// members differ in every coordinate word; within a class the retention
// events are independent. Greedy largest-degree-first coloring of the
// conflict graph (conflict = shared coordinate on some axis).
inline std::vector<std::vector<std::size_t>> dependency_classes(std::span<const std::uint64_t> cells, int d) {
    if (d < 1) throw std::invalid_argument("dependency_classes: bad dimension");
    if (cells.size() % static_cast<std::size_t>(d) != 0)
        throw std::invalid_argument("dependency_classes: flat coords not a multiple of d");
    const std::size_t m = cells.size() / static_cast<std::size_t>(d);
    std::vector<std::vector<std::size_t>> adj(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            bool conflict = false;
            for (int t = 0; t < d && !conflict; ++t)
                conflict = cells[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(t)] ==
                           cells[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(t)];
            if (conflict) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        }
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return adj[a].size() > adj[b].size() || (adj[a].size() == adj[b].size() && a < b);
    });
    std::vector<int> color(m, -1);
    int colors = 0;
    std::vector<char> used;
    for (std::size_t v : order) {
        used.assign(static_cast<std::size_t>(colors) + 1, 0);
        for (std::size_t u : adj[v])
            if (color[u] >= 0) used[static_cast<std::size_t>(color[u])] = 1;
        int c = 0;
        while (used[static_cast<std::size_t>(c)]) ++c;
        color[v] = c;
        colors = std::max(colors, c + 1);
    }
    std::vector<std::vector<std::size_t>> classes(static_cast<std::size_t>(colors));
    for (std::size_t i = 0; i < m; ++i) classes[static_cast<std::size_t>(color[i])].push_back(i);
    return classes;
}

// Product cells of the kept tuples meeting the hyperplane sum(x) = a at
// level n, as flat coords (stride d).
inline std::vector<std::uint64_t> hyperplane_cells(std::span<const RealizationTree* const> trees, int n,
                                                   double a) {
    const auto pos = detail::factor_positions(trees, n);
    const double side = cell_side(trees.front()->M(), n);
    const std::size_t d = trees.size();
    std::vector<std::uint64_t> out;
    for (const auto& p : pos)
        if (p.empty()) return out;
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
        double lo = 0.0;
        for (std::size_t i = 0; i < d; ++i) lo += static_cast<double>(pos[i][idx[i]]);
        if (lo * side <= a && a <= (lo + static_cast<double>(d)) * side)
            for (std::size_t i = 0; i < d; ++i) out.push_back(pos[i][idx[i]]);
        std::size_t i = d;
        while (i > 0 && ++idx[i - 1] == pos[i - 1].size()) idx[--i] = 0;
        if (i == 0) break;
    }
    return out;
}

// Per-depth structure of one conditioned realization of the weighted sum:
// the approximation union, the densest lattice hyperplane with its cell and
// dependency-class counts, plus the analytic verdicts recomputed from the
// config. tau is the exponent with M^{n(1+tau)} expected product cells.
struct SumsetReport {
    struct DepthRow {
        int depth = 0;
        IntervalUnion approximation;
        double best_a = 0.0;
        std::size_t cell_count = 0;
        std::size_t class_count = 0;
    };
    std::optional<ProductConditionReport> conditions;  // homogeneous factors only
    double tau = 0.0;
    std::vector<DepthRow> rows;
    int conditioning_attempts = 0;
};

inline SumsetReport sumset_report(const SumsetConfig& cfg, std::span<const int> depths, std::uint64_t seed,
                                  int max_attempts = 500) {
    cfg.validate();
    SumsetReport rep;
    bool homogeneous = true;
    double p_product = 1.0;
    for (const auto& p : cfg.factor_p) {
        for (double v : p) homogeneous = homogeneous && v == p.front();
        p_product *= p.front();
    }
    if (homogeneous) {
        rep.conditions = condition_check_product(cfg);
        rep.tau = (cfg.d() - 1) + std::log(rep.conditions->p_product) / std::log(static_cast<double>(cfg.M));
    }

    // realization conditioned on every factor surviving to depth
    std::vector<RealizationTree> trees;
    int attempt = 0;
    for (; attempt < max_attempts; ++attempt) {
        trees.clear();
        bool alive = true;
        for (int i = 0; i < cfg.d(); ++i) {
            trees.push_back(RealizationTree::sample(
                validate_spec(1, cfg.M, cfg.factor_p[static_cast<std::size_t>(i)]), cfg.depth,
                trial_seed(seed, static_cast<std::uint64_t>(attempt) * static_cast<std::uint64_t>(cfg.d()) +
                                     static_cast<std::uint64_t>(i))));
            alive = alive && trees.back().count(cfg.depth) > 0;
        }
        if (alive) break;
    }
    rep.conditioning_attempts = attempt + 1;
    std::vector<const RealizationTree*> view;
    for (const auto& t : trees) view.push_back(&t);

    for (int n : depths) {
        if (n > cfg.depth) continue;
        SumsetReport::DepthRow row;
        row.depth = n;
        row.approximation = sumset_approximation(view, cfg.b, n);
        std::uint64_t width = 1;
        for (int k = 0; k < n; ++k) width *= static_cast<std::uint64_t>(cfg.M);
        for (std::uint64_t k = 0; k <= static_cast<std::uint64_t>(cfg.d()) * width; ++k) {
            const double a = static_cast<double>(k) * cell_side(cfg.M, n);
            const std::size_t c = hyperplane_cell_count(view, n, a);
            if (c > row.cell_count) {
                row.cell_count = c;
                row.best_a = a;
            }
        }
        if (row.cell_count > 0)
            row.class_count = dependency_classes(hyperplane_cells(view, n, row.best_a), cfg.d()).size();
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

struct SumTrialResult {
    std::vector<int> depths;
    std::vector<double> freq;  // fraction of conditioned trials with J inside the approximation
    int conditioned_trials = 0;
    int trials = 0;
};

// Per-depth frequency that J lies inside the level-n weighted sum
// approximation, conditioned on every factor surviving to the deepest level.
inline SumTrialResult sum_interval_trial(const SumsetConfig& cfg, Interval j, std::span<const int> depths,
                                         int trials, std::uint64_t seed, int threads = 1) {
    cfg.validate();
    double blo = 0.0, bhi = 0.0;
    for (double w : cfg.b) {
        blo += std::min(w, 0.0);
        bhi += std::max(w, 0.0);
    }
    if (!(j.lo >= blo - 1e-12 && j.hi <= bhi + 1e-12))
        throw std::invalid_argument("sum_interval_trial: J outside the attainable sum range");
    SumTrialResult res;
    res.depths.assign(depths.begin(), depths.end());
    res.trials = trials;
    const int max_depth = *std::max_element(depths.begin(), depths.end());
    const int d = cfg.d();
    std::vector<std::vector<char>> contains(static_cast<std::size_t>(trials));
    parallel_for_indexed(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        std::vector<RealizationTree> trees;
        trees.reserve(static_cast<std::size_t>(d));
        bool alive = true;
        for (int i = 0; i < d; ++i) {
            auto spec = validate_spec(1, cfg.M, cfg.factor_p[static_cast<std::size_t>(i)]);
            trees.push_back(RealizationTree::sample(spec, max_depth,
                                                    trial_seed(seed, t * static_cast<std::size_t>(d) + static_cast<std::size_t>(i))));
            alive = alive && trees.back().count(max_depth) > 0;
        }
        if (!alive) return;
        auto& c = contains[t];
        c.assign(depths.size(), 0);
        std::vector<const RealizationTree*> view;
        for (const auto& tr : trees) view.push_back(&tr);
        for (std::size_t di = 0; di < depths.size(); ++di) {
            const auto u = sumset_approximation(view, cfg.b, depths[di]);
            c[di] = u.contains(j) ? 1 : 0;
        }
    });
    std::vector<std::size_t> hits(depths.size(), 0);
    for (const auto& c : contains) {
        if (c.empty()) continue;
        ++res.conditioned_trials;
        for (std::size_t di = 0; di < depths.size(); ++di) hits[di] += static_cast<std::size_t>(c[di]);
    }
    for (std::size_t di = 0; di < depths.size(); ++di)
        res.freq.push_back(res.conditioned_trials ? static_cast<double>(hits[di]) / res.conditioned_trials : 0.0);
    return res;
}

}  // namespace fracperc
