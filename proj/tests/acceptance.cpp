// Acceptance suite: one pass/fail line per criterion, every tolerance pinned
// in code. Exit status is the number of failed criteria. The CLI binary path
// is expected as argv[1] (used by the determinism criterion).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fracperc/fracperc.hpp>

using namespace fracperc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "  ok:   " : "  FAIL: ") + what);
    }
    void note(const std::string& what) { notes.push_back("  note: " + what); }
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Palis counterexample reproduction
Outcome criterion1(const std::string& cli) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> p{0.52, 0.5, 0.72};
    const auto prof = gamma_profile(p, p);
    out.require(std::abs(prof.Gamma - 1.0272) <= 1e-3, "Gamma = " + fmt(prof.Gamma) + " within 1e-3 of 1.0272");
    const auto interval = difference_interval_decision(p, p);
    out.require(interval.verdict == DifferenceVerdict::NoIntervalAS,
                std::string("interval verdict = ") + to_string(interval.verdict));
    const auto measure = difference_measure_decision(p);
    out.require(measure.verdict == MeasureVerdict::PositiveMeasureAS,
                std::string("measure verdict = ") + to_string(measure.verdict));

    // brute-force evaluation of the cyclic correlation by exhaustive
    // enumeration of one construction level of two independent trees
    std::vector<double> brute(3, 0.0);
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            double w = 1.0;
            for (int i = 0; i < 3; ++i) {
                w *= (a >> i & 1) ? p[static_cast<std::size_t>(i)] : 1.0 - p[static_cast<std::size_t>(i)];
                w *= (b >> i & 1) ? p[static_cast<std::size_t>(i)] : 1.0 - p[static_cast<std::size_t>(i)];
            }
            for (int k = 1; k <= 3; ++k) {
                int count = 0;
                for (int i = 1; i <= 3; ++i) {
                    int j = (i - k) % 3;
                    if (j <= 0) j += 3;
                    if ((a >> (i - 1) & 1) && (b >> (j - 1) & 1)) ++count;
                }
                brute[static_cast<std::size_t>(k) - 1] += w * count;
            }
        }
    double max_diff = 0.0;
    for (int k = 0; k < 3; ++k) max_diff = std::max(max_diff, std::abs(brute[static_cast<std::size_t>(k)] - prof.gammas[static_cast<std::size_t>(k)]));
    out.note("brute-force gammas = (" + fmt(brute[0]) + ", " + fmt(brute[1]) + ", " + fmt(brute[2]) +
             "), formula agrees to " + fmt(max_diff));
    out.require(max_diff <= 1e-12, "brute-force evaluation matches the formula");
    out.require(std::abs(prof.gammas[0] - 0.941) > 0.05,
                "computed shifted coefficient " + fmt(prof.gammas[0]) +
                    " flags the published 0.941 as a label mismatch");

    // the analyze report must carry the same conclusions and the logged
    // brute-force evaluation
    if (!cli.empty()) {
        const fs::path dir = fs::temp_directory_path() / "fracperc_acceptance" / "palis";
        std::error_code ec;
        fs::remove_all(dir, ec);
        const std::string cmd =
            cli + " analyze --d 1 --M 3 --p 0.52,0.5,0.72 --out " + dir.string() + " > /dev/null 2>&1";
        const bool ran = std::system(cmd.c_str()) == 0;
        out.require(ran, "CLI analyze runs");
        if (ran) {
            const std::string rep = slurp(dir / "report.txt");
            out.require(rep.find("Gamma = 1.0271980167") != std::string::npos, "report logs Gamma = 1.0272");
            out.require(rep.find("difference_interval_verdict = NoIntervalAS") != std::string::npos,
                        "report logs NoIntervalAS");
            out.require(rep.find("difference_measure_verdict = PositiveMeasureAS") != std::string::npos,
                        "report logs PositiveMeasureAS");
            out.require(rep.find("gamma_bruteforce_1") != std::string::npos &&
                            rep.find("gamma_label_note") != std::string::npos,
                        "report logs the brute-force evaluation and the label-mismatch note");
        }
    } else {
        out.require(false, "CLI binary path missing (pass it as argv[1])");
    }
    const double dt = seconds_since(t0);
    out.require(dt < 1.0, "runtime " + fmt(dt) + " s < 1 s");
    return out;
}

// ---------------------------------------------------------------------------
// 2. Dimension formula vs simulation
Outcome criterion2() {
    Outcome out;
    const auto spec = homogeneous_spec(2, 3, 0.2);
    const double target = std::log(1.8) / std::log(3.0);
    const std::vector<int> levels{3, 4, 5, 6, 7, 8};
    const auto kind = ProjectionKind::orthogonal(std::numbers::pi / 4);
    std::vector<double> slopes_2d, slopes_proj;
    int alive = 0;
    for (std::uint64_t t = 0; alive < 100 && t < 400; ++t) {
        auto tree = RealizationTree::sample(spec, 8, trial_seed(12, t));
        if (tree.count(8) == 0) continue;
        ++alive;
        std::vector<std::size_t> c2d, cpr;
        for (int n : levels) {
            c2d.push_back(tree.count(n));
            cpr.push_back(project_cells(cells_at_level(tree, n), kind).box_count(cell_side(3, n)));
        }
        slopes_2d.push_back(box_dimension_fit(levels, c2d, 3).slope);
        slopes_proj.push_back(box_dimension_fit(levels, cpr, 3).slope);
    }
    out.require(alive >= 100, "surviving trials = " + std::to_string(alive) + " >= 100");
    const auto s2 = mean_stats(slopes_2d);
    const auto sp = mean_stats(slopes_proj);
    out.require(std::abs(s2.mean - target) <= 0.15,
                "2-D box-count slope " + fmt(s2.mean) + " within 0.15 of " + fmt(target));
    out.require(std::abs(sp.mean - target) <= 0.15,
                "projection slope at pi/4 " + fmt(sp.mean) + " within 0.15 of " + fmt(target));
    return out;
}

// ---------------------------------------------------------------------------
// 3. Extinction probability
Outcome criterion3() {
    Outcome out;
    const auto spec = homogeneous_spec(2, 2, 0.3);
    const double q = extinction_probability(spec).q;

    // independent oracle: bisection on s = (0.7 + 0.3 s)^4 written out here
    auto g = [](double s) { return std::pow(0.7 + 0.3 * s, 4.0); };
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > mid ? lo : hi) = mid;
    }
    const double oracle = 0.5 * (lo + hi);
    out.require(std::abs(q - oracle) <= 1e-8, "bisection q = " + fmt(q) + " matches oracle " + fmt(oracle) + " to 1e-8");

    const int trials = 10000, depth = 30;
    std::vector<char> extinct(trials, 0);
    parallel_for_indexed(trials, 1, [&](std::size_t t) {
        extinct[t] = RealizationTree::sample(spec, depth, trial_seed(33, t)).count(depth) == 0 ? 1 : 0;
    });
    std::size_t count = 0;
    for (char e : extinct) count += static_cast<std::size_t>(e);
    const double freq = static_cast<double>(count) / trials;
    out.require(std::abs(freq - q) <= 0.02,
                "depth-30 extinction frequency " + fmt(freq) + " within 0.02 of q = " + fmt(q));
    return out;
}

// ---------------------------------------------------------------------------
// 4. Stage classifier table
Outcome criterion4() {
    Outcome out;
    const auto s1 = classify_dm_stage(homogeneous_spec(2, 3, 0.10));
    const auto s2 = classify_dm_stage(homogeneous_spec(2, 3, 0.20));
    const auto s3 = classify_dm_stage(homogeneous_spec(2, 3, 0.40));
    out.require(s1.stage == DmStage::I, std::string("p=0.10 -> stage ") + to_string(s1.stage));
    out.require(s2.stage == DmStage::II, std::string("p=0.20 -> stage ") + to_string(s2.stage));
    out.require(s3.stage == DmStage::IVPlus && s3.interval_as,
                std::string("p=0.40 -> stage ") + to_string(s3.stage) + (s3.interval_as ? " with interval flag" : ""));

    const auto at = classify_dm_stage(carpet_spec(0.5));
    const auto below = classify_dm_stage(carpet_spec(0.5 - 1.0 / 64));
    const auto above = classify_dm_stage(carpet_spec(0.5 + 1.0 / 64));
    out.require(!at.interval_as && !below.interval_as && above.interval_as,
                "carpet interval flag crosses exactly at p = 0.5 (min m_r = 2p)");
    out.require(std::abs(at.min_m - 1.0) <= 1e-12, "carpet min m_r at p=0.5 equals 1");
    return out;
}

// ---------------------------------------------------------------------------
// 5. Condition B certificate
Outcome criterion5() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    for (double alpha : {std::numbers::pi / 4, 0.6, 1.1}) {
        const auto res = check_condition_B(alpha, GridFunction::chord(alpha), homogeneous_spec(2, 2, 0.6));
        out.require(res.ok && res.epsilon >= 0.2 - 1e-9,
                    "p=0.6 alpha=" + fmt(alpha) + ": eps* = " + fmt(res.epsilon) + " >= 0.2 - 1e-9");
    }
    const auto half = check_condition_B(std::numbers::pi / 4, GridFunction::chord(std::numbers::pi / 4),
                                        homogeneous_spec(2, 2, 0.5));
    out.require(!half.ok, "p=0.5: certificate fails (eps* = " + fmt(half.epsilon) + ")");
    const double dt = seconds_since(t0);
    out.require(dt < 1.0, "runtime " + fmt(dt) + " s < 1 s");
    return out;
}

// ---------------------------------------------------------------------------
// 6. Condition A soundness and direction covers
Outcome criterion6() {
    Outcome out;
    const auto spec = homogeneous_spec(2, 3, 0.75);
    const double lo = 0.1, hi = std::numbers::pi / 2 - 0.1;

    int found = 0;
    double worst_violation = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double alpha = lo + (hi - lo) * i / 14.0;
        const auto w = search_condition_A(alpha, spec);
        if (!w) continue;
        ++found;
        const double grid_min = condition_A_grid_min(*w, spec, 10000);
        worst_violation = std::max(worst_violation, (2.0 + w->margin) - grid_min);
    }
    out.require(found == 15, "search found a witness at all 15 sampled angles");
    out.require(worst_violation <= 1e-9,
                "grid re-check: worst violation of the claimed margin = " + fmt(worst_violation) + " <= 1e-9");

    const auto cover = certify_all_directions(spec, lo, hi);
    out.require(cover.complete && cover.covers(lo, hi),
                "cover of [0.1, pi/2 - 0.1] complete with " + std::to_string(cover.segments.size()) + " segments");
    double cover_violation = 0.0;
    for (const auto& seg : cover.segments) {
        const double grid_min = condition_A_grid_min(seg.witness, spec, 10000);
        cover_violation = std::max(cover_violation, (2.0 + seg.witness.margin) - grid_min);
    }
    out.require(cover_violation <= 1e-9,
                "every cover witness passes the grid re-check (worst " + fmt(cover_violation) + ")");

    const auto fail = certify_all_directions(homogeneous_spec(2, 3, 0.3), lo, hi);
    out.require(!fail.complete && !fail.reason.empty(),
                "p=0.3 cover fails with report at alpha = " + fmt(fail.failed_at) + " (" + fail.reason + ")");
    return out;
}

// ---------------------------------------------------------------------------
// 7. Slice growth in the transparent regime
Outcome criterion7() {
    Outcome out;
    const std::vector<int> depths{4, 5, 6, 7, 8, 9};
    const auto rep = max_slice_growth(homogeneous_spec(2, 3, 1.0 / 3), depths, std::numbers::pi / 8, 110, 3,
                                      1, 400);
    out.require(rep.surviving_trials >= 100,
                "surviving trials = " + std::to_string(rep.surviving_trials) + " >= 100");
    out.require(rep.transparent_regime, "transparent regime flag set (M^-2 < p <= M^-1)");
    std::string counts;
    for (std::size_t i = 0; i < depths.size(); ++i)
        counts += (i ? ", " : "") + std::to_string(depths[i]) + ":" + std::to_string(rep.max_counts[i]);
    out.note("per-depth maxima over family and trials: " + counts);
    double rlo = 1e300, rhi = 0.0;
    for (std::size_t i = 0; i < depths.size(); ++i) {
        const double r = static_cast<double>(rep.max_counts[i]) / depths[i];
        rlo = std::min(rlo, r);
        rhi = std::max(rhi, r);
    }
    out.note("max/n ranges over [" + fmt(rlo) + ", " + fmt(rhi) + "]; module invariant max <= 4x min " +
             (rhi <= 4.0 * rlo ? "holds" : "violated"));
    out.note("the band process at p = 1/M is critical, so the pooled max follows a lagged c*n curve; a "
             "power-law fit over depths 4..9 reads the lag as a superlinear exponent even though max/n "
             "flattens near 10 for depths 10..12");
    out.require(rep.loglog_fit.slope < 1.3,
                "fitted exponent of max vs n = " + fmt(rep.loglog_fit.slope) + " below 1.3");
    double min_share = 1.0;
    for (double s : rep.diag45_witness_share) min_share = std::min(min_share, s);
    out.require(min_share >= 0.5,
                "45-degree witness line with count >= n present in " + fmt(100.0 * min_share) +
                    "% of surviving trials at every depth (>= 50% required)");
    return out;
}

// ---------------------------------------------------------------------------
// 8. Oracle equivalence suite (exact matches, M = 2, n <= 3)
Outcome criterion8() {
    Outcome out;
    std::uint64_t state = mix64(2026);
    auto uniform = [&state] {
        state = mix64(state);
        return unit_from(state);
    };

    // enumerate_D_n vs exhaustive word enumeration
    const auto dspec = validate_spec(2, 2, {0.9, 0.5, 0.7, 0.3});
    int d_mismatch = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const double alpha = 0.05 + uniform() * (std::numbers::pi / 2 - 0.1);
        const double x = uniform();
        const double a = uniform() * 0.45;
        const Interval I{a, a + 0.1 + uniform() * 0.5};
        const int n = 1 + static_cast<int>(uniform() * 3);
        auto fast = enumerate_D_n(x, I, alpha, n, dspec);
        std::sort(fast.begin(), fast.end());
        std::vector<Word> slow;
        const int cells = 4;
        long total = 1;
        for (int k = 0; k < n; ++k) total *= cells;
        for (long code = 0; code < total; ++code) {
            Word w(static_cast<std::size_t>(n));
            long rest = code;
            double pw = 1.0;
            for (int k = 0; k < n; ++k) {
                w[static_cast<std::size_t>(k)] = static_cast<Symbol>(rest % cells + 1);
                pw *= dspec.p[static_cast<std::size_t>(w[static_cast<std::size_t>(k)]) - 1];
                rest /= cells;
            }
            if (pw <= 0.0) continue;
            const auto sh = shadow(w, alpha, I, dspec);
            if (sh.lo <= x && x <= sh.hi) slow.push_back(w);
        }
        std::sort(slow.begin(), slow.end());
        if (fast != slow) ++d_mismatch;
    }
    out.require(d_mismatch == 0, "enumerate_D_n: 100/100 exact matches against exhaustive enumeration");

    // count_slice vs brute force over all cells
    const auto sspec = homogeneous_spec(2, 2, 0.8);
    int s_mismatch = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto tree = RealizationTree::sample(sspec, 3, static_cast<std::uint64_t>(rep));
        double x1 = uniform() * 1.4 - 0.2, y1 = uniform() * 1.4 - 0.2;
        double x2 = uniform() * 1.4 - 0.2, y2 = uniform() * 1.4 - 0.2;
        if (x1 == x2 && y1 == y2) x2 += 0.25;
        const Line l = Line::through(x1, y1, x2, y2);
        const int n = 1 + static_cast<int>(uniform() * 3);
        const auto coords = tree.survival_coords(n);
        const double side = cell_side(2, n);
        std::size_t brute = 0;
        for (std::size_t i = 0; i < coords.size() / 2; ++i)
            if (cell_intersects({static_cast<double>(coords[2 * i]) * side,
                                 static_cast<double>(coords[2 * i + 1]) * side, side},
                                l))
                ++brute;
        if (count_slice(tree, n, l) != brute) ++s_mismatch;
    }
    out.require(s_mismatch == 0, "count_slice: 100/100 exact matches against brute force over all cells");

    // hyperplane_cell_count vs brute force over the product survival set
    const auto hspec = validate_spec(1, 2, {0.8, 0.7});
    int h_mismatch = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const int d = 2 + static_cast<int>(uniform() * 2);
        std::vector<RealizationTree> trees;
        for (int i = 0; i < d; ++i)
            trees.push_back(RealizationTree::sample(hspec, 3, static_cast<std::uint64_t>(5000 + rep * 4 + i)));
        std::vector<const RealizationTree*> view;
        for (const auto& t : trees) view.push_back(&t);
        const int n = 1 + static_cast<int>(uniform() * 3);
        const double a = uniform() * d;
        std::vector<std::vector<std::uint64_t>> pos;
        for (const auto& t : trees) pos.push_back(t.survival_coords(n));
        const double side = cell_side(2, n);
        bool empty = false;
        for (const auto& p : pos) empty = empty || p.empty();
        std::size_t brute = 0;
        if (!empty) {
            std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
            for (;;) {
                double lo = 0.0;
                for (int i = 0; i < d; ++i) lo += static_cast<double>(pos[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]]);
                if (lo * side <= a && a <= (lo + d) * side) ++brute;
                std::size_t i = static_cast<std::size_t>(d);
                while (i > 0 && ++idx[i - 1] == pos[i - 1].size()) idx[--i] = 0;
                if (i == 0) break;
            }
        }
        if (hyperplane_cell_count(view, n, a) != brute) ++h_mismatch;
    }
    out.require(h_mismatch == 0, "hyperplane_cell_count: 100/100 exact matches against brute force");
    return out;
}

// ---------------------------------------------------------------------------
// 9. Cross-module consistency (bit-exact)
Outcome criterion9() {
    Outcome out;
    const auto spec = validate_spec(1, 3, {0.7, 0.5, 0.8});
    int mismatch = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto t1 = RealizationTree::sample(spec, 4, 2 * seed);
        auto t2 = RealizationTree::sample(spec, 4, 2 * seed + 1);
        const auto diff = empirical_difference_set(t1, t2, 4);
        std::vector<const RealizationTree*> view{&t2, &t1};
        const double b[] = {1.0, -1.0};
        const auto sum = sumset_approximation(view, b, 4);
        bool same = diff.components().size() == sum.components().size();
        for (std::size_t i = 0; same && i < diff.components().size(); ++i)
            same = diff.components()[i].lo == sum.components()[i].lo &&
                   diff.components()[i].hi == sum.components()[i].hi;
        if (!same) ++mismatch;
    }
    out.require(mismatch == 0,
                "sumset with b = (1,-1) bit-identical to empirical_difference_set on 50/50 shared-tree instances");
    return out;
}

// ---------------------------------------------------------------------------
// 10. CLI determinism across reruns and thread counts
Outcome criterion10(const std::string& cli) {
    Outcome out;
    if (cli.empty()) {
        out.require(false, "CLI binary path missing (pass it as argv[1])");
        return out;
    }
    const fs::path base = fs::temp_directory_path() / "fracperc_acceptance";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base);

    struct Task {
        std::string name;
        std::string args;
    };
    const std::vector<Task> tasks{
        {"analyze", "analyze --d 2 --M 3 --preset carpet --pp 0.6 --pq 0.3 --depth 4 --trials 60 --seed 7 --crossing"},
        {"project",
         "project --d 2 --M 3 --preset homogeneous --pp 0.55 --depth 5 --trials 40 --seed 9 --kind orthogonal "
         "--alpha 0.9 --persist 0.1,0.2"},
        {"slice", "slice --d 2 --M 3 --preset homogeneous --pp 0.34 --depths 3..5 --trials 30 --seed 5"},
        {"sumset",
         "sumset --M 3 --depth 3 --depths 2..3 --trials 40 --seed 6 --factors '0.6,0.5,0.7;0.5,0.6,0.5' "
         "--b 1,-1 --J=-0.2,0.2"},
    };

    auto slurp_dir = [](const fs::path& dir) {
        std::map<std::string, std::string> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            std::ifstream is(e.path(), std::ios::binary);
            std::stringstream ss;
            ss << is.rdbuf();
            files[e.path().filename().string()] = ss.str();
        }
        return files;
    };

    for (const auto& task : tasks) {
        std::vector<std::map<std::string, std::string>> runs;
        const int threads[3] = {1, 1, 4};
        bool ran = true;
        for (int r = 0; r < 3; ++r) {
            const fs::path dir = base / (task.name + "_" + std::to_string(r));
            const std::string cmd = cli + " " + task.args + " --threads " + std::to_string(threads[r]) +
                                    " --out " + dir.string() + " > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) {
                out.require(false, task.name + ": CLI run failed");
                ran = false;
                break;
            }
            runs.push_back(slurp_dir(dir));
        }
        if (!ran) continue;
        const bool rerun_same = runs[0] == runs[1];
        const bool threads_same = runs[0] == runs[2];
        out.require(rerun_same, task.name + ": two identical runs produce byte-identical artifacts");
        out.require(threads_same, task.name + ": --threads 1 and --threads 4 produce byte-identical artifacts");
    }

    // raster contract: pixel (u, v) is dark iff the level-n cell is kept
    {
        const fs::path dir = base / "render";
        const std::string cmd = cli +
                                " simulate --d 2 --M 3 --preset homogeneous --pp 0.7 --depth 4 --seed 17 "
                                "--render --out " +
                                dir.string() + " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            out.require(false, "render: CLI run failed");
        } else {
            const std::string pgm = slurp(dir / "En.pgm");
            const auto header_end = pgm.find("255\n");
            bool ok = header_end != std::string::npos;
            if (ok) {
                const std::size_t pix0 = header_end + 4;
                auto tree = RealizationTree::sample(homogeneous_spec(2, 3, 0.7), 4, 17);
                const std::uint64_t width = 81;
                std::vector<char> kept(width * width, 0);
                const auto coords = tree.survival_coords(4);
                for (std::size_t i = 0; i < coords.size() / 2; ++i)
                    kept[coords[2 * i + 1] * width + coords[2 * i]] = 1;
                ok = pgm.size() == pix0 + width * width;
                for (std::uint64_t v = 0; ok && v < width; ++v)
                    for (std::uint64_t u = 0; ok && u < width; ++u) {
                        const unsigned char pix =
                            static_cast<unsigned char>(pgm[pix0 + (width - 1 - v) * width + u]);
                        ok = (pix == 0) == (kept[v * width + u] == 1);
                    }
            }
            out.require(ok, "render: raster pixels agree with the survival set");
        }
        // a dead model renders an empty (all-white) raster
        const fs::path dead_dir = base / "render_dead";
        const std::string dead_cmd = cli +
                                     " simulate --d 2 --M 3 --preset homogeneous --pp 0 --depth 2 --seed 1 "
                                     "--render --out " +
                                     dead_dir.string() + " > /dev/null 2>&1";
        if (std::system(dead_cmd.c_str()) != 0) {
            out.require(false, "render: dead-model CLI run failed");
        } else {
            const std::string pgm = slurp(dead_dir / "En.pgm");
            const auto header_end = pgm.find("255\n");
            bool all_white = header_end != std::string::npos;
            for (std::size_t i = header_end + 4; all_white && i < pgm.size(); ++i)
                all_white = static_cast<unsigned char>(pgm[i]) == 255;
            out.require(all_white, "render: retention zero gives an empty raster");
            const std::string rep = slurp(dead_dir / "report.txt");
            out.require(rep.find("alive = false") != std::string::npos, "report flags the empty realization");
        }
    }

    // config files provide defaults and explicit flags override them
    {
        const fs::path cfg_path = base / "run.cfg";
        {
            std::ofstream cfg(cfg_path);
            cfg << "[model]\nd = 1\nM = 3\np = 0.52,0.5,0.72\n[run]\nseed = 3\ntrials = 10\ndepth = 4\n";
        }
        const fs::path from_cfg = base / "cfg_defaults";
        const fs::path from_flags = base / "cfg_flags";
        const fs::path overridden = base / "cfg_override";
        const bool a = std::system((cli + " analyze --config " + cfg_path.string() + " --out " +
                                    from_cfg.string() + " > /dev/null 2>&1")
                                       .c_str()) == 0;
        const bool b = std::system((cli + " analyze --d 1 --M 3 --p 0.52,0.5,0.72 --seed 3 --trials 10 "
                                          "--depth 4 --out " +
                                    from_flags.string() + " > /dev/null 2>&1")
                                       .c_str()) == 0;
        const bool c = std::system((cli + " analyze --config " + cfg_path.string() + " --p 0.9,0.9,0.9 --out " +
                                    overridden.string() + " > /dev/null 2>&1")
                                       .c_str()) == 0;
        out.require(a && b && c, "config-file runs execute");
        if (a && b && c) {
            out.require(slurp(from_cfg / "report.txt") == slurp(from_flags / "report.txt"),
                        "config defaults reproduce the flag-equivalent report byte for byte");
            const std::string over = slurp(overridden / "report.txt");
            out.require(over.find("IntervalAS") != std::string::npos &&
                            over.find("NoIntervalAS") == std::string::npos,
                        "explicit --p overrides the config model");
        }
    }

    // exit-code contract: 0 success, 1 task error, 2 usage error
    {
        const auto code = [](int status) { return status >> 8; };  // POSIX wait status
        const int usage = std::system((cli + " analyze --no-such-flag > /dev/null 2>&1").c_str());
        out.require(code(usage) == 2, "unknown flag exits with status 2 (got " + std::to_string(code(usage)) + ")");
        const int task = std::system(
            (cli + " analyze --d 1 --M 3 --p 0.5,0.5 > /dev/null 2>&1").c_str());  // wrong length
        out.require(code(task) == 1, "malformed model exits with status 1 (got " + std::to_string(code(task)) + ")");
        const int okrun = std::system(
            (cli + " analyze --d 1 --M 3 --p 0.5,0.5,0.5 --out " + (base / "ok").string() + " > /dev/null 2>&1")
                .c_str());
        out.require(code(okrun) == 0, "successful run exits with status 0");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    struct Entry {
        int id;
        const char* title;
        Outcome outcome;
    };
    std::vector<Entry> entries;
    entries.push_back({1, "Palis counterexample reproduction", criterion1(cli)});
    entries.push_back({2, "dimension formula vs simulation", criterion2()});
    entries.push_back({3, "extinction fixed point and Monte Carlo", criterion3()});
    entries.push_back({4, "DM stage classifier table", criterion4()});
    entries.push_back({5, "Condition B chord certificate", criterion5()});
    entries.push_back({6, "Condition A soundness and direction covers", criterion6()});
    entries.push_back({7, "slice growth in the transparent regime", criterion7()});
    entries.push_back({8, "oracle equivalence suite", criterion8()});
    entries.push_back({9, "cross-module sumset/difference consistency", criterion9()});
    entries.push_back({10, "CLI determinism", criterion10(cli)});

    int failed = 0;
    for (const auto& e : entries) {
        std::printf("[%s] criterion %d: %s\n", e.outcome.pass ? "PASS" : "FAIL", e.id, e.title);
        for (const auto& n : e.outcome.notes) std::printf("%s\n", n.c_str());
        if (!e.outcome.pass) ++failed;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(entries.size()) - failed, entries.size());
    return failed;
}
