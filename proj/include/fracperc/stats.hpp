#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fracperc {

struct SlopeFit {
    double slope = 0.0;
    double stderr_slope = 0.0;
    int points = 0;
};

// Least-squares slope of y against x with the usual slope standard error.
inline SlopeFit least_squares_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("least_squares_slope: need >= 2 matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares_slope: degenerate abscissae");
    SlopeFit fit;
    fit.points = static_cast<int>(n);
    fit.slope = sxy / sxx;
    if (n > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - my - fit.slope * (x[i] - mx);
            ss += r * r;
        }
        fit.stderr_slope = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

struct MeanStats {
    double mean = 0.0;
    double stddev = 0.0;
    double stderr_mean = 0.0;
    std::size_t n = 0;
};

inline MeanStats mean_stats(std::span<const double> v) {
    MeanStats s;
    s.n = v.size();
    if (s.n == 0) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

// Wilson score interval at ~95% (z = 1.96).
struct FrequencyEstimate {
    double freq = 0.0;
    double ci_lo = 0.0, ci_hi = 1.0;
    std::size_t hits = 0, trials = 0;
};

inline FrequencyEstimate wilson_estimate(std::size_t hits, std::size_t trials) {
    FrequencyEstimate e;
    e.hits = hits;
    e.trials = trials;
    if (trials == 0) return e;
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double ph = static_cast<double>(hits) / n;
    e.freq = ph;
    const double z2 = z * z;
    const double den = 1.0 + z2 / n;
    const double mid = ph + z2 / (2.0 * n);
    const double rad = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
    e.ci_lo = (mid - rad) / den;
    e.ci_hi = (mid + rad) / den;
    return e;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers over contiguous
// chunks. Callers store results by index, so aggregation order (and hence
// every output byte) is independent of the thread count.
inline void parallel_for_indexed(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads < 1) threads = 1;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n ? n : 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace fracperc
