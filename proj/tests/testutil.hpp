#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <fracperc/rng.hpp>

namespace testutil {

// Upper regularized incomplete gamma Q(a, x) by series / continued fraction.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // P by series, Q = 1 - P
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Q by continued fraction
    double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi_square_pvalue(double stat, int dof) {
    if (dof < 1) throw std::invalid_argument("chi_square_pvalue: dof < 1");
    return gamma_q(static_cast<double>(dof) / 2.0, stat / 2.0);
}

// Distribution of the number of successes among independent Bernoulli(p_i).
inline std::vector<double> poisson_binomial_pmf(const std::vector<double>& p) {
    std::vector<double> pmf{1.0};
    for (double pi : p) {
        std::vector<double> next(pmf.size() + 1, 0.0);
        for (std::size_t k = 0; k < pmf.size(); ++k) {
            next[k] += pmf[k] * (1.0 - pi);
            next[k + 1] += pmf[k] * pi;
        }
        pmf = std::move(next);
    }
    return pmf;
}

// Chi-square GOF p-value of observed counts against expected probabilities,
// pooling cells with expectation below 5.
inline double gof_pvalue(const std::vector<std::size_t>& observed, const std::vector<double>& probs,
                         std::size_t total) {
    if (observed.size() != probs.size()) throw std::invalid_argument("gof: size mismatch");
    std::vector<double> exp_pool;
    std::vector<double> obs_pool;
    double e_acc = 0.0, o_acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        e_acc += probs[i] * static_cast<double>(total);
        o_acc += static_cast<double>(observed[i]);
        if (e_acc >= 5.0) {
            exp_pool.push_back(e_acc);
            obs_pool.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (!exp_pool.empty()) {
            exp_pool.back() += e_acc;
            obs_pool.back() += o_acc;
        } else {
            exp_pool.push_back(e_acc);
            obs_pool.push_back(o_acc);
        }
    }
    if (exp_pool.size() < 2) return 1.0;
    double stat = 0.0;
    for (std::size_t i = 0; i < exp_pool.size(); ++i) {
        const double diff = obs_pool[i] - exp_pool[i];
        stat += diff * diff / exp_pool[i];
    }
    return chi_square_pvalue(stat, static_cast<int>(exp_pool.size()) - 1);
}

// Deterministic uniform stream for property-test inputs.
class Random {
public:
    explicit Random(std::uint64_t seed) : state_(fracperc::mix64(seed)) {}

    double uniform() {
        state_ = fracperc::mix64(state_);
        return fracperc::unit_from(state_);
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t integer(std::uint64_t bound) {
        state_ = fracperc::mix64(state_);
        return state_ % bound;
    }

private:
    std::uint64_t state_;
};

}  // namespace testutil
