#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "projection.hpp"

namespace fracperc {

// Piecewise-linear nonnegative function on the diagonal parameter [0,1],
// vanishing at both endpoints. Breakpoints are sorted, unique and include
// the endpoints.
class GridFunction {
public:
    GridFunction(std::vector<double> breakpoints, std::vector<double> values)
        : x_(std::move(breakpoints)), v_(std::move(values)) {
        if (x_.size() != v_.size() || x_.size() < 2) throw std::invalid_argument("grid function: size mismatch");
        if (x_.front() != 0.0 || x_.back() != 1.0)
            throw std::invalid_argument("grid function: breakpoints must span [0,1]");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("grid function: breakpoints must strictly increase");
        for (double v : v_)
            if (!(v >= 0.0)) throw std::invalid_argument("grid function: values must be nonnegative");
        if (v_.front() != 0.0 || v_.back() != 0.0)
            throw std::invalid_argument("grid function: must vanish at the endpoints");
    }

    const std::vector<double>& breakpoints() const { return x_; }
    const std::vector<double>& values() const { return v_; }

    // Zero outside [0,1]; arguments a rounding error outside are clamped.
    double operator()(double t) const {
        if (t <= x_.front() || t >= x_.back()) return 0.0;
        const auto it = std::upper_bound(x_.begin(), x_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - x_.begin());
        const double w = (t - x_[i - 1]) / (x_[i] - x_[i - 1]);
        return v_[i - 1] + w * (v_[i] - v_[i - 1]);
    }

    bool identically_zero() const {
        for (double v : v_)
            if (v != 0.0) return false;
        return true;
    }

    bool strictly_positive_interior() const {
        for (std::size_t i = 1; i + 1 < v_.size(); ++i)
            if (!(v_[i] > 0.0)) return false;
        return true;
    }

    double right_slope_at_zero() const { return (v_[1] - v_[0]) / (x_[1] - x_[0]); }
    double left_slope_at_one() const {
        const std::size_t k = x_.size() - 1;
        return (v_[k] - v_[k - 1]) / (x_[k] - x_[k - 1]);
    }

    static GridFunction tent(double height = 1.0) { return GridFunction({0.0, 0.5, 1.0}, {0.0, height, 0.0}); }

    // Length of the chord of the unit square in direction alpha through the
    // diagonal point x. Piecewise linear with breaks at the parameters of the
    // corners (0,0) and (1,1); peak value min(1/cos a, 1/sin a).
    static GridFunction chord(double alpha) {
        Direction dir(alpha);
        const double c = std::cos(dir.alpha), s = std::sin(dir.alpha);
        const double s00 = c / (c + s);  // parameter of the line through (0,0)
        const double s11 = s / (c + s);  // parameter of the line through (1,1)
        const double peak = std::min(1.0 / c, 1.0 / s);
        const double a = std::min(s00, s11), b = std::max(s00, s11);
        if (a == b) return GridFunction({0.0, a, 1.0}, {0.0, peak, 0.0});
        return GridFunction({0.0, a, b, 1.0}, {0.0, peak, peak, 0.0});
    }

private:
    std::vector<double> x_, v_;
};

}  // namespace fracperc
