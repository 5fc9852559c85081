#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fracperc {

// Closed interval; lo > hi encodes the empty interval.
struct Interval {
    double lo = 0.0;
    double hi = -1.0;

    bool empty() const { return !(lo <= hi); }
    double length() const { return empty() ? 0.0 : hi - lo; }
    static Interval none() { return {0.0, -1.0}; }
};

// Sorted union of disjoint closed intervals; touching inputs merge (gap
// tolerance zero), so components are maximal intervals of the union.
class IntervalUnion {
public:
    IntervalUnion() = default;

    static IntervalUnion from(std::vector<Interval> parts) {
        std::erase_if(parts, [](const Interval& iv) { return iv.empty(); });
        std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
            return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
        });
        IntervalUnion u;
        for (const Interval& iv : parts) {
            if (!u.comps_.empty() && iv.lo <= u.comps_.back().hi) {
                if (iv.hi > u.comps_.back().hi) u.comps_.back().hi = iv.hi;
            } else {
                u.comps_.push_back(iv);
            }
        }
        return u;
    }

    const std::vector<Interval>& components() const { return comps_; }
    bool empty() const { return comps_.empty(); }

    double measure() const {
        double s = 0.0;
        for (const Interval& iv : comps_) s += iv.hi - iv.lo;
        return s;
    }

    Interval longest() const {
        Interval best = Interval::none();
        for (const Interval& iv : comps_)
            if (iv.length() > best.length()) best = iv;
        return best;
    }

    bool contains_point(double x, double tol = 1e-12) const {
        auto it = std::upper_bound(comps_.begin(), comps_.end(), x,
                                   [](double v, const Interval& iv) { return v < iv.lo; });
        if (it != comps_.begin() && x <= std::prev(it)->hi + tol) return true;
        return it != comps_.end() && x >= it->lo - tol;
    }

    // True iff j is inside one component, endpoints tolerated to tol.
    bool contains(const Interval& j, double tol = 1e-12) const {
        if (j.empty()) return true;
        for (const Interval& iv : comps_)
            if (j.lo >= iv.lo - tol && j.hi <= iv.hi + tol) return true;
        return false;
    }

    // Number of grid cells [k*scale, (k+1)*scale] meeting the union.
    std::size_t box_count(double scale) const {
        if (scale <= 0.0) throw std::invalid_argument("box_count: scale must be positive");
        std::size_t total = 0;
        long long last = 0;
        bool have_last = false;
        for (const Interval& iv : comps_) {
            long long k0 = static_cast<long long>(std::floor(iv.lo / scale));
            const long long k1 = static_cast<long long>(std::floor(iv.hi / scale));
            if (have_last && k0 <= last) k0 = last + 1;
            if (k0 > k1) continue;
            total += static_cast<std::size_t>(k1 - k0 + 1);
            last = k1;
            have_last = true;
        }
        return total;
    }

private:
    std::vector<Interval> comps_;
};

}  // namespace fracperc
