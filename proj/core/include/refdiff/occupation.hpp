#pragma once

#include <algorithm>

#include "refdiff/coefficient_model.hpp"

namespace refdiff {

/// Occupation window (level - eps, level + eps) clipped to the domain.
///
/// Local time is the occupation density of the window divided by its
/// length inside the domain. Away from the boundary that is the usual
/// 1/(2 eps) normalization; at a reflecting boundary only the inner half
/// exists, which yields the right-continuous local time of the reflected
/// process (twice the regulator).
struct OccupationWindow {
    double lo = 0.0;
    double hi = 0.0;
    double length = 0.0;

    OccupationWindow() = default;
    OccupationWindow(const DomainSpec& domain, double level, double eps) {
        const double raw_lo = level - eps;
        const double raw_hi = level + eps;
        lo = std::max(raw_lo, domain.lower());
        hi = std::min(raw_hi, domain.upper());
        // The closed boundary point itself belongs to the clipped window.
        closed_lo_ = raw_lo < domain.lower();
        closed_hi_ = raw_hi > domain.upper();
        length = std::max(0.0, hi - lo);
    }

    bool contains(double z) const {
        const bool above = closed_lo_ ? z >= lo : z > lo;
        const bool below = closed_hi_ ? z <= hi : z < hi;
        return above && below;
    }

private:
    bool closed_lo_ = false;
    bool closed_hi_ = false;
};

}  // namespace refdiff
