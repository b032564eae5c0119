#pragma once

#include <cmath>

#include "odc/errors.hpp"

namespace odc {

// Bisection on a bracket where fn changes sign. Narrows to width <= xtol
// and returns the midpoint. All monotone inversions here have trivial
// brackets, so nothing fancier is needed.
template <class F>
double bisect(F&& fn, double lo, double hi, double xtol = 1e-12) {
    double flo = fn(lo);
    if (flo == 0.0) return lo;
    double fhi = fn(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw domain_error("bisect: endpoints have the same sign");
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // hit fp resolution
        const double fm = fn(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace odc
