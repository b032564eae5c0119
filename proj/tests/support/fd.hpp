// Small finite-difference helpers for seam and residual checks.
#pragma once

#include <functional>

namespace odc_test {

// second-order one-sided derivative approaching u from above
inline double deriv_from_right(const std::function<double(double)>& f,
                               double u, double h) {
    return (-3.0 * f(u) + 4.0 * f(u + h) - f(u + 2.0 * h)) / (2.0 * h);
}

// second-order one-sided derivative approaching u from below
inline double deriv_from_left(const std::function<double(double)>& f,
                              double u, double h) {
    return (3.0 * f(u) - 4.0 * f(u - h) + f(u - 2.0 * h)) / (2.0 * h);
}

inline double deriv_central(const std::function<double(double)>& f, double u,
                            double h) {
    return (f(u + h) - f(u - h)) / (2.0 * h);
}

}  // namespace odc_test
