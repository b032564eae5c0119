#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "odc/errors.hpp"

namespace odc {

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
// Nodes are the positive abscissae in descending order; index 7 is 0.
inline constexpr double gk15_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double gk15_wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

// Gauss weights for nodes 1, 3, 5 and for the centre node.
inline constexpr double gk15_wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
inline void gk15(F& fn, double a, double b, double& value, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = fn(c);
    double resk = gk15_wk[7] * fc;
    double resg = gk15_wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * gk15_nodes[i];
        const double f1 = fn(c - dx);
        const double f2 = fn(c + dx);
        resk += gk15_wk[i] * (f1 + f2);
        if (i % 2 == 1) resg += gk15_wg[i / 2] * (f1 + f2);
    }
    value = resk * h;
    error = std::abs((resk - resg) * h);
}

}  // namespace detail

// Adaptive bisection built on the 7-15 Gauss-Kronrod pair, run to an
// absolute tolerance. Tolerance is distributed over subintervals in
// proportion to their width.
template <class F>
double integrate(F fn, double a, double b, double abs_tol = 1e-10) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    const double total = b - a;

    struct Panel {
        double a, b;
    };
    std::vector<Panel> stack;
    stack.push_back({a, b});

    double sum = 0.0, comp = 0.0;  // Kahan
    std::size_t panels = 0;
    while (!stack.empty()) {
        if (++panels > 100000)
            throw numerical_error("integrate: subdivision limit reached");
        const Panel p = stack.back();
        stack.pop_back();
        double v, e;
        detail::gk15(fn, p.a, p.b, v, e);
        const double width = p.b - p.a;
        if (width < 1e-14 * total && e > abs_tol * (width / total))
            throw numerical_error(
                "integrate: interval shrank to fp resolution without "
                "converging (singular or non-integrable integrand?)");
        if (e <= abs_tol * (width / total) || width < 1e-14 * total) {
            const double y = v - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        } else {
            const double mid = 0.5 * (p.a + p.b);
            stack.push_back({p.a, mid});
            stack.push_back({mid, p.b});
        }
    }
    return sign * sum;
}

}  // namespace odc
