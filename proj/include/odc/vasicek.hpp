#pragma once

#include <cmath>

#include "odc/errors.hpp"

namespace odc {

// Mean-reverting short rate dr = a (b_tilde - r) dt + sigma_tilde dW in its
// natural parameters.
struct VasicekParams {
    double a = 1.0;
    double sigma_tilde = 1.0;
    double b_tilde = 0.0;
    double r0 = 0.0;
};

// The same model in the shifted parameters every closed form below uses:
//   sigma = sigma_tilde / sqrt(2 a),   b = b_tilde - sigma_tilde^2 / (2 a^2).
// b is the long-run exponential decay rate of the expected discount factor.
struct DerivedParams {
    double a = 1.0;
    double sigma = 1.0;
    double b = 0.0;
    double r0 = 0.0;

    double sigma_tilde() const { return sigma * std::sqrt(2.0 * a); }
    double b_tilde() const { return b + sigma * sigma / a; }
};

inline void validate(const VasicekParams& p) {
    if (!(p.a > 0.0) || !std::isfinite(p.a))
        throw parameter_error("vasicek: a must be a positive finite number");
    if (!(p.sigma_tilde > 0.0) || !std::isfinite(p.sigma_tilde))
        throw parameter_error("vasicek: sigma_tilde must be a positive finite number");
    if (!std::isfinite(p.b_tilde))
        throw parameter_error("vasicek: b_tilde must be finite");
    if (!std::isfinite(p.r0)) throw parameter_error("vasicek: r0 must be finite");
}

inline void validate(const DerivedParams& d) {
    if (!(d.a > 0.0) || !std::isfinite(d.a))
        throw parameter_error("vasicek: a must be a positive finite number");
    if (!(d.sigma > 0.0) || !std::isfinite(d.sigma))
        throw parameter_error("vasicek: sigma must be a positive finite number");
    if (!std::isfinite(d.b)) throw parameter_error("vasicek: b must be finite");
    if (!std::isfinite(d.r0)) throw parameter_error("vasicek: r0 must be finite");
}

inline DerivedParams reparameterize(const VasicekParams& p) {
    validate(p);
    DerivedParams d;
    d.a = p.a;
    d.sigma = p.sigma_tilde / std::sqrt(2.0 * p.a);
    d.b = p.b_tilde - p.sigma_tilde * p.sigma_tilde / (2.0 * p.a * p.a);
    d.r0 = p.r0;
    return d;
}

// f(r, s) = log E[exp(-int_0^s r_u du)] started at rate r. f(r, 0) = 0.
inline double log_discount(const DerivedParams& d, double r, double s) {
    if (s < 0.0) throw domain_error("log_discount: horizon must be nonnegative");
    const double E = -std::expm1(-d.a * s);  // 1 - exp(-a s)
    return -d.b * s - (r - d.b) / d.a * E -
           d.sigma * d.sigma / (2.0 * d.a * d.a) * E * E;
}

// Expected discount factor E[exp(-int_0^s r_u du)] = exp(f(r, s)).
inline double bond_price(const DerivedParams& d, double r, double s) {
    return std::exp(log_discount(d, r, s));
}

// d/ds f(r, s). Equals -r at s = 0. Substituting u = exp(-a s) makes this
// the quadratic (sigma^2/a) u^2 - (r - b + sigma^2/a) u - b.
inline double f_time_derivative(const DerivedParams& d, double r, double s) {
    if (s < 0.0) throw domain_error("f_time_derivative: horizon must be nonnegative");
    const double u = std::exp(-d.a * s);
    const double A = d.sigma * d.sigma / d.a;
    return -d.b - (r - d.b + A) * u + A * u * u;
}

// E[exp(-int_0^s r_u du) | r_0 = r, r_s = y], symmetric in (r, y):
//   exp(-b s - ((r - b) + (y - b)) / a * tanh(a s / 2)).
inline double conditional_bond_price(const DerivedParams& d, double r, double s,
                                     double y) {
    if (s < 0.0)
        throw domain_error("conditional_bond_price: horizon must be nonnegative");
    const double th = std::tanh(0.5 * d.a * s);
    return std::exp(-d.b * s - ((r - d.b) + (y - d.b)) / d.a * th);
}

}  // namespace odc
