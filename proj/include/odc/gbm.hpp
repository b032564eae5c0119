#pragma once

#include <cmath>
#include <limits>

#include "odc/errors.hpp"
#include "odc/strategy.hpp"

namespace odc {

// Log-price short rate r_t = r0 + m t + sigma W_t discounting at exp(-r_t),
// infinite horizon. kappa = m - sigma^2/2 must be positive or nothing is
// integrable.
struct GbmParams {
    double m = 1.0;
    double sigma = 1.0;
    double r0 = 0.0;
    double mu = 1.0;
    double xi = 1.0;  // may be +infinity

    double kappa() const { return m - 0.5 * sigma * sigma; }
    bool unrestricted() const { return std::isinf(xi); }
};

inline void validate(const GbmParams& p) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
        throw parameter_error("gbm: sigma must be a positive finite number");
    if (!std::isfinite(p.m)) throw parameter_error("gbm: m must be finite");
    if (!(p.kappa() > 0.0))
        throw parameter_error("gbm: requires m > sigma^2 / 2");
    if (!std::isfinite(p.r0)) throw parameter_error("gbm: r0 must be finite");
    if (!(p.mu > 0.0) || !std::isfinite(p.mu))
        throw parameter_error("gbm: mu must be a positive finite number");
    if (!(p.xi > 0.0)) throw parameter_error("gbm: xi must be positive");
}

// E[exp(-r_s)] = exp(-r0 - kappa s)
inline double expected_discount_gbm(const GbmParams& p, double s) {
    if (s < 0.0)
        throw domain_error("expected_discount_gbm: horizon must be nonnegative");
    return std::exp(-p.r0 - p.kappa() * s);
}

namespace detail_gbm {

// closed forms as functions of an explicit rate state (needed for the
// equation residuals); the public values evaluate them at r0

inline double value_small(const GbmParams& p, double r) {
    return p.xi * std::exp(-r) / p.kappa();
}

inline double value_hat(const GbmParams& p, double r, double x) {
    const double k = p.kappa();
    const double tau = x / (p.xi - p.mu);
    return std::exp(-r) / k * (p.xi - (p.xi - p.mu) * std::exp(-k * tau));
}

inline double value_unres(const GbmParams& p, double r, double x) {
    return std::exp(-r) * (x + p.mu / p.kappa());
}

}  // namespace detail_gbm

// cap at or below the income rate: pay the cap forever
inline double value_gbm_small_xi(const GbmParams& p) {
    if (!(p.xi <= p.mu)) throw domain_error("value_gbm_small_xi: requires xi <= mu");
    return detail_gbm::value_small(p, p.r0);
}

// cap above the income rate: pay the cap until the surplus is gone at
// x / (xi - mu), the income rate afterwards
inline double value_gbm_large_xi(const GbmParams& p, double x) {
    if (!(std::isfinite(p.xi) && p.xi > p.mu))
        throw domain_error("value_gbm_large_xi: requires a finite cap above the income rate");
    if (!(x >= 0.0) || !std::isfinite(x))
        throw domain_error("value_gbm_large_xi: surplus must be nonnegative");
    return detail_gbm::value_hat(p, p.r0, x);
}

// no cap: pay the surplus immediately, then the income as it arrives
inline double value_gbm_unrestricted(const GbmParams& p, double x) {
    if (!(x >= 0.0) || !std::isfinite(x))
        throw domain_error("value_gbm_unrestricted: surplus must be nonnegative");
    return detail_gbm::value_unres(p, p.r0, x);
}

inline PiecewiseStrategy strategy_gbm(const GbmParams& p, double x) {
    const double inf = std::numeric_limits<double>::infinity();
    PiecewiseStrategy st;
    st.start = 0.0;
    st.end = inf;
    if (p.unrestricted()) {
        if (x > 0.0) st.lumps.push_back({0.0, x});
        st.segments.push_back({0.0, inf, p.mu});
    } else if (p.xi <= p.mu) {
        st.segments.push_back({0.0, inf, p.xi});
    } else {
        const double tau = x / (p.xi - p.mu);
        if (tau > 0.0) st.segments.push_back({0.0, tau, p.xi});
        st.segments.push_back({tau, inf, p.mu});
    }
    return st;
}

// Equation residual at an explicit state, analytic partials:
//   mu V_x + m V_r + sigma^2/2 V_rr + sup_{0<=c<=xi} c (exp(-r) - V_x) = 0,
// or its variational form max(mu V_x + m V_r + sigma^2/2 V_rr, exp(-r) - V_x)
// when the cap is infinite. The closed forms satisfy these to rounding.
inline double hjb_residual_gbm(const GbmParams& p, double r, double x) {
    const double half_s2 = 0.5 * p.sigma * p.sigma;
    const double er = std::exp(-r);
    if (p.unrestricted()) {
        const double V = detail_gbm::value_unres(p, r, x);
        const double Vx = er;
        const double drift = p.mu * Vx + p.m * (-V) + half_s2 * V;
        return std::max(drift, er - Vx);
    }
    if (p.xi <= p.mu) {
        const double V = detail_gbm::value_small(p, r);
        const double Vx = 0.0;
        return p.mu * Vx + p.m * (-V) + half_s2 * V + p.xi * std::max(er - Vx, 0.0);
    }
    const double V = detail_gbm::value_hat(p, r, x);
    const double Vx = std::exp(-r - p.kappa() * x / (p.xi - p.mu));
    return p.mu * Vx + p.m * (-V) + half_s2 * V + p.xi * std::max(er - Vx, 0.0);
}

}  // namespace odc
