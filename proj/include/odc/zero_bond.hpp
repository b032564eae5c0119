#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "odc/errors.hpp"
#include "odc/f_analysis.hpp"
#include "odc/quadrature.hpp"
#include "odc/strategy.hpp"
#include "odc/vasicek.hpp"

namespace odc {

// Finite-horizon problem: spend income mu plus initial surplus x before T,
// each unit paid at time s worth the expected discount factor exp(f(r, s)),
// anything left at T paid out at exp(f(r, T)). xi caps the payout rate;
// +infinity means lump payouts are allowed.
struct ProblemZB {
    DerivedParams d;
    double mu = 1.0;
    double xi = 1.0;
    double T = 1.0;
    ScenarioReport report;

    bool unrestricted() const { return std::isinf(xi); }
};

inline ProblemZB make_problem_zb(const DerivedParams& d, double mu, double xi,
                                 double T) {
    validate(d);
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw parameter_error("zero-bond: mu must be a positive finite number");
    if (!(xi > 0.0)) throw parameter_error("zero-bond: xi must be positive");
    if (!(T > 0.0) || !std::isfinite(T))
        throw parameter_error("zero-bond: T must be a positive finite number");
    return ProblemZB{d, mu, xi, T, classify(d, d.r0, T)};
}

namespace detail_zb {

inline void check_state(const ProblemZB& p, double t, double x) {
    if (!(t >= 0.0) || !(t <= p.T) || !std::isfinite(t))
        throw domain_error("zero-bond: t outside [0, T]");
    if (!(x >= 0.0) || !std::isfinite(x))
        throw domain_error("zero-bond: surplus must be nonnegative");
}

inline double disc_integral(const ProblemZB& p, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return integrate(
        [&](double s) { return bond_price(p.d, p.report.r, s); }, lo, hi, 1e-10);
}

// The superlevel set {s in [0, T] : f(s) >= f(T)} is a single interval
// [start, end] (possibly empty). When an initial rising branch sits inside
// it, paying there competes with waiting for the peak at w1; that band is
// [start, zone2_start).
struct Window {
    bool empty = true;
    double start = 0.0;
    double end = 0.0;
    bool has_rise = false;
    double zone2_start = 0.0;
};

inline Window pay_window(const ProblemZB& p) {
    const ScenarioReport& R = p.report;
    Window w;
    switch (R.scenario) {
        case Scenario::Inc:
            return w;
        case Scenario::Dec:
            w = Window{false, 0.0, R.T, false, 0.0};
            return w;
        case Scenario::DecInc:
            if (R.t2 && *R.t2 > 0.0) w = Window{false, 0.0, *R.t2, false, 0.0};
            return w;
        case Scenario::IncDec:
            if (R.f_w1 && *R.f_w1 > R.fT)
                w = Window{false, R.t1.value_or(0.0), R.T, true, *R.w1};
            return w;
        case Scenario::IncDecInc:
            if (R.fT < *R.f_w1 && R.t2)
                w = Window{false, R.t1.value_or(0.0), *R.t2, true, *R.w1};
            return w;
    }
    return w;
}

inline double wait_value(const ProblemZB& p, double t, double x) {
    return (x + p.mu * (p.T - t)) * std::exp(p.report.fT);
}

// value on [zone2_start, end): pay at the cap while surplus lasts, then at
// the income rate, then wait out [end, T]
inline double value_zone2(const ProblemZB& p, const Window& w, double t,
                          double x) {
    const double empty_t = t + x / (p.xi - p.mu);
    if (empty_t >= w.end)
        return p.xi * disc_integral(p, t, w.end) +
               wait_value(p, w.end, x + (p.mu - p.xi) * (w.end - t));
    return p.xi * disc_integral(p, t, empty_t) +
           p.mu * disc_integral(p, empty_t, w.end) + wait_value(p, w.end, 0.0);
}

// Delay before paying, on the rising band. Paying a marginal unit now earns
// exp(f(t)); holding it earns exp(f) at the moment the full-rate run ends
// (or exp(f(T)) if that moment falls past the window). chi is the first
// time the pay-now marginal wins. The run-end time of a unit held during
// the wait is t + u + (x + mu u)/(xi - mu), which increases in u, so the
// crossing is unique once it passes the peak.
inline double chi_impl(const ProblemZB& p, const Window& w, double t, double x) {
    const auto F = [&](double s) { return log_discount(p.d, p.report.r, s); };
    const double partner0 = t + x / (p.xi - p.mu);
    if (partner0 >= w.end) return 0.0;
    if (F(t) > F(partner0)) return 0.0;
    const double u_partner = (w.end - partner0) * (p.xi - p.mu) / p.xi;
    const double u_hi = std::min(w.zone2_start - t, u_partner);
    const auto phi = [&](double u) {
        return F(t + u) - F(t + u + (x + p.mu * u) / (p.xi - p.mu));
    };
    if (!(phi(u_hi) > 0.0)) return u_hi;
    double lo = 0.0, hi = u_hi;  // phi(lo) <= 0 < phi(hi)
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (phi(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// value on [start, zone2_start): wait chi, pay the cap through the peak,
// hand over to the zone-2 value there
inline double value_zone3(const ProblemZB& p, const Window& w, double t,
                          double x) {
    const double ch = chi_impl(p, w, t, x);
    double y = x + ch * p.xi + (p.mu - p.xi) * (w.zone2_start - t);
    y = std::max(y, 0.0);
    return p.xi * disc_integral(p, t + ch, w.zone2_start) +
           value_zone2(p, w, w.zone2_start, y);
}

}  // namespace detail_zb

// --- rate cap below the income rate: pay the cap exactly on the superlevel
// set of f at level f(T) ---

inline double value_small_xi(const ProblemZB& p, double t, double x) {
    detail_zb::check_state(p, t, x);
    if (!(p.xi <= p.mu))
        throw domain_error("value_small_xi: requires xi <= mu");
    const detail_zb::Window w = detail_zb::pay_window(p);
    double pay = 0.0, len = 0.0;
    if (!w.empty) {
        const double lo = std::max(w.start, t), hi = w.end;
        if (hi > lo) {
            pay = p.xi * detail_zb::disc_integral(p, lo, hi);
            len = hi - lo;
        }
    }
    return pay + (x + p.mu * (p.T - t) - p.xi * len) * std::exp(p.report.fT);
}

inline PiecewiseStrategy strategy_small_xi(const ProblemZB& p, double t,
                                           double x) {
    detail_zb::check_state(p, t, x);
    if (!(p.xi <= p.mu))
        throw domain_error("strategy_small_xi: requires xi <= mu");
    const detail_zb::Window w = detail_zb::pay_window(p);
    PiecewiseStrategy st;
    st.start = t;
    st.end = p.T;
    if (w.empty || w.end <= std::max(w.start, t)) {
        st.segments.push_back({t, p.T, 0.0});
    } else {
        const double lo = std::max(w.start, t);
        st.segments.push_back({t, lo, 0.0});
        st.segments.push_back({lo, w.end, p.xi});
        st.segments.push_back({w.end, p.T, 0.0});
    }
    normalize(st);
    return st;
}

// --- rate cap above the income rate ---

// Delay before paying at full rate, defined on the rising band
// [window start, w1). Zero means pay immediately.
inline double chi(const ProblemZB& p, double t, double x) {
    detail_zb::check_state(p, t, x);
    if (!(std::isfinite(p.xi) && p.xi > p.mu))
        throw domain_error("chi: requires a finite cap above the income rate");
    const detail_zb::Window w = detail_zb::pay_window(p);
    if (w.empty || !w.has_rise || t < w.start || t >= w.zone2_start)
        throw domain_error("chi: t outside the wait-or-pay band");
    return detail_zb::chi_impl(p, w, t, x);
}

inline double value_large_xi(const ProblemZB& p, double t, double x) {
    detail_zb::check_state(p, t, x);
    if (!(std::isfinite(p.xi) && p.xi > p.mu))
        throw domain_error("value_large_xi: requires a finite cap above the income rate");
    if (t == p.T) return x * std::exp(p.report.fT);
    const detail_zb::Window w = detail_zb::pay_window(p);
    if (w.empty || t >= w.end) return detail_zb::wait_value(p, t, x);
    if (!w.has_rise || t >= w.zone2_start) return detail_zb::value_zone2(p, w, t, x);
    if (t >= w.start) return detail_zb::value_zone3(p, w, t, x);
    return detail_zb::value_zone3(p, w, w.start, x + p.mu * (w.start - t));
}

inline PiecewiseStrategy strategy_large_xi(const ProblemZB& p, double t,
                                           double x) {
    detail_zb::check_state(p, t, x);
    if (!(std::isfinite(p.xi) && p.xi > p.mu))
        throw domain_error("strategy_large_xi: requires a finite cap above the income rate");
    PiecewiseStrategy st;
    st.start = t;
    st.end = p.T;
    const detail_zb::Window w = detail_zb::pay_window(p);
    if (t == p.T) return st;
    if (w.empty || t >= w.end) {
        st.segments.push_back({t, p.T, 0.0});
        normalize(st);
        return st;
    }
    double cur_t = t, cur_x = x;
    if (w.has_rise && t < w.zone2_start) {
        if (t < w.start) {
            st.segments.push_back({t, w.start, 0.0});
            cur_x += p.mu * (w.start - t);
            cur_t = w.start;
        }
        const double ch = detail_zb::chi_impl(p, w, cur_t, cur_x);
        if (ch > 0.0) {
            st.segments.push_back({cur_t, cur_t + ch, 0.0});
            cur_x += p.mu * ch;
            cur_t += ch;
        }
    }
    const double empty_t = cur_t + cur_x / (p.xi - p.mu);
    if (empty_t < w.end) {
        st.segments.push_back({cur_t, empty_t, p.xi});
        st.segments.push_back({empty_t, w.end, p.mu});
    } else {
        st.segments.push_back({cur_t, w.end, p.xi});
    }
    st.segments.push_back({w.end, p.T, 0.0});
    normalize(st);
    return st;
}

// --- no cap: lump payouts allowed ---

inline double value_unrestricted(const ProblemZB& p, double t, double x) {
    detail_zb::check_state(p, t, x);
    if (t == p.T) return x * std::exp(p.report.fT);
    const detail_zb::Window w = detail_zb::pay_window(p);
    if (w.empty || t >= w.end) return detail_zb::wait_value(p, t, x);
    if (!w.has_rise || t >= w.zone2_start)
        return x * bond_price(p.d, p.report.r, t) +
               p.mu * detail_zb::disc_integral(p, t, w.end) +
               detail_zb::wait_value(p, w.end, 0.0);
    // wait for the peak, pay everything there
    return (x + p.mu * (w.zone2_start - t)) * std::exp(*p.report.f_w1) +
           p.mu * detail_zb::disc_integral(p, w.zone2_start, w.end) +
           detail_zb::wait_value(p, w.end, 0.0);
}

inline PiecewiseStrategy strategy_unrestricted(const ProblemZB& p, double t,
                                               double x) {
    detail_zb::check_state(p, t, x);
    PiecewiseStrategy st;
    st.start = t;
    st.end = p.T;
    if (t == p.T) {
        if (x > 0.0) st.lumps.push_back({p.T, x});
        return st;
    }
    const detail_zb::Window w = detail_zb::pay_window(p);
    const auto terminal = [&](double amount) {
        if (amount > 0.0) st.lumps.push_back({p.T, amount});
    };
    if (w.empty || t >= w.end) {
        st.segments.push_back({t, p.T, 0.0});
        terminal(x + p.mu * (p.T - t));
        normalize(st);
        return st;
    }
    if (!w.has_rise || t >= w.zone2_start) {
        if (x > 0.0) st.lumps.push_back({t, x});
        st.segments.push_back({t, w.end, p.mu});
    } else {
        st.segments.push_back({t, w.zone2_start, 0.0});
        st.lumps.push_back({w.zone2_start, x + p.mu * (w.zone2_start - t)});
        st.segments.push_back({w.zone2_start, w.end, p.mu});
    }
    if (w.end < p.T) st.segments.push_back({w.end, p.T, 0.0});
    terminal(p.mu * (p.T - w.end));
    normalize(st);
    return st;
}

// --- dispatch on the cap ---

inline double value_zb(const ProblemZB& p, double t, double x) {
    if (p.unrestricted()) return value_unrestricted(p, t, x);
    if (p.xi <= p.mu) return value_small_xi(p, t, x);
    return value_large_xi(p, t, x);
}

inline PiecewiseStrategy strategy_zb(const ProblemZB& p, double t, double x) {
    if (p.unrestricted()) return strategy_unrestricted(p, t, x);
    if (p.xi <= p.mu) return strategy_small_xi(p, t, x);
    return strategy_large_xi(p, t, x);
}

// Deterministic return of a plan under the expected-discount curve:
// integral of rate * exp(f) plus lumps at exp(f), remainder at exp(f(T)).
inline double strategy_return(const ProblemZB& p, const PiecewiseStrategy& st,
                              double x0) {
    double total = 0.0, x = x0;
    for (const auto& s : st.segments) {
        total += s.rate * detail_zb::disc_integral(p, s.t_begin, s.t_end);
        x += (p.mu - s.rate) * (s.t_end - s.t_begin);
    }
    for (const auto& l : st.lumps) {
        total += l.amount * bond_price(p.d, p.report.r, l.time);
        x -= l.amount;
    }
    return total + x * std::exp(p.report.fT);
}

// Pointwise equation error of the glued value function, finite differences.
// For a finite cap: V_t + mu V_x + xi max(exp(f(t)) - V_x, 0); without a
// cap the variational form max(V_t + mu V_x, exp(f(t)) - V_x). Zero at
// points interior to a smooth piece.
inline double hjb_residual_zb(const ProblemZB& p, double t, double x,
                              double h = 1e-4) {
    detail_zb::check_state(p, t, x);
    const auto V = [&](double tt, double xx) { return value_zb(p, tt, xx); };
    double Vt;
    if (t >= h && t + h <= p.T)
        Vt = (V(t + h, x) - V(t - h, x)) / (2.0 * h);
    else if (t < h)
        Vt = (-3.0 * V(t, x) + 4.0 * V(t + h, x) - V(t + 2.0 * h, x)) / (2.0 * h);
    else
        Vt = (3.0 * V(t, x) - 4.0 * V(t - h, x) + V(t - 2.0 * h, x)) / (2.0 * h);
    double Vx;
    if (x >= h)
        Vx = (V(t, x + h) - V(t, x - h)) / (2.0 * h);
    else
        Vx = (-3.0 * V(t, x) + 4.0 * V(t, x + h) - V(t, x + 2.0 * h)) / (2.0 * h);
    const double eft = bond_price(p.d, p.report.r, t);
    if (p.unrestricted()) return std::max(Vt + p.mu * Vx, eft - Vx);
    return Vt + p.mu * Vx + p.xi * std::max(eft - Vx, 0.0);
}

}  // namespace odc
