#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "odc/errors.hpp"
#include "odc/roots.hpp"
#include "odc/vasicek.hpp"

namespace odc {

// Shape of s -> f(r, s) on [0, T], read off the roots of its derivative.
enum class Scenario { Dec, Inc, DecInc, IncDec, IncDecInc };

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::Dec: return "Dec";
        case Scenario::Inc: return "Inc";
        case Scenario::DecInc: return "DecInc";
        case Scenario::IncDec: return "IncDec";
        case Scenario::IncDecInc: return "IncDecInc";
    }
    return "?";
}

// Roots of q(u) = (sigma^2/a) u^2 - (r - b + sigma^2/a) u - b, the time
// derivative of f after substituting u = exp(-a s). Solved with the stable
// quadratic formula (no cancellation between -B and sqrt(D)).
struct QuadraticRoots {
    double discriminant = 0.0;
    std::optional<double> u1, u2;  // u1 <= u2 when real and distinct
};

inline QuadraticRoots quadratic_roots(const DerivedParams& d, double r) {
    const double A = d.sigma * d.sigma / d.a;
    const double B = r - d.b + A;  // q(u) = A u^2 - B u - b
    const double C = -d.b;
    QuadraticRoots out;
    out.discriminant = B * B - 4.0 * A * C;
    if (out.discriminant <= 0.0) return out;  // no sign change of f'
    const double sq = std::sqrt(out.discriminant);
    const double q = 0.5 * (B + (B >= 0.0 ? sq : -sq));
    const double ra = q / A;
    const double rb = (q != 0.0) ? C / q : 0.0;
    out.u1 = std::min(ra, rb);
    out.u2 = std::max(ra, rb);
    return out;
}

// Monotonicity pattern of f on [0, T] plus the distinguished times:
//   w1 interior local max, w2 interior local min,
//   t1 first crossing of the level f(T) on the increasing branch [0, w1],
//   t2 crossing of the level f(T) on the decreasing branch.
// Critical points landing exactly on 0 or T count as absent; so does the
// degenerate t2 = T of the IncDec shape.
struct ScenarioReport {
    Scenario scenario = Scenario::Inc;
    double r = 0.0;
    double T = 0.0;
    double f0 = 0.0;  // f(r, 0), identically zero
    double fT = 0.0;
    std::optional<double> w1, w2;
    std::optional<double> t1, t2;
    std::optional<double> f_w1, f_w2;
};

inline ScenarioReport classify(const DerivedParams& d, double r, double T) {
    if (!(T > 0.0) || !std::isfinite(T))
        throw parameter_error("classify: T must be a positive finite number");
    ScenarioReport rep;
    rep.r = r;
    rep.T = T;
    rep.f0 = 0.0;
    rep.fT = log_discount(d, r, T);

    const double uT = std::exp(-d.a * T);
    const QuadraticRoots roots = quadratic_roots(d, r);
    const auto interior = [&](double u) { return u > uT && u < 1.0; };

    if (!roots.u1.has_value()) {
        rep.scenario = Scenario::Inc;  // f' has one sign; A > 0 makes it +
        return rep;
    }
    const double u1 = *roots.u1, u2 = *roots.u2;
    const bool in1 = interior(u1), in2 = interior(u2);
    if (in1 && in2) {
        rep.scenario = Scenario::IncDecInc;
        rep.w1 = -std::log(u2) / d.a;
        rep.w2 = -std::log(u1) / d.a;
    } else if (in2) {
        rep.scenario = Scenario::IncDec;
        rep.w1 = -std::log(u2) / d.a;
    } else if (in1) {
        rep.scenario = Scenario::DecInc;
        rep.w2 = -std::log(u1) / d.a;
    } else {
        // no interior critical point: sign of f' at the midpoint decides
        const double um = 0.5 * (uT + 1.0);
        const double A = d.sigma * d.sigma / d.a;
        const double q = A * um * um - (r - d.b + A) * um - d.b;
        rep.scenario = (q >= 0.0) ? Scenario::Inc : Scenario::Dec;
        return rep;
    }

    if (rep.w1) rep.f_w1 = log_discount(d, r, *rep.w1);
    if (rep.w2) rep.f_w2 = log_discount(d, r, *rep.w2);

    const auto cross = [&](double lo, double hi) {
        return bisect([&](double s) { return log_discount(d, r, s) - rep.fT; }, lo,
                      hi);
    };

    // t1: level f(T) on the rising branch ending at w1, interior only
    if (rep.w1 && rep.f0 < rep.fT && rep.fT < *rep.f_w1) rep.t1 = cross(0.0, *rep.w1);

    // t2: level f(T) on the falling branch
    if (rep.scenario == Scenario::IncDecInc) {
        if (rep.fT <= *rep.f_w1) {
            if (rep.fT == *rep.f_w1)
                rep.t2 = *rep.w1;
            else if (rep.fT <= *rep.f_w2)
                rep.t2 = *rep.w2;
            else
                rep.t2 = cross(*rep.w1, *rep.w2);
        }
    } else if (rep.scenario == Scenario::DecInc) {
        if (*rep.f_w2 <= rep.fT && rep.fT <= rep.f0)
            rep.t2 = (rep.fT == rep.f0) ? 0.0 : cross(0.0, *rep.w2);
    }
    // IncDec: the falling branch meets the level exactly at T; kept absent.
    return rep;
}

// Inverse of f along one monotone branch. h1 is the initial rising branch,
// h2 the falling branch, h3 the final rising branch; which of them exist
// depends on the scenario.
enum class Branch { h1, h2, h3 };

inline double invert_f(const DerivedParams& d, double r, Branch branch,
                       double level, const ScenarioReport& rep) {
    double lo = 0.0, hi = rep.T;
    switch (rep.scenario) {
        case Scenario::Inc:
            if (branch != Branch::h1)
                throw domain_error("invert_f: branch not present in scenario Inc");
            break;
        case Scenario::Dec:
            if (branch != Branch::h2)
                throw domain_error("invert_f: branch not present in scenario Dec");
            break;
        case Scenario::DecInc:
            if (branch == Branch::h2)
                hi = *rep.w2;
            else if (branch == Branch::h3)
                lo = *rep.w2;
            else
                throw domain_error("invert_f: branch not present in scenario DecInc");
            break;
        case Scenario::IncDec:
            if (branch == Branch::h1)
                hi = *rep.w1;
            else if (branch == Branch::h2)
                lo = *rep.w1;
            else
                throw domain_error("invert_f: branch not present in scenario IncDec");
            break;
        case Scenario::IncDecInc:
            if (branch == Branch::h1) {
                hi = *rep.w1;
            } else if (branch == Branch::h2) {
                lo = *rep.w1;
                hi = *rep.w2;
            } else {
                lo = *rep.w2;
            }
            break;
    }

    double f_lo = log_discount(d, r, lo);
    double f_hi = log_discount(d, r, hi);
    const double fmin = std::min(f_lo, f_hi), fmax = std::max(f_lo, f_hi);
    const double slack = 1e-9 * std::max(1.0, std::abs(fmax));
    if (level < fmin - slack || level > fmax + slack)
        throw domain_error("invert_f: level outside the branch image");
    const double clamped = std::min(std::max(level, fmin), fmax);
    if (clamped == f_lo) return lo;
    if (clamped == f_hi) return hi;
    return bisect([&](double s) { return log_discount(d, r, s) - clamped; }, lo, hi);
}

}  // namespace odc
