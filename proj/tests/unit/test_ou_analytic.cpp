#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "odc/ou_solver.hpp"
#include "odc/vasicek.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// reference mean-reverting rate model used across these tests
odc::DerivedParams ref_derived() {
    return odc::reparameterize(odc::VasicekParams{1.0, 0.8, 0.8, 0.0});
}

odc::ProblemOU ref_problem() {
    return odc::make_problem_ou(ref_derived(), 1.0, 2.0);
}

}  // namespace

TEST_CASE("ou problem validation", "[ou][analytic]") {
    REQUIRE_NOTHROW(odc::validate(ref_problem()));
    REQUIRE(ref_derived().b == Catch::Approx(0.48).margin(1e-15));

    SECTION("decay rate must be positive for finite values") {
        // b_tilde small enough that b = b_tilde - sigma_tilde^2/(2a^2) < 0
        const auto d = odc::reparameterize(odc::VasicekParams{1.0, 0.8, 0.1, 0.0});
        REQUIRE(d.b < 0.0);
        REQUIRE_THROWS_AS(odc::make_problem_ou(d, 1.0, 2.0), odc::parameter_error);
        REQUIRE_THROWS_AS(odc::perpetuity_price(d, 0.0), odc::domain_error);
        REQUIRE_THROWS_AS(odc::annuity_price(d, 0.0, 1.0), odc::domain_error);
    }
    SECTION("income and cap must be positive and finite") {
        const auto d = ref_derived();
        REQUIRE_THROWS_AS(odc::make_problem_ou(d, 0.0, 2.0), odc::parameter_error);
        REQUIRE_THROWS_AS(odc::make_problem_ou(d, 1.0, 0.0), odc::parameter_error);
        REQUIRE_THROWS_AS(
            odc::make_problem_ou(d, 1.0, std::numeric_limits<double>::infinity()),
            odc::parameter_error);
    }
}

TEST_CASE("perpetuity and annuity prices", "[ou][analytic]") {
    const auto d = ref_derived();

    SECTION("pinned cap-forever values") {
        // xi * perpetuity with xi = 2 (income set equal to the cap so the
        // capped-forever reduction applies)
        const auto p2 = odc::make_problem_ou(d, 2.0, 2.0);
        REQUIRE_THAT(odc::analytic_value_small_xi_ou(p2, -1.0),
                     WithinRel(11.09635461233711, 1e-9));
        REQUIRE_THAT(odc::analytic_value_small_xi_ou(p2, 0.0),
                     WithinRel(5.301989206458941, 1e-9));
        REQUIRE_THAT(odc::analytic_value_small_xi_ou(p2, 0.48),
                     WithinRel(3.824795517780580, 1e-9));
        REQUIRE_THAT(odc::analytic_value_small_xi_ou(p2, 1.5),
                     WithinRel(2.051540828256215, 1e-9));
        REQUIRE_THAT(odc::analytic_value_small_xi_ou(p2, 3.0),
                     WithinRel(0.992700154438859, 1e-9));
        // the reduction demands cap <= income
        REQUIRE_THROWS_AS(odc::analytic_value_small_xi_ou(ref_problem(), 0.0),
                          odc::parameter_error);
    }
    SECTION("perpetuity is positive and strictly decreasing in the rate") {
        double prev = std::numeric_limits<double>::infinity();
        for (double r : {-2.0, -1.0, 0.0, 0.48, 1.0, 2.0, 4.0}) {
            const double v = odc::perpetuity_price(d, r);
            REQUIRE(v > 0.0);
            REQUIRE(v < prev);
            prev = v;
        }
    }
    SECTION("annuity limits") {
        REQUIRE(odc::annuity_price(d, 0.3, 0.0) == 0.0);
        REQUIRE_THROWS_AS(odc::annuity_price(d, 0.3, -1.0), odc::domain_error);
        // increasing in the horizon, converging to the perpetuity
        double prev = 0.0;
        for (double t : {0.5, 1.0, 2.0, 5.0, 20.0}) {
            const double v = odc::annuity_price(d, 0.3, t);
            REQUIRE(v > prev);
            prev = v;
        }
        REQUIRE_THAT(odc::annuity_price(d, 0.3, 400.0),
                     WithinRel(odc::perpetuity_price(d, 0.3), 1e-9));
    }
    SECTION("perpetuity solves its pricing equation") {
        // 0.5 sigma_tilde^2 P'' + a (b_tilde - r) P' - r P + 1 = 0,
        // checked with central differences on a tightened quadrature
        const double st = d.sigma_tilde(), bt = d.b_tilde();
        const double h = 1e-3;
        for (double r : {-0.8, 0.0, 0.48, 1.3, 2.6}) {
            const double pm = odc::perpetuity_price(d, r - h, 1e-13);
            const double p0 = odc::perpetuity_price(d, r, 1e-13);
            const double pp = odc::perpetuity_price(d, r + h, 1e-13);
            const double d1 = (pp - pm) / (2.0 * h);
            const double d2 = (pp - 2.0 * p0 + pm) / (h * h);
            const double res = 0.5 * st * st * d2 + d.a * (bt - r) * d1 - r * p0 + 1.0;
            INFO("r = " << r);
            REQUIRE_THAT(res, WithinAbs(0.0, 1e-5));
        }
    }
    SECTION("annuity solves its pricing equation") {
        // same operator with source 1 - bond(r, t_up)
        const double st = d.sigma_tilde(), bt = d.b_tilde();
        const double h = 1e-3, r = 0.2, t_up = 1.7;
        const double am = odc::annuity_price(d, r - h, t_up, 1e-13);
        const double a0 = odc::annuity_price(d, r, t_up, 1e-13);
        const double ap = odc::annuity_price(d, r + h, t_up, 1e-13);
        const double d1 = (ap - am) / (2.0 * h);
        const double d2 = (ap - 2.0 * a0 + am) / (h * h);
        const double res = 0.5 * st * st * d2 + d.a * (bt - r) * d1 - r * a0 +
                           1.0 - odc::bond_price(d, r, t_up);
        REQUIRE_THAT(res, WithinAbs(0.0, 1e-5));
    }
}

TEST_CASE("exhaust-then-income closed form", "[ou][analytic]") {
    const auto p = ref_problem();

    SECTION("pinned values") {
        REQUIRE_THAT(odc::analytic_value_hat_ou(p, 0.0, 2.0),
                     WithinRel(4.211741510571506, 1e-9));
        REQUIRE_THAT(odc::analytic_value_hat_ou(p, -0.5, 1.0),
                     WithinRel(4.899287849090397, 1e-9));
        REQUIRE_THAT(odc::analytic_value_hat_ou(p, 1.0, 4.0),
                     WithinRel(2.593582449882664, 1e-9));
    }
    SECTION("domain checks") {
        const auto p_small = odc::make_problem_ou(ref_derived(), 2.0, 1.5);
        REQUIRE_THROWS_AS(odc::analytic_value_hat_ou(p_small, 0.0, 1.0),
                          odc::parameter_error);
        REQUIRE_THROWS_AS(odc::analytic_value_hat_ou(p, 0.0, -0.1),
                          odc::domain_error);
    }
    SECTION("limits in the surplus") {
        const double r = 0.3;
        const double perp = odc::perpetuity_price(p.d, r);
        // no surplus: income passed through as it arrives
        REQUIRE_THAT(odc::analytic_value_hat_ou(p, r, 0.0),
                     WithinRel(p.mu * perp, 1e-11));
        // huge surplus: the cap runs forever
        REQUIRE_THAT(odc::analytic_value_hat_ou(p, r, 1e4),
                     WithinRel(p.xi * perp, 1e-9));
        // strictly increasing in between
        double prev = 0.0;
        for (double x : {0.0, 0.3, 1.0, 2.5, 6.0}) {
            const double v = odc::analytic_value_hat_ou(p, r, x);
            REQUIRE(v > prev - 1e-15);
            prev = v;
        }
    }
    SECTION("candidate value agrees with the closed forms on both sides") {
        REQUIRE_THAT(odc::candidate_value_ou(p, 0.7, 1.3),
                     WithinRel(odc::analytic_value_hat_ou(p, 0.7, 1.3), 1e-12));
        const auto p_small = odc::make_problem_ou(ref_derived(), 2.0, 1.5);
        REQUIRE_THAT(odc::candidate_value_ou(p_small, 0.7, 1.3),
                     WithinRel(odc::analytic_value_small_xi_ou(p_small, 0.7), 1e-12));
        // pinned spot checks
        REQUIRE_THAT(odc::candidate_value_ou(p, 3.80705627484771, 0.25),
                     WithinRel(0.53220522606915512, 1e-9));
        REQUIRE_THAT(odc::candidate_value_ou(p, 2.2546, 0.5),
                     WithinRel(1.0049362126177635, 1e-9));
        REQUIRE_THAT(odc::candidate_value_ou(p, 0.48, 1.0),
                     WithinRel(2.6877907803299919, 1e-9));
    }
}

TEST_CASE("par-bond rate curve and its inverse", "[ou][analytic]") {
    const auto d = ref_derived();

    SECTION("pinned values") {
        REQUIRE_THAT(odc::par_bond_rate(d, 0.5),
                     WithinRel(-0.192913674254810, 1e-12));
        REQUIRE_THAT(odc::par_bond_rate(d, 1.0),
                     WithinRel(-0.380488108709846, 1e-12));
        REQUIRE_THAT(odc::par_bond_rate(d, 2.0),
                     WithinRel(-0.768603291721821, 1e-12));
        REQUIRE_THAT(odc::par_bond_rate(d, 5.0),
                     WithinRel(-2.095202700255276, 1e-12));
        REQUIRE_THAT(odc::par_bond_maturity(d, -0.3),
                     WithinRel(0.785479683331951, 1e-10));
    }
    SECTION("the curve is negative and strictly decreasing") {
        double prev = 0.0;
        for (int k = 0; k < 60; ++k) {
            const double s = 1e-3 * std::pow(10.0, k / 10.0);
            const double r = odc::par_bond_rate(d, s);
            REQUIRE(r < 0.0);
            REQUIRE(r < prev);
            prev = r;
        }
    }
    SECTION("defining property: the bond at the par rate prices at one") {
        // 100 log-spaced maturities spanning short to very long
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double s = 1e-3 * std::pow(10.0, 6.0 * k / 99.0);
            const double r = odc::par_bond_rate(d, s);
            worst = std::max(worst, std::abs(odc::log_discount(d, r, s)));
        }
        INFO("worst |f(par_rate(s), s)| = " << worst);
        REQUIRE(worst < 1e-10);
    }
    SECTION("series branch joins the closed form continuously") {
        const double s0 = 1e-4;  // the switch point in a*s
        const double lo = odc::par_bond_rate(d, s0 * (1.0 - 1e-6));
        const double hi = odc::par_bond_rate(d, s0 * (1.0 + 1e-6));
        REQUIRE_THAT(lo, WithinAbs(hi, 1e-9));
    }
    SECTION("round trips") {
        for (double s : {0.01, 0.25, 1.0, 3.0, 40.0}) {
            const double r = odc::par_bond_rate(d, s);
            REQUIRE_THAT(odc::par_bond_maturity(d, r), WithinRel(s, 1e-8));
        }
        for (double r : {-0.05, -0.3, -1.0, -5.0}) {
            const double s = odc::par_bond_maturity(d, r);
            REQUIRE_THAT(odc::par_bond_rate(d, s), WithinRel(r, 1e-10));
        }
    }
    SECTION("domain errors") {
        REQUIRE_THROWS_AS(odc::par_bond_rate(d, 0.0), odc::domain_error);
        REQUIRE_THROWS_AS(odc::par_bond_rate(d, -1.0), odc::domain_error);
        REQUIRE_THROWS_AS(odc::par_bond_maturity(d, 0.0), odc::domain_error);
        REQUIRE_THROWS_AS(odc::par_bond_maturity(d, 0.2), odc::domain_error);
        REQUIRE_THROWS_AS(
            odc::par_bond_maturity(d, -std::numeric_limits<double>::infinity()),
            odc::domain_error);
    }
}

TEST_CASE("closed-form value sandwich", "[ou][analytic]") {
    const auto p = ref_problem();

    SECTION("lower bound never exceeds the upper bound when the cap binds") {
        for (double r : {-1.0, 0.0, 0.48, 1.5, 3.0})
            for (double x : {0.0, 0.5, 1.0, 2.0, 5.0}) {
                const auto vb = odc::value_bounds_ou(p, r, x);
                INFO("r = " << r << ", x = " << x);
                REQUIRE(vb.lower <= vb.upper + 1e-12);
                REQUIRE(vb.lower > 0.0);
            }
    }
    SECTION("lower bound grows with the surplus, upper bound ignores it") {
        const double r = 0.2;
        double prev = 0.0;
        for (double x : {0.0, 0.5, 1.0, 2.0, 5.0}) {
            const auto vb = odc::value_bounds_ou(p, r, x);
            REQUIRE(vb.lower > prev - 1e-15);
            prev = vb.lower;
            REQUIRE_THAT(vb.upper, WithinRel(odc::value_bounds_ou(p, r, 0.0).upper,
                                             1e-14));
        }
        // at zero surplus the lower bound is the income perpetuity
        REQUIRE_THAT(odc::value_bounds_ou(p, r, 0.0).lower,
                     WithinRel(p.mu * odc::perpetuity_price(p.d, r), 1e-11));
    }
    SECTION("bad states throw") {
        REQUIRE_THROWS_AS(odc::value_bounds_ou(p, 0.0, -1.0), odc::domain_error);
        REQUIRE_THROWS_AS(
            odc::value_bounds_ou(p, std::nan(""), 1.0), odc::domain_error);
    }
}
