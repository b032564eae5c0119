#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "odc/vasicek.hpp"
#include "odc/zero_bond.hpp"
#include "support/dp_oracle.hpp"

namespace {

// worked-example market: a = 1, sigma = 1 (derived), b = -0.1, r = -0.2
odc::DerivedParams example_derived() {
    odc::DerivedParams d;
    d.a = 1.0;
    d.sigma = 1.0;
    d.b = -0.1;
    d.r0 = -0.2;
    return d;
}

// sample times chosen on the dt = 1e-3 step grid, straddling the payout
// window edges near 0.113, 0.261 and 0.439
const std::vector<double> kTimes = {0.0,  0.05, 0.1, 0.113, 0.15, 0.2, 0.26,
                                    0.3,  0.35, 0.4, 0.44,  0.5,  0.7, 1.0,
                                    1.5,  2.0,  2.5, 3.0,   3.5,  3.9};

// surplus samples on the dx = 2e-3 node grid (also 5e-4-aligned)
const std::vector<double> kSurplus = {0.0, 0.01, 0.05, 0.1,  0.2,  0.35, 0.5,
                                      0.65, 0.8, 1.0,  1.2,  1.4,  1.6,  1.8,
                                      2.0, 2.25, 2.5,  2.75, 2.9,  3.0};

struct RegimeResult {
    double worst_abs = 0.0;
    double worst_signed_low = 0.0;  // most the oracle fell below the closed form
    double worst_signed_high = 0.0; // most the oracle exceeded the closed form
};

RegimeResult run_regime(double xi, double dx) {
    const auto p = odc::make_problem_zb(example_derived(), 2.0, xi, 4.0);
    const odc_test::DpOracle oracle(p, 1e-3, dx, 12.0, kTimes);
    RegimeResult res;
    for (double t : kTimes)
        for (double x : kSurplus) {
            const double dp = oracle.value(t, x);
            const double cf = odc::value_zb(p, t, x);
            const double gap = dp - cf;
            res.worst_abs = std::max(res.worst_abs, std::abs(gap));
            res.worst_signed_low = std::min(res.worst_signed_low, gap);
            res.worst_signed_high = std::max(res.worst_signed_high, gap);
        }
    return res;
}

}  // namespace

TEST_CASE("closed-form payout values match backward induction", "[slow][dp]") {
    SECTION("cap above income (xi = 4)") {
        const auto r = run_regime(4.0, 2e-3);
        INFO("worst |gap| = " << r.worst_abs);
        CHECK(r.worst_abs < 5e-3);
        // every oracle plan is admissible, so it can only undershoot
        CHECK(r.worst_signed_high < 1e-9);
    }
    SECTION("cap below income (xi = 1.5)") {
        const auto r = run_regime(1.5, 5e-4);
        INFO("worst |gap| = " << r.worst_abs);
        CHECK(r.worst_abs < 5e-3);
        CHECK(r.worst_signed_high < 1e-9);
    }
    SECTION("no cap") {
        const auto r = run_regime(std::numeric_limits<double>::infinity(), 2e-3);
        INFO("worst |gap| = " << r.worst_abs);
        CHECK(r.worst_abs < 5e-3);
        CHECK(r.worst_signed_high < 1e-9);
    }
}
