#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <odc/vasicek.hpp>

using namespace odc;

namespace {
const DerivedParams kRef{1.0, 1.0, -0.1, -0.2};  // worked-example rate model
const DerivedParams kAlt{2.0, 0.5, 0.3, 0.7};
}  // namespace

TEST_CASE("shifted parameters follow from the natural ones") {
    const DerivedParams d = reparameterize(VasicekParams{1.0, 0.8, 0.8, 0.0});
    CHECK(d.sigma == Catch::Approx(0.565685424949238).epsilon(1e-14));
    CHECK(d.b == Catch::Approx(0.48).epsilon(1e-14));
    CHECK(d.a == 1.0);
    CHECK(d.r0 == 0.0);
    // accessors invert the shift exactly
    CHECK(d.sigma_tilde() == Catch::Approx(0.8).epsilon(1e-14));
    CHECK(d.b_tilde() == Catch::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("round trip through both parameterizations") {
    const VasicekParams p{1.7, 0.35, -0.25, 0.6};
    const DerivedParams d = reparameterize(p);
    CHECK(d.sigma_tilde() == Catch::Approx(p.sigma_tilde).epsilon(1e-14));
    CHECK(d.b_tilde() == Catch::Approx(p.b_tilde).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(reparameterize(VasicekParams{0.0, 1.0, 0.0, 0.0}),
                    parameter_error);
    CHECK_THROWS_AS(reparameterize(VasicekParams{1.0, -1.0, 0.0, 0.0}),
                    parameter_error);
    CHECK_THROWS_AS(reparameterize(VasicekParams{1.0, 1.0,
                                                 std::nan(""), 0.0}),
                    parameter_error);
    CHECK_THROWS_AS(validate(DerivedParams{1.0, 0.0, 0.0, 0.0}),
                    parameter_error);
    CHECK_NOTHROW(validate(kRef));
}

TEST_CASE("log discount curve reproduces pinned values") {
    CHECK(log_discount(kRef, -0.2, 4.0) ==
          Catch::Approx(0.016316343685909506).epsilon(1e-13));
    CHECK(log_discount(kRef, -0.2, 0.261161912149688042) ==
          Catch::Approx(0.022686486557207900).epsilon(1e-13));
    CHECK(log_discount(kRef, -0.2, 2.041423180844357642) ==
          Catch::Approx(-0.087427977257803331).epsilon(1e-13));
    CHECK(log_discount(kAlt, 0.7, 1.3) ==
          Catch::Approx(-0.601925578356886131).epsilon(1e-13));
}

TEST_CASE("discount curve starts at par") {
    for (double r : {-1.0, 0.0, 0.7}) {
        CHECK(log_discount(kRef, r, 0.0) == 0.0);
        CHECK(bond_price(kRef, r, 0.0) == 1.0);
    }
    CHECK_THROWS_AS(log_discount(kRef, 0.0, -1e-9), domain_error);
}

TEST_CASE("time derivative of the curve") {
    // starts at minus the current rate
    for (double r : {-0.5, 0.0, 1.2})
        CHECK(f_time_derivative(kRef, r, 0.0) == Catch::Approx(-r).margin(1e-15));
    // matches a central difference away from zero
    for (const DerivedParams& d : {kRef, kAlt})
        for (double r : {-0.4, 0.9})
            for (double s : {0.3, 1.7, 6.0}) {
                const double h = 1e-6;
                const double fd = (log_discount(d, r, s + h) -
                                   log_discount(d, r, s - h)) /
                                  (2.0 * h);
                CHECK(f_time_derivative(d, r, s) ==
                      Catch::Approx(fd).margin(1e-8));
            }
}

TEST_CASE("pinned conditional discount factor") {
    CHECK(conditional_bond_price(kAlt, 0.7, 2.0, 0.4) ==
          Catch::Approx(0.431276055022152946).epsilon(1e-13));
}

TEST_CASE("conditional discount properties") {
    // symmetric in the two endpoint rates
    CHECK(conditional_bond_price(kRef, -0.3, 1.5, 0.8) ==
          Catch::Approx(conditional_bond_price(kRef, 0.8, 1.5, -0.3))
              .epsilon(1e-15));
    // unit value over a zero horizon
    CHECK(conditional_bond_price(kRef, 0.4, 0.0, -0.9) == 1.0);
    // dominated by exp(-b s) when both endpoints sit above b
    const DerivedParams d = reparameterize(VasicekParams{1.0, 0.8, 0.8, 0.0});
    for (double s : {0.5, 2.0, 10.0})
        CHECK(conditional_bond_price(d, 0.9, s, 1.4) <=
              std::exp(-d.b * s) + 1e-15);
}
