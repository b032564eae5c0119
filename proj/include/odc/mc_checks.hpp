#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "odc/gbm.hpp"
#include "odc/monte_carlo.hpp"
#include "odc/ou_solver.hpp"
#include "odc/vasicek.hpp"
#include "odc/zero_bond.hpp"

namespace odc {

struct McCrossCheck {
    std::string name;
    double closed_form = 0.0;
    McEstimate estimate;
    double z_score = 0.0;  // (estimate - closed form) / standard error
    double tolerance = 0.0;
    bool pass = false;
};

namespace detail_mc_suite {

inline McCrossCheck judge(std::string name, double closed_form,
                          const McEstimate& e) {
    McCrossCheck c;
    c.name = std::move(name);
    c.closed_form = closed_form;
    c.estimate = e;
    c.z_score = e.std_error > 0.0
                    ? (e.mean - closed_form) / e.std_error
                    : (e.mean == closed_form ? 0.0 : 1e300);
    c.tolerance = 4.0 * e.std_error + e.tail_bound;
    c.pass = std::abs(e.mean - closed_form) <= c.tolerance;
    return c;
}

}  // namespace detail_mc_suite

// Cross-validation of every closed form against simulation: bond prices
// under the mean-reverting rate, the lognormal discount, and full strategy
// evaluations in all three model families. Fixed seeds, serial order,
// bit-stable results.
inline std::vector<McCrossCheck> run_mc_cross_checks(std::uint64_t seed,
                                                     std::int64_t n_paths) {
    using detail_mc_suite::judge;
    std::vector<McCrossCheck> out;

    // 1) bond price, fast mean reversion
    {
        DerivedParams d{1.0, 0.8 / std::sqrt(2.0), 0.8 - 0.32, 0.05};
        McConfig cfg{seed, n_paths, 0.01, 0.0, true};
        out.push_back(judge("bond-price a=1", bond_price(d, d.r0, 2.0),
                            estimate_bond_price(d, d.r0, 2.0, cfg)));
    }
    // 2) bond price, stiffer reversion and a high starting rate
    {
        DerivedParams d{2.0, 0.5, 0.3, 0.7};
        McConfig cfg{seed + 1, n_paths, 0.01, 0.0, true};
        out.push_back(judge("bond-price a=2", bond_price(d, d.r0, 1.3),
                            estimate_bond_price(d, d.r0, 1.3, cfg)));
    }
    // 3) lognormal discount factor
    {
        GbmParams p{0.6, 0.4, 0.5, 1.0, 3.0};
        McConfig cfg{seed + 2, n_paths, 0.01, 0.0, true};
        out.push_back(judge("gbm discount", expected_discount_gbm(p, 2.5),
                            estimate_discount_gbm(p, 2.5, cfg)));
    }
    // 4) finite-horizon strategy, cap above income
    {
        DerivedParams d{1.0, 1.0, -0.1, -0.2};
        ProblemZB p = make_problem_zb(d, 2.0, 4.0, 4.0);
        const double t = 0.15, x = 0.05;
        McConfig cfg{seed + 3, n_paths, 0.005, 4.0, true};
        out.push_back(judge("finite-horizon strategy xi>mu",
                            value_zb(p, t, x),
                            evaluate_policy(OuModel{d, true}, p.mu,
                                            strategy_zb(p, t, x), x, cfg)));
    }
    // 5) finite-horizon strategy, cap below income
    {
        DerivedParams d{1.0, 1.0, -0.1, -0.2};
        ProblemZB p = make_problem_zb(d, 2.0, 1.5, 4.0);
        const double t = 0.0, x = 0.4;
        McConfig cfg{seed + 4, n_paths, 0.005, 4.0, true};
        out.push_back(judge("finite-horizon strategy xi<=mu",
                            value_zb(p, t, x),
                            evaluate_policy(OuModel{d, true}, p.mu,
                                            strategy_zb(p, t, x), x, cfg)));
    }
    // 6) drifting-rate exhaust-then-income strategy
    {
        GbmParams p{0.6, 0.4, 0.5, 1.0, 3.0};
        const double x = 1.7;
        McConfig cfg{seed + 5, n_paths, 0.01, 25.0, true};
        out.push_back(judge("gbm strategy xi>mu", value_gbm_large_xi(p, x),
                            evaluate_policy(GbmModel{p}, p.mu,
                                            strategy_gbm(p, x), x, cfg)));
    }
    // 7) mean-reverting exhaust-then-income strategy, infinite horizon
    {
        DerivedParams d{1.0, 0.8 / std::sqrt(2.0), 0.8 - 0.32, 0.0};
        ProblemOU p = make_problem_ou(d, 1.0, 2.0);
        const double x = 2.0;
        PiecewiseStrategy st;
        st.start = 0.0;
        st.end = std::numeric_limits<double>::infinity();
        const double tau = x / (p.xi - p.mu);
        st.segments = {{0.0, tau, p.xi},
                       {tau, std::numeric_limits<double>::infinity(), p.mu}};
        McConfig cfg{seed + 6, n_paths, 0.01, 22.0, true};
        out.push_back(judge("mean-reverting strategy xi>mu",
                            analytic_value_hat_ou(p, d.r0, x),
                            evaluate_policy(OuModel{d, false}, p.mu, st, x, cfg)));
    }
    return out;
}

}  // namespace odc
