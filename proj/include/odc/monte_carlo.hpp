#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "odc/errors.hpp"
#include "odc/gbm.hpp"
#include "odc/strategy.hpp"
#include "odc/vasicek.hpp"

namespace odc {

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// xoshiro256** whose state is derived from (seed, path) alone, so path i is
// the same stream no matter how the paths are scheduled.
struct PathRng {
    std::uint64_t s[4];
    bool has_cached = false;
    double cached = 0.0;

    PathRng(std::uint64_t seed, std::uint64_t path) {
        std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (path + 1));
        for (auto& w : s) w = splitmix64(z);
        if (!(s[0] | s[1] | s[2] | s[3])) s[0] = 1;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    double uniform() {  // (0, 1]
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {  // Box-Muller, pair cached
        if (has_cached) {
            has_cached = false;
            return cached;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        cached = rad * std::sin(ang);
        has_cached = true;
        return rad * std::cos(ang);
    }
};

}  // namespace rng

struct McConfig {
    std::uint64_t seed = 0;
    std::int64_t n_paths = 100000;
    double dt = 0.01;
    double horizon = 0.0;  // truncation horizon for open-ended plans
    bool antithetic = true;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    double tail_bound = 0.0;       // mass beyond the truncation horizon
    std::int64_t clipped_steps = 0;    // partial steps at the empty-surplus barrier
    std::int64_t violation_steps = 0;  // demanded more than the income at x = 0
    std::int64_t total_steps = 0;
};

// one exact transition of the mean-reverting rate over dt, z ~ N(0,1)
inline double simulate_ou_step(const DerivedParams& d, double r, double dt,
                               double z) {
    if (dt < 0.0) throw domain_error("simulate_ou_step: dt must be nonnegative");
    const double decay = std::exp(-d.a * dt);
    const double st = d.sigma_tilde();
    const double sd = st * std::sqrt(-std::expm1(-2.0 * d.a * dt) / (2.0 * d.a));
    return r * decay + d.b_tilde() * (1.0 - decay) + sd * z;
}

namespace detail_mc {

struct OuStepCoef {
    double decay, mean_add, sd;
};

inline OuStepCoef ou_coef(const DerivedParams& d, double dt) {
    const double decay = std::exp(-d.a * dt);
    const double st = d.sigma_tilde();
    return {decay, d.b_tilde() * (1.0 - decay),
            st * std::sqrt(-std::expm1(-2.0 * d.a * dt) / (2.0 * d.a))};
}

struct Welford {
    std::int64_t n = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double v) {
        ++n;
        const double delta = v - mean;
        mean += delta / n;
        m2 += delta * (v - mean);
    }
    double std_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / (n - 1) / n);
    }
};

}  // namespace detail_mc

// MC estimate of E[exp(-int_0^s r du)] on the exact transition skeleton,
// trapezoidal rate integral, step at most min(cfg.dt, s/200).
inline McEstimate estimate_bond_price(const DerivedParams& d, double r, double s,
                                      const McConfig& cfg) {
    if (s < 0.0) throw domain_error("estimate_bond_price: horizon must be nonnegative");
    if (cfg.n_paths < 1) throw parameter_error("mc: n_paths must be positive");
    if (!(cfg.dt > 0.0)) throw parameter_error("mc: dt must be positive");
    if (s == 0.0) return {1.0, 0.0, cfg.n_paths, 0.0, 0, 0, 0};

    const double dt_cap = std::min(cfg.dt, s / 200.0);
    const std::int64_t n_steps =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(s / dt_cap - 1e-9)));
    const double dt = s / static_cast<double>(n_steps);
    const detail_mc::OuStepCoef c = detail_mc::ou_coef(d, dt);

    const auto one_path = [&](rng::PathRng& g, double flip) {
        double rr = r, acc = 0.0;
        for (std::int64_t k = 0; k < n_steps; ++k) {
            const double rn = rr * c.decay + c.mean_add + c.sd * flip * g.normal();
            acc += 0.5 * (rr + rn) * dt;
            rr = rn;
        }
        return std::exp(-acc);
    };

    detail_mc::Welford w;
    if (cfg.antithetic) {
        const std::int64_t pairs = std::max<std::int64_t>(1, cfg.n_paths / 2);
        for (std::int64_t i = 0; i < pairs; ++i) {
            rng::PathRng g1(cfg.seed, static_cast<std::uint64_t>(i));
            rng::PathRng g2(cfg.seed, static_cast<std::uint64_t>(i));
            w.add(0.5 * (one_path(g1, 1.0) + one_path(g2, -1.0)));
        }
        return {w.mean, w.std_error(), 2 * pairs, 0.0, 0, 0, 2 * pairs * n_steps};
    }
    for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
        rng::PathRng g(cfg.seed, static_cast<std::uint64_t>(i));
        w.add(one_path(g, 1.0));
    }
    return {w.mean, w.std_error(), cfg.n_paths, 0.0, 0, 0, cfg.n_paths * n_steps};
}

// MC estimate of E[exp(-r_s)] under the drifting Brownian rate; the law is
// exactly lognormal so a single draw per path suffices.
inline McEstimate estimate_discount_gbm(const GbmParams& p, double s,
                                        const McConfig& cfg) {
    if (s < 0.0)
        throw domain_error("estimate_discount_gbm: horizon must be nonnegative");
    if (cfg.n_paths < 1) throw parameter_error("mc: n_paths must be positive");
    if (s == 0.0) return {std::exp(-p.r0), 0.0, cfg.n_paths, 0.0, 0, 0, 0};
    const double sq = p.sigma * std::sqrt(s);
    const auto draw = [&](double z) { return std::exp(-p.r0 - p.m * s - sq * z); };
    detail_mc::Welford w;
    if (cfg.antithetic) {
        const std::int64_t pairs = std::max<std::int64_t>(1, cfg.n_paths / 2);
        for (std::int64_t i = 0; i < pairs; ++i) {
            rng::PathRng g(cfg.seed, static_cast<std::uint64_t>(i));
            const double z = g.normal();
            w.add(0.5 * (draw(z) + draw(-z)));
        }
        return {w.mean, w.std_error(), 2 * pairs, 0.0, 0, 0, 2 * pairs};
    }
    for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
        rng::PathRng g(cfg.seed, static_cast<std::uint64_t>(i));
        w.add(draw(g.normal()));
    }
    return {w.mean, w.std_error(), cfg.n_paths, 0.0, 0, 0, cfg.n_paths};
}

// discounting processes a consumption plan can be evaluated under
struct OuModel {
    DerivedParams d;
    bool pay_surplus_at_horizon = false;  // finite-horizon problems pay X_T at T
};

struct GbmModel {
    GbmParams p;
};

namespace detail_mc {

struct TimeGrid {
    std::vector<double> t;      // nodes, t[0] = 0, t.back() = horizon
    std::vector<double> rate;   // rate on [t[k], t[k+1])
    std::vector<double> c_eff;  // after the deterministic surplus clip
    std::vector<std::pair<std::size_t, double>> lumps;  // node index, amount
    double x_end = 0.0;
    std::int64_t clipped = 0;
};

inline TimeGrid build_grid(const PiecewiseStrategy& st, double mu, double x0,
                           double horizon, double dt) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw parameter_error("mc: evaluation horizon must be positive and finite");
    std::vector<double> marks{0.0, horizon};
    for (const auto& s : st.segments) {
        if (s.t_begin < horizon) marks.push_back(std::max(s.t_begin, 0.0));
        if (s.t_end < horizon && std::isfinite(s.t_end)) marks.push_back(s.t_end);
    }
    for (const auto& l : st.lumps)
        if (l.time <= horizon) marks.push_back(std::max(l.time, 0.0));
    if (st.start > 0.0 && st.start < horizon) marks.push_back(st.start);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end(),
                            [](double a, double b) { return b - a < 1e-12; }),
                marks.end());

    TimeGrid g;
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        const double lo = marks[i], hi = marks[i + 1];
        const auto n = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::ceil((hi - lo) / dt - 1e-9)));
        for (std::int64_t k = 0; k < n; ++k)
            g.t.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n));
    }
    g.t.push_back(horizon);

    // deterministic surplus walk: rates and lumps do not look at the path
    std::size_t lump_i = 0;
    std::vector<Lump> lumps = st.lumps;
    std::sort(lumps.begin(), lumps.end(),
              [](const Lump& a, const Lump& b) { return a.time < b.time; });
    double x = x0;
    bool started = st.start <= 0.0;
    g.rate.resize(g.t.size() - 1);
    g.c_eff.resize(g.t.size() - 1);
    for (std::size_t k = 0; k + 1 < g.t.size(); ++k) {
        const double t0 = g.t[k], t1 = g.t[k + 1];
        if (!started && t0 >= st.start - 1e-12) started = true;
        while (lump_i < lumps.size() && lumps[lump_i].time <= t0 + 1e-12) {
            const double amt = std::min(lumps[lump_i].amount, std::max(x, 0.0));
            g.lumps.emplace_back(k, amt);
            x -= amt;
            ++lump_i;
        }
        const double c = started ? st.rate_at(0.5 * (t0 + t1)) : 0.0;
        double ce = c;
        if (started) {
            const double h = t1 - t0;
            const double avail = mu + x / h;
            if (ce > avail) {
                ce = std::max(avail, 0.0);
                ++g.clipped;
            }
            x += (mu - ce) * h;
            if (x < 0.0) x = 0.0;
        }
        g.rate[k] = c;
        g.c_eff[k] = ce;
    }
    while (lump_i < lumps.size() && lumps[lump_i].time <= g.t.back() + 1e-12) {
        const double amt = std::min(lumps[lump_i].amount, std::max(x, 0.0));
        g.lumps.emplace_back(g.t.size() - 1, amt);
        x -= amt;
        ++lump_i;
    }
    g.x_end = x;
    return g;
}

inline double ou_env(const DerivedParams& d, double r) {
    return std::exp(-std::min((r - d.b) / d.a, 0.0));
}

}  // namespace detail_mc

// Expected discounted payout of a fixed consumption plan. The surplus path
// is deterministic, so only the discount factor is simulated. Open-ended
// plans are truncated at cfg.horizon and the truncated mass is bounded
// analytically in tail_bound.
inline McEstimate evaluate_policy(const OuModel& model, double mu,
                                  const PiecewiseStrategy& st, double x0,
                                  const McConfig& cfg) {
    if (cfg.n_paths < 1) throw parameter_error("mc: n_paths must be positive");
    if (!(cfg.dt > 0.0)) throw parameter_error("mc: dt must be positive");
    const double horizon =
        cfg.horizon > 0.0 ? cfg.horizon : (std::isfinite(st.end) ? st.end : 0.0);
    const detail_mc::TimeGrid g =
        detail_mc::build_grid(st, mu, x0, horizon, cfg.dt);
    const std::size_t n = g.t.size();

    const double tail_rate = st.rate_at(horizon + 1e-9);
    double tail = 0.0;
    if ((std::isinf(st.end) && st.end > horizon) || st.end > horizon) {
        if (!(model.d.b > 0.0))
            throw parameter_error("mc: open-ended plans need a positive decay rate b");
        const double cap = std::max(tail_rate, mu);
        tail = cap * detail_mc::ou_env(model.d, model.d.r0) *
               std::exp(-model.d.b * horizon) / model.d.b;
    }

    std::vector<detail_mc::OuStepCoef> coef(n - 1);
    std::vector<double> hs(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        hs[k] = g.t[k + 1] - g.t[k];
        coef[k] = detail_mc::ou_coef(model.d, hs[k]);
    }

    const auto one_path = [&](rng::PathRng& gen, double flip) {
        double r = model.d.r0, acc = 0.0, payout = 0.0;
        double disc = 1.0;
        std::size_t lump_i = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            while (lump_i < g.lumps.size() && g.lumps[lump_i].first == k) {
                payout += g.lumps[lump_i].second * disc;
                ++lump_i;
            }
            const double rn =
                r * coef[k].decay + coef[k].mean_add + coef[k].sd * flip * gen.normal();
            acc += 0.5 * (r + rn) * hs[k];
            const double disc_n = std::exp(-acc);
            payout += g.c_eff[k] * 0.5 * (disc + disc_n) * hs[k];
            disc = disc_n;
            r = rn;
        }
        while (lump_i < g.lumps.size()) {
            payout += g.lumps[lump_i].second * disc;
            ++lump_i;
        }
        if (model.pay_surplus_at_horizon) payout += g.x_end * disc;
        return payout;
    };

    detail_mc::Welford w;
    std::int64_t paths;
    if (cfg.antithetic) {
        const std::int64_t pairs = std::max<std::int64_t>(1, cfg.n_paths / 2);
        for (std::int64_t i = 0; i < pairs; ++i) {
            rng::PathRng g1(cfg.seed, static_cast<std::uint64_t>(i));
            rng::PathRng g2(cfg.seed, static_cast<std::uint64_t>(i));
            w.add(0.5 * (one_path(g1, 1.0) + one_path(g2, -1.0)));
        }
        paths = 2 * pairs;
    } else {
        for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
            rng::PathRng gen(cfg.seed, static_cast<std::uint64_t>(i));
            w.add(one_path(gen, 1.0));
        }
        paths = cfg.n_paths;
    }
    McEstimate e{w.mean, w.std_error(), paths, tail, g.clipped, 0,
                 paths * static_cast<std::int64_t>(n - 1)};
    return e;
}

inline McEstimate evaluate_policy(const GbmModel& model, double mu,
                                  const PiecewiseStrategy& st, double x0,
                                  const McConfig& cfg) {
    if (cfg.n_paths < 1) throw parameter_error("mc: n_paths must be positive");
    if (!(cfg.dt > 0.0)) throw parameter_error("mc: dt must be positive");
    const double horizon =
        cfg.horizon > 0.0 ? cfg.horizon : (std::isfinite(st.end) ? st.end : 0.0);
    const detail_mc::TimeGrid g =
        detail_mc::build_grid(st, mu, x0, horizon, cfg.dt);
    const std::size_t n = g.t.size();

    const double tail_rate = st.rate_at(horizon + 1e-9);
    double tail = 0.0;
    if (st.end > horizon) {
        const double cap = std::max(tail_rate, mu);
        tail = cap * std::exp(-model.p.r0 - model.p.kappa() * horizon) /
               model.p.kappa();
    }

    std::vector<double> sq(n - 1), hs(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        hs[k] = g.t[k + 1] - g.t[k];
        sq[k] = model.p.sigma * std::sqrt(hs[k]);
    }

    const auto one_path = [&](rng::PathRng& gen, double flip) {
        double r = model.p.r0, payout = 0.0;
        double disc = std::exp(-r);
        std::size_t lump_i = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            while (lump_i < g.lumps.size() && g.lumps[lump_i].first == k) {
                payout += g.lumps[lump_i].second * disc;
                ++lump_i;
            }
            r += model.p.m * hs[k] + sq[k] * flip * gen.normal();
            const double disc_n = std::exp(-r);
            payout += g.c_eff[k] * 0.5 * (disc + disc_n) * hs[k];
            disc = disc_n;
        }
        while (lump_i < g.lumps.size()) {
            payout += g.lumps[lump_i].second * disc;
            ++lump_i;
        }
        return payout;
    };

    detail_mc::Welford w;
    std::int64_t paths;
    if (cfg.antithetic) {
        const std::int64_t pairs = std::max<std::int64_t>(1, cfg.n_paths / 2);
        for (std::int64_t i = 0; i < pairs; ++i) {
            rng::PathRng g1(cfg.seed, static_cast<std::uint64_t>(i));
            rng::PathRng g2(cfg.seed, static_cast<std::uint64_t>(i));
            w.add(0.5 * (one_path(g1, 1.0) + one_path(g2, -1.0)));
        }
        paths = 2 * pairs;
    } else {
        for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
            rng::PathRng gen(cfg.seed, static_cast<std::uint64_t>(i));
            w.add(one_path(gen, 1.0));
        }
        paths = cfg.n_paths;
    }
    return {w.mean, w.std_error(), paths, tail, g.clipped, 0,
            paths * static_cast<std::int64_t>(n - 1)};
}

// Feedback rate c(t, r, x), consumption decided from the current state only.
using FeedbackPolicy = std::function<double(double t, double r, double x)>;

// Evaluates a feedback rule under the mean-reverting model. The rule is
// clipped to keep the surplus nonnegative: a partial step at the barrier is
// routine (clipped_steps), demanding more than the income at an empty
// surplus is a violation. More than 0.1% violating steps is an error.
inline McEstimate evaluate_policy(const OuModel& model, double mu,
                                  const FeedbackPolicy& policy, double x0,
                                  double max_rate, const McConfig& cfg) {
    if (cfg.n_paths < 1) throw parameter_error("mc: n_paths must be positive");
    if (!(cfg.dt > 0.0)) throw parameter_error("mc: dt must be positive");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        throw parameter_error("mc: evaluation horizon must be positive and finite");
    const std::int64_t n_steps = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(cfg.horizon / cfg.dt - 1e-9)));
    const double h = cfg.horizon / static_cast<double>(n_steps);
    const detail_mc::OuStepCoef c = detail_mc::ou_coef(model.d, h);

    if (!(model.d.b > 0.0))
        throw parameter_error("mc: open-ended plans need a positive decay rate b");
    const double tail = std::max(max_rate, mu) *
                        detail_mc::ou_env(model.d, model.d.r0) *
                        std::exp(-model.d.b * cfg.horizon) / model.d.b;

    std::int64_t clipped = 0, violations = 0;
    const auto one_path = [&](rng::PathRng& gen, double flip) {
        double r = model.d.r0, x = x0, acc = 0.0, payout = 0.0, disc = 1.0;
        for (std::int64_t k = 0; k < n_steps; ++k) {
            double ce = policy(static_cast<double>(k) * h, r, x);
            if (x <= 1e-12 && ce > mu + 1e-9) ++violations;
            const double avail = mu + x / h;
            if (ce > avail) {
                ce = std::max(avail, 0.0);
                ++clipped;
            }
            x += (mu - ce) * h;
            if (x < 0.0) x = 0.0;
            const double rn = r * c.decay + c.mean_add + c.sd * flip * gen.normal();
            acc += 0.5 * (r + rn) * h;
            const double disc_n = std::exp(-acc);
            payout += ce * 0.5 * (disc + disc_n) * h;
            disc = disc_n;
            r = rn;
        }
        if (model.pay_surplus_at_horizon) payout += x * disc;
        return payout;
    };

    detail_mc::Welford w;
    std::int64_t paths;
    if (cfg.antithetic) {
        const std::int64_t pairs = std::max<std::int64_t>(1, cfg.n_paths / 2);
        for (std::int64_t i = 0; i < pairs; ++i) {
            rng::PathRng g1(cfg.seed, static_cast<std::uint64_t>(i));
            rng::PathRng g2(cfg.seed, static_cast<std::uint64_t>(i));
            w.add(0.5 * (one_path(g1, 1.0) + one_path(g2, -1.0)));
        }
        paths = 2 * pairs;
    } else {
        for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
            rng::PathRng gen(cfg.seed, static_cast<std::uint64_t>(i));
            w.add(one_path(gen, 1.0));
        }
        paths = cfg.n_paths;
    }
    const std::int64_t total = paths * n_steps;
    if (violations * 1000 > total)
        throw numerical_error("mc: feedback policy violates admissibility on more than 0.1% of steps");
    return {w.mean, w.std_error(), paths, tail, clipped, violations, total};
}

}  // namespace odc
