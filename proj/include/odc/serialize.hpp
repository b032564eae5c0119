#pragma once

#include <nlohmann/json.hpp>

#include "odc/f_analysis.hpp"
#include "odc/gbm.hpp"
#include "odc/monte_carlo.hpp"
#include "odc/ou_solver.hpp"
#include "odc/strategy.hpp"
#include "odc/vasicek.hpp"

namespace odc {

inline void to_json(nlohmann::json& j, const DerivedParams& d) {
    j = {{"a", d.a},
         {"sigma", d.sigma},
         {"b", d.b},
         {"r0", d.r0},
         {"sigma_tilde", d.sigma_tilde()},
         {"b_tilde", d.b_tilde()}};
}

inline void to_json(nlohmann::json& j, const VasicekParams& p) {
    j = {{"a", p.a},
         {"sigma_tilde", p.sigma_tilde},
         {"b_tilde", p.b_tilde},
         {"r0", p.r0}};
}

inline void to_json(nlohmann::json& j, const GbmParams& p) {
    j = {{"m", p.m},     {"sigma", p.sigma}, {"r0", p.r0},
         {"mu", p.mu},   {"xi", p.xi},       {"kappa", p.kappa()}};
}

inline void to_json(nlohmann::json& j, const ScenarioReport& rep) {
    const auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    j = {{"scenario", to_string(rep.scenario)},
         {"r", rep.r},
         {"horizon", rep.T},
         {"f_start", rep.f0},
         {"f_end", rep.fT},
         {"w1", opt(rep.w1)},
         {"w2", opt(rep.w2)},
         {"t1", opt(rep.t1)},
         {"t2", opt(rep.t2)},
         {"f_w1", opt(rep.f_w1)},
         {"f_w2", opt(rep.f_w2)}};
}

inline void to_json(nlohmann::json& j, const Segment& s) {
    j = {{"t_begin", s.t_begin}, {"t_end", s.t_end}, {"rate", s.rate}};
}

inline void to_json(nlohmann::json& j, const Lump& l) {
    j = {{"time", l.time}, {"amount", l.amount}};
}

inline void to_json(nlohmann::json& j, const PiecewiseStrategy& st) {
    j = {{"start", st.start},
         {"end", std::isfinite(st.end) ? nlohmann::json(st.end)
                                       : nlohmann::json("unbounded")},
         {"segments", st.segments},
         {"lumps", st.lumps}};
}

inline void to_json(nlohmann::json& j, const McEstimate& e) {
    j = {{"mean", e.mean},
         {"std_error", e.std_error},
         {"n_paths", e.n_paths},
         {"tail_bound", e.tail_bound},
         {"clipped_steps", e.clipped_steps},
         {"violation_steps", e.violation_steps},
         {"total_steps", e.total_steps}};
}

inline void to_json(nlohmann::json& j, const ValueBounds& vb) {
    j = {{"lower", vb.lower}, {"upper", vb.upper}};
}

inline void to_json(nlohmann::json& j, const RegularityReport& r) {
    j = {{"increasing_x", r.increasing_x},
         {"concave_x", r.concave_x},
         {"decreasing_r", r.decreasing_r},
         {"convex_r", r.convex_r},
         {"lipschitz_r_ok", r.lipschitz_r_ok},
         {"lipschitz_x_ok", r.lipschitz_x_ok},
         {"worst_increase_x", r.worst_increase_x},
         {"worst_concavity_x", r.worst_concavity_x},
         {"worst_decrease_r", r.worst_decrease_r},
         {"worst_convexity_r", r.worst_convexity_r},
         {"max_lipschitz_ratio_r", r.max_lipschitz_ratio_r},
         {"max_lipschitz_ratio_x", r.max_lipschitz_ratio_x},
         {"skip_r_lo", r.skip_r_lo},
         {"skip_r_hi", r.skip_r_hi},
         {"worst_increase_x_at", r.worst_increase_x_at},
         {"worst_concavity_x_at", r.worst_concavity_x_at},
         {"worst_decrease_r_at", r.worst_decrease_r_at},
         {"worst_convexity_r_at", r.worst_convexity_r_at}};
}

inline void to_json(nlohmann::json& j, const BoundaryPoint& b) {
    j = {{"r", b.r},
         {"x_star", b.x_star},
         {"x_reference", b.x_reference},
         {"all_waiting", b.all_waiting}};
}

inline void to_json(nlohmann::json& j, const PolicyMcCheck& c) {
    j = {{"grid_value", c.grid_value},
         {"estimate", c.estimate},
         {"tolerance", c.tolerance},
         {"within", c.within},
         {"tail_warning", c.tail_warning},
         {"horizon", c.horizon}};
}

// solver output summary; the full surface goes to CSV, not JSON
inline nlohmann::json surface_summary(const ValueSurface& vs) {
    return {{"n_r", vs.r.size()},
            {"n_x", vs.x.size()},
            {"r_min", vs.r.front()},
            {"r_max", vs.r.back()},
            {"x_max", vs.x.back()},
            {"iterations", vs.iterations},
            {"residual_norm", vs.residual_norm},
            {"converged", vs.converged},
            {"monotone_coefficients", vs.monotone_coefficients},
            {"boundary_layer_width_r", vs.boundary_layer_width_r},
            {"bound_violations", vs.bound_violations},
            {"lower_gap", vs.lower_gap},
            {"upper_gap", vs.upper_gap}};
}

}  // namespace odc
