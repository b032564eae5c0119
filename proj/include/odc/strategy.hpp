#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "odc/errors.hpp"

namespace odc {

// Consumption plan: piecewise-constant rates covering [start, end] plus
// discrete payouts. Only the unrestricted problem uses lumps. The last
// segment of an open-ended plan may run to +infinity.
struct Segment {
    double t_begin = 0.0;
    double t_end = 0.0;
    double rate = 0.0;
};

struct Lump {
    double time = 0.0;
    double amount = 0.0;
};

struct PiecewiseStrategy {
    double start = 0.0;
    double end = 0.0;  // may be +infinity
    std::vector<Segment> segments;
    std::vector<Lump> lumps;

    // rate in force at time t (left-continuous at segment joins)
    double rate_at(double t) const {
        for (const auto& s : segments)
            if (t >= s.t_begin && t < s.t_end) return s.rate;
        if (!segments.empty() && t == segments.back().t_end)
            return segments.back().rate;
        return 0.0;
    }
};

// drop zero-length pieces, merge adjacent equal rates
inline void normalize(PiecewiseStrategy& st) {
    std::vector<Segment> out;
    for (const auto& s : st.segments) {
        if (!(s.t_end > s.t_begin)) continue;
        if (!out.empty() && out.back().rate == s.rate &&
            out.back().t_end == s.t_begin)
            out.back().t_end = s.t_end;
        else
            out.push_back(s);
    }
    st.segments = std::move(out);
}

// Checks the plan is internally consistent and affordable from surplus x0
// with income rate mu: segments contiguous on [start, end], rates in
// [0, cap], surplus never negative. Throws on violation.
inline void check_admissible(const PiecewiseStrategy& st, double x0, double mu,
                             double cap) {
    double t = st.start;
    double x = x0;
    std::size_t lump_i = 0;
    const auto pay_lumps_at = [&](double when) {
        while (lump_i < st.lumps.size() && st.lumps[lump_i].time <= when + 1e-12) {
            x -= st.lumps[lump_i].amount;
            if (x < -1e-9)
                throw numerical_error("strategy: lump exceeds available surplus");
            if (x < 0.0) x = 0.0;
            ++lump_i;
        }
    };
    for (const auto& s : st.segments) {
        if (std::abs(s.t_begin - t) > 1e-9)
            throw numerical_error("strategy: segments do not partition the horizon");
        if (s.rate < -1e-12 || s.rate > cap + 1e-9)
            throw numerical_error("strategy: rate outside [0, cap]");
        pay_lumps_at(s.t_begin);
        if (std::isinf(s.t_end)) {
            if (s.rate > mu + 1e-12 && s.rate > 0.0)
                throw numerical_error("strategy: open-ended segment drains surplus");
            return;
        }
        x += (mu - s.rate) * (s.t_end - s.t_begin);
        if (x < -1e-9)
            throw numerical_error("strategy: surplus goes negative");
        if (x < 0.0) x = 0.0;
        t = s.t_end;
    }
    pay_lumps_at(t);
    if (std::abs(t - st.end) > 1e-9)
        throw numerical_error("strategy: segments stop short of the horizon");
}

}  // namespace odc
