// Backward-induction oracle for the deterministic payout problem, built to
// be independent of the closed forms it cross-checks: it only uses the bond
// price curve and brute dynamic programming over a three-rate action set.
//
// The surplus grid is chosen so that every action moves the state an exact
// whole number of nodes per time step (the caller passes dx and the
// constructor enforces it).  That removes interpolation entirely; the only
// discretization left is the dt-quantization of switching times, a
// second-order effect on the value.
//
// Memory stays modest by keeping two rolling rows and snapshotting only the
// time slices the caller wants to sample afterwards.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <odc/zero_bond.hpp>

namespace odc_test {

class DpOracle {
  public:
    DpOracle(const odc::ProblemZB& p, double dt, double dx, double x_max,
             const std::vector<double>& sample_times)
        : p_(p), dt_(dt), dx_(dx) {
        n_steps_ = static_cast<int>(std::llround(p.T / dt));
        if (std::abs(n_steps_ * dt - p.T) > 1e-9 * std::max(1.0, p.T))
            throw std::invalid_argument("dp oracle: dt must divide the horizon");
        nx_ = static_cast<int>(std::llround(x_max / dx)) + 1;

        shift_wait_ = node_shift(p.mu);  // income rate itself keeps x still
        if (!p.unrestricted()) shift_cap_ = node_shift(p.mu - p.xi);

        for (double t : sample_times) {
            const int k = static_cast<int>(std::llround(t / dt));
            if (std::abs(k * dt - t) > 1e-9)
                throw std::invalid_argument(
                    "dp oracle: sample time " + std::to_string(t) +
                    " is off the step grid");
            if (k < 0 || k > n_steps_)
                throw std::out_of_range("dp oracle: sample time outside [0, T]");
            kept_[k];  // reserve the slot
        }

        // per-step discount integrals by Simpson's rule
        std::vector<double> step_disc(n_steps_);
        for (int k = 0; k < n_steps_; ++k) {
            const double t0 = k * dt, t1 = t0 + dt;
            const double fm = price(0.5 * (t0 + t1));
            step_disc[k] = dt / 6.0 * (price(t0) + 4.0 * fm + price(t1));
        }

        // terminal payout: remaining surplus as a lump at the horizon
        std::vector<double> next(nx_), cur(nx_);
        const double p_end = price(p.T);
        for (int j = 0; j < nx_; ++j) next[j] = j * dx_ * p_end;
        snapshot(n_steps_, next);

        for (int k = n_steps_ - 1; k >= 0; --k) {
            const double reward = step_disc[k];
            const double p_now = price(k * dt);
            for (int j = 0; j < nx_; ++j) {
                double best = read(next, j + shift_wait_);  // pay nothing
                if (p.mu <= p.xi)  // match income, only when the cap allows it
                    best = std::max(best, p.mu * reward + next[j]);
                if (!p.unrestricted()) {
                    const int tgt = j + shift_cap_;          // full cap
                    if (p.xi <= p.mu || tgt >= 0)
                        best = std::max(best, p.xi * reward + read(next, tgt));
                }
                cur[j] = best;
            }
            if (p.unrestricted()) {
                // lump payout straight to zero surplus, then continue from 0
                const double base = cur[0];
                for (int j = 1; j < nx_; ++j)
                    cur[j] = std::max(cur[j], base + j * dx_ * p_now);
            }
            snapshot(k, cur);
            next.swap(cur);
        }
    }

    double value(double t, double x) const {
        const int k = static_cast<int>(std::llround(t / dt_));
        const int j = static_cast<int>(std::llround(x / dx_));
        if (std::abs(k * dt_ - t) > 1e-9 || std::abs(j * dx_ - x) > 1e-9)
            throw std::invalid_argument(
                "dp oracle: sample (" + std::to_string(t) + ", " +
                std::to_string(x) + ") is off the oracle grid");
        if (j < 0 || j >= nx_)
            throw std::out_of_range("dp oracle: sample outside the grid");
        const auto it = kept_.find(k);
        if (it == kept_.end() || it->second.empty())
            throw std::logic_error(
                "dp oracle: time slice was not requested at construction");
        return it->second[static_cast<std::size_t>(j)];
    }

  private:
    double price(double s) const { return odc::bond_price(p_.d, p_.d.r0, s); }

    void snapshot(int k, const std::vector<double>& row) {
        const auto it = kept_.find(k);
        if (it != kept_.end()) it->second = row;
    }

    int node_shift(double rate) const {
        const double raw = rate * dt_ / dx_;
        const int n = static_cast<int>(std::llround(raw));
        if (std::abs(raw - n) > 1e-9)
            throw std::invalid_argument(
                "dp oracle: dx does not transport rate " + std::to_string(rate) +
                " an integer number of nodes");
        return n;
    }

    // clamped read with a linear top extension (the value grows with slope
    // ~ one bond price per unit surplus, so freezing the edge would bleed a
    // first-order error down into the reachable region)
    double read(const std::vector<double>& row, int j) const {
        if (j < 0) throw std::out_of_range("dp oracle: negative surplus");
        if (j < nx_) return row[static_cast<std::size_t>(j)];
        const double slope = row[nx_ - 1] - row[nx_ - 2];
        return row[nx_ - 1] + (j - (nx_ - 1)) * slope;
    }

    odc::ProblemZB p_;
    double dt_, dx_;
    int n_steps_ = 0, nx_ = 0;
    int shift_wait_ = 0, shift_cap_ = 0;
    std::map<int, std::vector<double>> kept_;
};

}  // namespace odc_test
