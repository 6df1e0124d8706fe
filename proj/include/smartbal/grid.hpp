#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartbal/injection.hpp"

namespace smartbal {

class instability_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dynamic constants of the linearized single-busbar control area: inertia,
// FCR with a first-order activation lag, instantaneous self-regulating load,
// and a PI secondary controller whose output is activated through another
// first-order lag.
struct GridParams {
    double t_inertia_s = 10.0;
    double p_base_mw = 80000.0;
    double k_fcr_mw_per_hz = 8000.0;
    double t_fcr_act_s = 30.0;
    double k_load_mw_per_hz = 1500.0;
    double k_afrr = 0.1;
    double t_afrr_s = 960.0;
    double t_afrr_act_s = 60.0;
    double f_nominal_hz = 50.0; // reporting only

    // Calibrated default profile. These are tuning targets for a plausibly
    // damped secondary loop, not measured constants of any real control block.
    static GridParams default_profile() { return GridParams{}; }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw std::invalid_argument(std::string("GridParams: ") + name +
                                            " must be > 0");
            }
        };
        positive(t_inertia_s, "t_inertia_s");
        positive(p_base_mw, "p_base_mw");
        positive(t_fcr_act_s, "t_fcr_act_s");
        positive(t_afrr_s, "t_afrr_s");
        positive(t_afrr_act_s, "t_afrr_act_s");
        positive(f_nominal_hz, "f_nominal_hz");
        if (k_fcr_mw_per_hz < 0.0 || !std::isfinite(k_fcr_mw_per_hz)) {
            throw std::invalid_argument("GridParams: k_fcr_mw_per_hz must be >= 0");
        }
        if (k_load_mw_per_hz < 0.0 || !std::isfinite(k_load_mw_per_hz)) {
            throw std::invalid_argument("GridParams: k_load_mw_per_hz must be >= 0");
        }
        if (!std::isfinite(k_afrr) || k_afrr < 0.0) {
            throw std::invalid_argument("GridParams: k_afrr must be >= 0");
        }
    }

    double min_time_constant_s() const {
        return std::min(std::min(t_inertia_s, t_fcr_act_s),
                        std::min(t_afrr_s, t_afrr_act_s));
    }
};

struct TraceSample {
    double t_min = 0.0;
    double delta_f_hz = 0.0;
    double p_frr_req_mw = 0.0;
    double p_frr_act_mw = 0.0;
    double p_fcr_mw = 0.0;
    double p_selfreg_mw = 0.0;
    double p_ace_mw = 0.0;
};

enum class Signal {
    DeltaF,
    FrrRequested,
    FrrActivated,
    Fcr,
    SelfReg,
    Ace,
};

struct SimTrace {
    double dt_s = 1.0;
    std::vector<TraceSample> samples;

    double horizon_min() const {
        return samples.empty() ? 0.0 : samples.back().t_min;
    }

    double signal(std::size_t i, Signal s) const {
        const TraceSample& x = samples[i];
        switch (s) {
        case Signal::DeltaF: return x.delta_f_hz;
        case Signal::FrrRequested: return x.p_frr_req_mw;
        case Signal::FrrActivated: return x.p_frr_act_mw;
        case Signal::Fcr: return x.p_fcr_mw;
        case Signal::SelfReg: return x.p_selfreg_mw;
        case Signal::Ace: return x.p_ace_mw;
        }
        throw std::invalid_argument("SimTrace::signal: unknown signal");
    }
};

namespace detail {

// Closed-loop state: frequency deviation, activated FCR, frequency-deviation
// integral, activated aFRR.
struct GridState {
    double delta_f = 0.0;
    double p_fcr = 0.0;
    double f_integral = 0.0;
    double p_afrr = 0.0;

    GridState operator+(const GridState& o) const {
        return {delta_f + o.delta_f, p_fcr + o.p_fcr, f_integral + o.f_integral,
                p_afrr + o.p_afrr};
    }
    GridState operator*(double a) const {
        return {a * delta_f, a * p_fcr, a * f_integral, a * p_afrr};
    }
};

inline double frr_request(const GridParams& p, const GridState& s) {
    // Sign convention: a shortage (negative deviation, negative delta f)
    // yields a positive FRR request.
    return -p.p_base_mw * (p.k_afrr * s.delta_f + s.f_integral / p.t_afrr_s);
}

inline GridState grid_deriv(const GridParams& p, const GridState& s, double p_ace_mw) {
    const double p_selfreg = -p.k_load_mw_per_hz * s.delta_f;
    const double p_net = p_ace_mw + s.p_fcr + p_selfreg + s.p_afrr;
    GridState d;
    d.delta_f = p_net / (p.t_inertia_s * p.p_base_mw);
    d.p_fcr = (-p.k_fcr_mw_per_hz * s.delta_f - s.p_fcr) / p.t_fcr_act_s;
    d.f_integral = s.delta_f;
    d.p_afrr = (frr_request(p, s) - s.p_afrr) / p.t_afrr_act_s;
    return d;
}

} // namespace detail

// Fixed-step simulation of the control area. Classic fourth-order one-step
// integration; the system is linear, so the trace is linear in the injections
// and fully deterministic.
inline SimTrace simulate(const GridParams& params,
                         const std::vector<InjectionProfile>& injections,
                         double horizon_min, double dt_s = 1.0) {
    params.validate();
    if (!(dt_s > 0.0) || !std::isfinite(dt_s)) {
        throw std::invalid_argument("simulate: dt must be > 0");
    }
    if (!(horizon_min * 60.0 >= dt_s)) {
        throw std::invalid_argument("simulate: horizon must cover at least one step");
    }
    if (dt_s > params.min_time_constant_s() / 5.0) {
        throw std::invalid_argument(
            "simulate: dt too large for explicit integration; require dt <= "
            "min(time constants)/5");
    }
    const double horizon_s = horizon_min * 60.0;
    const double steps_exact = horizon_s / dt_s;
    const auto n_steps = static_cast<std::size_t>(std::llround(steps_exact));
    if (std::abs(steps_exact - static_cast<double>(n_steps)) > 1e-6) {
        throw std::invalid_argument("simulate: horizon must be a multiple of dt");
    }

    auto ace_at = [&](double t_s) {
        double sum = 0.0;
        for (const InjectionProfile& inj : injections) {
            sum += inj.value(t_s / 60.0);
        }
        return sum;
    };

    SimTrace trace;
    trace.dt_s = dt_s;
    trace.samples.reserve(n_steps + 1);

    detail::GridState x;
    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double t_s = static_cast<double>(k) * dt_s;
        TraceSample sample;
        sample.t_min = t_s / 60.0;
        sample.delta_f_hz = x.delta_f;
        sample.p_frr_req_mw = detail::frr_request(params, x);
        sample.p_frr_act_mw = x.p_afrr;
        sample.p_fcr_mw = x.p_fcr;
        sample.p_selfreg_mw = -params.k_load_mw_per_hz * x.delta_f;
        sample.p_ace_mw = ace_at(t_s);
        if (!std::isfinite(sample.delta_f_hz) || !std::isfinite(sample.p_frr_req_mw)) {
            throw instability_error("simulate: non-finite state at step " +
                                    std::to_string(k) + " (t = " +
                                    std::to_string(sample.t_min) + " min)");
        }
        trace.samples.push_back(sample);
        if (k == n_steps) {
            break;
        }
        const detail::GridState k1 = detail::grid_deriv(params, x, ace_at(t_s));
        const detail::GridState k2 =
            detail::grid_deriv(params, x + k1 * (0.5 * dt_s), ace_at(t_s + 0.5 * dt_s));
        const detail::GridState k3 =
            detail::grid_deriv(params, x + k2 * (0.5 * dt_s), ace_at(t_s + 0.5 * dt_s));
        const detail::GridState k4 =
            detail::grid_deriv(params, x + k3 * dt_s, ace_at(t_s + dt_s));
        x = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt_s / 6.0);
    }
    return trace;
}

// Analytic steady-state FRR request for a constant net schedule deviation.
// Integral action drives the frequency deviation to zero, so the requested
// FRR exactly cancels the deviation.
inline double steady_state_frr(const GridParams& params, double net_schedule_deviation_mw) {
    params.validate();
    return -net_schedule_deviation_mw;
}

} // namespace smartbal
