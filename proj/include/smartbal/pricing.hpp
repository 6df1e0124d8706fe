#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "smartbal/grid.hpp"
#include "smartbal/injection.hpp"
#include "smartbal/scenario.hpp"

namespace smartbal {

struct IspWindow {
    double start_min = 0.0;
    double end_min = 15.0;

    void validate() const {
        if (!(start_min < end_min)) {
            throw std::invalid_argument("IspWindow: start must precede end");
        }
    }
};

inline std::vector<IspWindow> isp_windows(double horizon_min, double isp_minutes) {
    if (!(isp_minutes > 0.0) || !(horizon_min >= isp_minutes)) {
        throw std::invalid_argument("isp_windows: bad horizon/ISP length");
    }
    std::vector<IspWindow> windows;
    const auto n = static_cast<std::size_t>(std::llround(horizon_min / isp_minutes));
    windows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        windows.push_back({static_cast<double>(i) * isp_minutes,
                           static_cast<double>(i + 1) * isp_minutes});
    }
    return windows;
}

namespace detail {

// Index range [first, last] of trace samples spanning the window. Windows are
// expected to sit on the sampling grid (ISP bounds are whole minutes).
inline std::pair<std::size_t, std::size_t> window_indices(const SimTrace& trace,
                                                          const IspWindow& window) {
    window.validate();
    if (trace.samples.size() < 2) {
        throw std::invalid_argument("window_indices: trace too short");
    }
    const double dt_min = trace.dt_s / 60.0;
    const double first_exact = window.start_min / dt_min;
    const double last_exact = window.end_min / dt_min;
    const auto first = static_cast<std::size_t>(std::llround(first_exact));
    const auto last = static_cast<std::size_t>(std::llround(last_exact));
    if (std::abs(first_exact - static_cast<double>(first)) > 1e-6 ||
        std::abs(last_exact - static_cast<double>(last)) > 1e-6) {
        throw std::invalid_argument("window_indices: window not aligned to sample grid");
    }
    if (last >= trace.samples.size() || first >= last) {
        throw std::invalid_argument("window_indices: window outside trace horizon");
    }
    return {first, last};
}

} // namespace detail

// Trapezoidal energy of a trace signal over a settlement window, in MWh.
// Exact for piecewise-linear signals with kinks on the sampling grid.
inline double energy(const SimTrace& trace, Signal signal, const IspWindow& window) {
    const auto [first, last] = detail::window_indices(trace, window);
    const double dt_h = trace.dt_s / 3600.0;
    double sum = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        sum += 0.5 * (trace.signal(i, signal) + trace.signal(i + 1, signal)) * dt_h;
    }
    return sum;
}

struct PriceBounds {
    double c_pos = 0.0;
    double c_neg = 0.0;
};

// Imbalance price extrema for one window. DE prices are the time integrals of
// the positive/negative parts of the FRR request (hours scaling); segments
// crossing zero are split at the interpolated root so the integral is exact
// for the piecewise-linear sampled signal. NL prices scale the signed extrema
// of the request by 0.25 h. Applied literally, no clamping.
inline PriceBounds price_bounds(const SimTrace& trace, const IspWindow& window,
                                Mechanism mechanism) {
    const auto [first, last] = detail::window_indices(trace, window);
    PriceBounds out;
    if (mechanism == Mechanism::DE) {
        const double dt_h = trace.dt_s / 3600.0;
        for (std::size_t i = first; i < last; ++i) {
            const double a = trace.signal(i, Signal::FrrRequested);
            const double b = trace.signal(i + 1, Signal::FrrRequested);
            if (a >= 0.0 && b >= 0.0) {
                out.c_pos += 0.5 * (a + b) * dt_h;
            } else if (a <= 0.0 && b <= 0.0) {
                out.c_neg += 0.5 * (a + b) * dt_h;
            } else {
                // One sign change inside the segment: the positive and
                // negative parts are the two triangles around the root.
                const double frac_a = a / (a - b); // time fraction until the root
                const double area_a = 0.5 * a * frac_a * dt_h;
                const double area_b = 0.5 * b * (1.0 - frac_a) * dt_h;
                out.c_pos += std::max(area_a, 0.0) + std::max(area_b, 0.0);
                out.c_neg += std::min(area_a, 0.0) + std::min(area_b, 0.0);
            }
        }
    } else {
        double hi = trace.signal(first, Signal::FrrRequested);
        double lo = hi;
        for (std::size_t i = first + 1; i <= last; ++i) {
            const double v = trace.signal(i, Signal::FrrRequested);
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
        out.c_pos = 0.25 * hi;
        out.c_neg = 0.25 * lo;
    }
    return out;
}

// Counter-activation test for NL dual pricing: the FRR request must exceed
// +tol and fall below -tol within the window AND be non-monotone beyond tol
// (both a rise and a fall larger than tol somewhere in the window).
inline bool detect_dual(const SimTrace& trace, const IspWindow& window,
                        double tol_mw = 1.0) {
    const auto [first, last] = detail::window_indices(trace, window);
    double hi = trace.signal(first, Signal::FrrRequested);
    double lo = hi;
    bool has_rise = false;
    bool has_fall = false;
    for (std::size_t i = first + 1; i <= last; ++i) {
        const double v = trace.signal(i, Signal::FrrRequested);
        if (v - lo > tol_mw) has_rise = true;
        if (hi - v > tol_mw) has_fall = true;
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    const bool counter_activation = hi > tol_mw && lo < -tol_mw;
    return counter_activation && has_rise && has_fall;
}

struct BrpSettlement {
    double price_applied = 0.0;
    double payoff = 0.0;
};

// Settles one BRP's imbalance energy for one window. Single pricing applies
// the price of the dominant FRR direction to everyone; NL dual pricing
// instead charges each side the adverse price.
inline BrpSettlement settle(double e_b_mwh, double e_frr_mwh, double c_pos, double c_neg,
                            Mechanism mechanism, bool dual = false) {
    BrpSettlement out;
    if (mechanism == Mechanism::NL && dual) {
        if (e_b_mwh > 0.0) {
            out.price_applied = c_neg;
        } else if (e_b_mwh < 0.0) {
            out.price_applied = c_pos;
        }
    } else {
        if (e_frr_mwh > 0.0) {
            out.price_applied = c_pos;
        } else if (e_frr_mwh < 0.0) {
            out.price_applied = c_neg;
        }
        // e_frr == 0: no net FRR direction, price stays 0.
    }
    out.payoff = out.price_applied * e_b_mwh;
    return out;
}

// One settled window with both BRPs' positions.
struct Settlement {
    int isp = 0; // 1-based window index
    IspWindow window;
    double e_b1_mwh = 0.0;
    double e_b2_mwh = 0.0;
    double e_frr_mwh = 0.0;
    double c_pos = 0.0;
    double c_neg = 0.0;
    bool dual = false;
    double price_1 = 0.0;
    double price_2 = 0.0;
    double pi_1 = 0.0;
    double pi_2 = 0.0;
};

struct ScenarioPayoffs {
    double pi_1 = 0.0;
    double pi_2 = 0.0;
    std::vector<Settlement> settlements;
};

// Settles every window of the trace: each BRP's imbalance energy is the
// integral of its own reaction profile, FRR energy and prices come from the
// trace. Dual pricing can only trigger under NL.
inline ScenarioPayoffs scenario_payoffs(const SimTrace& trace,
                                        const InjectionProfile& reaction_1,
                                        const InjectionProfile& reaction_2,
                                        Mechanism mechanism, double isp_minutes = 15.0,
                                        double dual_tol_mw = 1.0) {
    ScenarioPayoffs out;
    for (const IspWindow& window : isp_windows(trace.horizon_min(), isp_minutes)) {
        Settlement s;
        s.isp = static_cast<int>(out.settlements.size()) + 1;
        s.window = window;
        s.e_b1_mwh = reaction_1.integral_mwh(window.start_min, window.end_min);
        s.e_b2_mwh = reaction_2.integral_mwh(window.start_min, window.end_min);
        s.e_frr_mwh = energy(trace, Signal::FrrRequested, window);
        const PriceBounds bounds = price_bounds(trace, window, mechanism);
        s.c_pos = bounds.c_pos;
        s.c_neg = bounds.c_neg;
        s.dual = mechanism == Mechanism::NL && detect_dual(trace, window, dual_tol_mw);
        const BrpSettlement b1 =
            settle(s.e_b1_mwh, s.e_frr_mwh, s.c_pos, s.c_neg, mechanism, s.dual);
        const BrpSettlement b2 =
            settle(s.e_b2_mwh, s.e_frr_mwh, s.c_pos, s.c_neg, mechanism, s.dual);
        s.price_1 = b1.price_applied;
        s.price_2 = b2.price_applied;
        s.pi_1 = b1.payoff;
        s.pi_2 = b2.payoff;
        out.pi_1 += s.pi_1;
        out.pi_2 += s.pi_2;
        out.settlements.push_back(s);
    }
    return out;
}

} // namespace smartbal
