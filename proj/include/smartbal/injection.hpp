#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace smartbal {

struct Breakpoint {
    double t_min;
    double power_mw;
};

// Piecewise-linear active-power schedule deviation. Zero before the first
// breakpoint, linear interpolation between breakpoints, constant after the
// last one. A profile whose first breakpoint carries a nonzero power therefore
// steps from zero at that instant.
class InjectionProfile {
public:
    InjectionProfile() = default;

    explicit InjectionProfile(std::vector<Breakpoint> breakpoints)
        : breakpoints_(std::move(breakpoints)) {
        validate();
    }

    static InjectionProfile zero() { return InjectionProfile{}; }

    const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

    bool is_zero() const {
        return std::all_of(breakpoints_.begin(), breakpoints_.end(),
                           [](const Breakpoint& b) { return b.power_mw == 0.0; });
    }

    double value(double t_min) const {
        if (breakpoints_.empty() || t_min < breakpoints_.front().t_min) {
            return 0.0;
        }
        if (t_min >= breakpoints_.back().t_min) {
            return breakpoints_.back().power_mw;
        }
        for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
            const Breakpoint& lo = breakpoints_[i];
            const Breakpoint& hi = breakpoints_[i + 1];
            if (t_min >= lo.t_min && t_min <= hi.t_min) {
                const double w = (t_min - lo.t_min) / (hi.t_min - lo.t_min);
                return lo.power_mw + w * (hi.power_mw - lo.power_mw);
            }
        }
        return breakpoints_.back().power_mw;
    }

    // Exact integral of the profile over [a_min, b_min], returned in MWh.
    double integral_mwh(double a_min, double b_min) const {
        if (b_min < a_min) {
            throw std::invalid_argument("InjectionProfile::integral_mwh: empty window");
        }
        if (breakpoints_.empty()) {
            return 0.0;
        }
        // Split [a, b] at every interior breakpoint; each piece is linear.
        std::vector<double> cuts{a_min, b_min};
        for (const Breakpoint& bp : breakpoints_) {
            if (bp.t_min > a_min && bp.t_min < b_min) {
                cuts.push_back(bp.t_min);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        double mw_min = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double l = cuts[i];
            const double r = cuts[i + 1];
            // within a piece the profile is linear; evaluate at midpoint edges
            mw_min += 0.5 * (value_inside(l, r, l) + value_inside(l, r, r)) * (r - l);
        }
        return mw_min / 60.0;
    }

    InjectionProfile scaled(double factor) const {
        std::vector<Breakpoint> bps = breakpoints_;
        for (Breakpoint& b : bps) {
            b.power_mw *= factor;
        }
        return InjectionProfile(std::move(bps));
    }

private:
    // Value inside an open piece (l, r) that contains no interior breakpoint.
    // Avoids picking up the jump at the first breakpoint when evaluating the
    // piece's left edge exactly on it.
    double value_inside(double l, double r, double t) const {
        if (r <= breakpoints_.front().t_min) {
            return 0.0; // entire piece before the profile starts
        }
        (void)l;
        return value(t);
    }

    void validate() const {
        for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
            if (!std::isfinite(breakpoints_[i].t_min) ||
                !std::isfinite(breakpoints_[i].power_mw)) {
                throw std::invalid_argument("InjectionProfile: non-finite breakpoint");
            }
            if (i > 0 && breakpoints_[i].t_min <= breakpoints_[i - 1].t_min) {
                throw std::invalid_argument(
                    "InjectionProfile: breakpoint times must be strictly increasing");
            }
        }
    }

    std::vector<Breakpoint> breakpoints_;
};

} // namespace smartbal
