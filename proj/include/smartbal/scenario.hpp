#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartbal/injection.hpp"

namespace smartbal {

enum class Mechanism { DE, NL };

inline const char* to_string(Mechanism m) {
    return m == Mechanism::DE ? "DE" : "NL";
}

inline Mechanism mechanism_from_string(const std::string& s) {
    if (s == "DE") return Mechanism::DE;
    if (s == "NL") return Mechanism::NL;
    throw std::invalid_argument("unknown mechanism '" + s + "' (expected DE or NL)");
}

// Per-BRP deviation from the shared scenario parameters, for asymmetric games.
struct BrpOverride {
    double t_game_min;
    double ramp_pct_per_min;
    double p_b_max_mw;
};

struct ScenarioConfig {
    double outage_mw = -200.0; // negative = shortage
    double outage_time_min = 0.0;
    double t_game_min = 1.0;
    double ramp_pct_per_min = 400.0;
    double p_b_max_mw = 150.0;
    double horizon_min = 30.0;
    double isp_minutes = 15.0;
    std::optional<BrpOverride> brp1;
    std::optional<BrpOverride> brp2;

    void validate() const {
        if (!std::isfinite(outage_mw)) {
            throw std::invalid_argument("ScenarioConfig: outage_mw must be finite");
        }
        if (!(outage_time_min >= 0.0) || !(outage_time_min < horizon_min)) {
            throw std::invalid_argument(
                "ScenarioConfig: require 0 <= outage_time_min < horizon_min");
        }
        if (!(isp_minutes > 0.0)) {
            throw std::invalid_argument("ScenarioConfig: isp_minutes must be > 0");
        }
        const double n_isp = horizon_min / isp_minutes;
        if (std::abs(n_isp - std::round(n_isp)) > 1e-9 || n_isp < 1.0) {
            throw std::invalid_argument(
                "ScenarioConfig: horizon_min must be a positive multiple of isp_minutes");
        }
        validate_brp(t_game_min, ramp_pct_per_min, p_b_max_mw);
        if (brp1) validate_brp(brp1->t_game_min, brp1->ramp_pct_per_min, brp1->p_b_max_mw);
        if (brp2) validate_brp(brp2->t_game_min, brp2->ramp_pct_per_min, brp2->p_b_max_mw);
    }

    BrpOverride brp(int index) const {
        const std::optional<BrpOverride>& o = index == 1 ? brp1 : brp2;
        if (index != 1 && index != 2) {
            throw std::invalid_argument("ScenarioConfig::brp: index must be 1 or 2");
        }
        if (o) return *o;
        return BrpOverride{t_game_min, ramp_pct_per_min, p_b_max_mw};
    }

    bool symmetric() const { return !brp1 && !brp2; }

private:
    void validate_brp(double t_game, double ramp, double p_max) const {
        if (!(t_game >= 0.0) || !(t_game < horizon_min)) {
            throw std::invalid_argument(
                "ScenarioConfig: require 0 <= t_game_min < horizon_min");
        }
        if (!(ramp > 0.0) || !std::isfinite(ramp)) {
            throw std::invalid_argument("ScenarioConfig: ramp_pct_per_min must be > 0");
        }
        if (!(p_max > 0.0) || !std::isfinite(p_max)) {
            throw std::invalid_argument("ScenarioConfig: p_b_max_mw must be > 0");
        }
    }
};

// Binary smart-balancing choices of the two BRPs.
struct StrategyProfile {
    int s1 = 0;
    int s2 = 0;

    void validate() const {
        if ((s1 != 0 && s1 != 1) || (s2 != 0 && s2 != 1)) {
            throw std::invalid_argument("StrategyProfile: components must be 0 or 1");
        }
    }

    int component(int brp) const { return brp == 1 ? s1 : s2; }

    std::string label() const { return std::to_string(s1) + std::to_string(s2); }

    bool operator==(const StrategyProfile&) const = default;
};

// Baseline disturbance: a step to outage_mw at outage_time, constant after.
inline InjectionProfile outage_profile(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.outage_mw == 0.0) {
        return InjectionProfile::zero();
    }
    return InjectionProfile({{cfg.outage_time_min, cfg.outage_mw}});
}

// Smart-balancing response: zero until t_game, then a ramp limited to
// (ramp_pct_per_min/100)·p_b_max MW per minute up to the asset cap, held to
// the horizon end.
inline InjectionProfile reaction_profile(double t_game_min, double ramp_pct_per_min,
                                         double p_b_max_mw) {
    const double ramp_minutes = 100.0 / ramp_pct_per_min;
    return InjectionProfile({{t_game_min, 0.0}, {t_game_min + ramp_minutes, p_b_max_mw}});
}

inline InjectionProfile reaction_profile(const ScenarioConfig& cfg, int brp = 1) {
    cfg.validate();
    const BrpOverride b = cfg.brp(brp);
    return reaction_profile(b.t_game_min, b.ramp_pct_per_min, b.p_b_max_mw);
}

// Injections for one played profile: [disturbance, BRP-1 reaction, BRP-2
// reaction], with non-players contributing identically zero profiles.
inline std::vector<InjectionProfile> assemble_inputs(const ScenarioConfig& cfg,
                                                     const StrategyProfile& profile) {
    cfg.validate();
    profile.validate();
    std::vector<InjectionProfile> inputs;
    inputs.reserve(3);
    inputs.push_back(outage_profile(cfg));
    inputs.push_back(profile.s1 ? reaction_profile(cfg, 1) : InjectionProfile::zero());
    inputs.push_back(profile.s2 ? reaction_profile(cfg, 2) : InjectionProfile::zero());
    return inputs;
}

namespace detail {

inline std::string compact_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace detail

// Canonical scenario identifier, e.g. "DE_T1_r400".
inline std::string scenario_id(Mechanism mechanism, const ScenarioConfig& cfg) {
    return std::string(to_string(mechanism)) + "_T" +
           detail::compact_number(cfg.t_game_min) + "_r" +
           detail::compact_number(cfg.ramp_pct_per_min);
}

} // namespace smartbal
