#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartbal/grid.hpp"
#include "smartbal/pricing.hpp"
#include "smartbal/scenario.hpp"

namespace smartbal {

// 2x2 smart-balancing game. Acting alone earns g_b, acting together costs
// l_b (stored positive), staying out pays 0:
//
//              S_2 = 0        S_2 = 1
//   S_1 = 0    (0, 0)         (0, g_2)
//   S_1 = 1    (g_1, 0)       (-l_1, -l_2)
struct PayoffTable {
    double g1 = 0.0;
    double g2 = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    std::string scenario;
    Mechanism mechanism = Mechanism::DE;
    double t_game_min = 0.0;
    double ramp_pct_per_min = 0.0;

    // Tables with non-positive gains or losses fall outside the game
    // structure above and are flagged rather than silently analyzed.
    bool well_formed() const { return g1 > 0.0 && g2 > 0.0 && l1 > 0.0 && l2 > 0.0; }

    double payoff_1(int s1, int s2) const {
        if (s1 == 0) return 0.0;
        return s2 == 0 ? g1 : -l1;
    }
    double payoff_2(int s1, int s2) const {
        if (s2 == 0) return 0.0;
        return s1 == 0 ? g2 : -l2;
    }
};

struct MixedProfile {
    double p1 = 0.0; // probability BRP 1 plays S = 1
    double p2 = 0.0;
};

// Builds the game for one scenario by simulating the three non-trivial
// strategy profiles and settling each: g_b is b's payoff acting alone, l_b
// the (positive) magnitude of its payoff when both act.
inline PayoffTable build_payoff_table(const ScenarioConfig& cfg, Mechanism mechanism,
                                      const GridParams& grid, double dt_s = 1.0,
                                      double dual_tol_mw = 1.0) {
    cfg.validate();
    PayoffTable table;
    table.scenario = scenario_id(mechanism, cfg);
    table.mechanism = mechanism;
    table.t_game_min = cfg.t_game_min;
    table.ramp_pct_per_min = cfg.ramp_pct_per_min;

    auto settle_profile = [&](int s1, int s2) {
        const StrategyProfile profile{s1, s2};
        const std::vector<InjectionProfile> inputs = assemble_inputs(cfg, profile);
        const SimTrace trace = simulate(grid, inputs, cfg.horizon_min, dt_s);
        return scenario_payoffs(trace, inputs[1], inputs[2], mechanism, cfg.isp_minutes,
                                dual_tol_mw);
    };

    table.g1 = settle_profile(1, 0).pi_1;
    table.g2 = settle_profile(0, 1).pi_2;
    const ScenarioPayoffs both = settle_profile(1, 1);
    table.l1 = -both.pi_1;
    table.l2 = -both.pi_2;
    return table;
}

// Rescales all tables by the shared factor max(g) + max(l), taken across the
// WHOLE set, so the largest gain and largest loss sum to one.
inline std::vector<PayoffTable> normalize_tables(const std::vector<PayoffTable>& tables) {
    if (tables.empty()) {
        throw std::invalid_argument("normalize_tables: empty table set");
    }
    double max_g = 0.0;
    double max_l = 0.0;
    for (const PayoffTable& t : tables) {
        if (!t.well_formed()) {
            throw std::invalid_argument("normalize_tables: table " + t.scenario +
                                        " is not well-formed");
        }
        max_g = std::max(max_g, std::max(t.g1, t.g2));
        max_l = std::max(max_l, std::max(t.l1, t.l2));
    }
    const double scale = max_g + max_l;
    std::vector<PayoffTable> out = tables;
    for (PayoffTable& t : out) {
        t.g1 /= scale;
        t.g2 /= scale;
        t.l1 /= scale;
        t.l2 /= scale;
    }
    return out;
}

// Pure Nash equilibria by weak best-response enumeration over the four cells.
inline std::vector<StrategyProfile> pure_nash(const PayoffTable& table) {
    std::vector<StrategyProfile> out;
    for (int s1 : {0, 1}) {
        for (int s2 : {0, 1}) {
            const bool br1 = table.payoff_1(s1, s2) >= table.payoff_1(1 - s1, s2);
            const bool br2 = table.payoff_2(s1, s2) >= table.payoff_2(s1, 1 - s2);
            if (br1 && br2) {
                out.push_back({s1, s2});
            }
        }
    }
    return out;
}

// Mixed equilibrium: each probability is set to make the OPPONENT indifferent
// between acting and not, so p_1 depends on BRP 2's stakes and vice versa.
inline MixedProfile mixed_nash(const PayoffTable& table) {
    if (table.g2 + table.l2 == 0.0 || table.g1 + table.l1 == 0.0) {
        throw std::domain_error("mixed_nash: degenerate table, g + l = 0");
    }
    return {table.g2 / (table.g2 + table.l2), table.g1 / (table.g1 + table.l1)};
}

inline double overreaction_probability(const MixedProfile& profile) {
    return profile.p1 * profile.p2;
}

enum class RiskDominance {
    Brp1Acts, // (1,0)
    Brp2Acts, // (0,1)
    None,
};

inline const char* to_string(RiskDominance rd) {
    switch (rd) {
    case RiskDominance::Brp1Acts: return "10";
    case RiskDominance::Brp2Acts: return "01";
    case RiskDominance::None: return "none";
    }
    return "none";
}

// Risk-dominance selection between the two pure equilibria: the BRP with the
// larger g/(g+l) ratio acts. Symmetric games tie and select nothing.
inline RiskDominance risk_dominant(const PayoffTable& table) {
    const double ratio_1 = table.g1 / (table.g1 + table.l1);
    const double ratio_2 = table.g2 / (table.g2 + table.l2);
    if (ratio_1 > ratio_2) return RiskDominance::Brp1Acts;
    if (ratio_1 < ratio_2) return RiskDominance::Brp2Acts;
    return RiskDominance::None;
}

} // namespace smartbal
