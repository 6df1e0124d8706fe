#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "smartbal/scenario.hpp"

using namespace smartbal;
using Catch::Matchers::WithinAbs;

TEST_CASE("outage profile is a step at the outage time") {
    ScenarioConfig cfg;
    SECTION("default: -200 MW from t = 0") {
        const InjectionProfile p = outage_profile(cfg);
        CHECK(p.value(-0.1) == 0.0);
        CHECK(p.value(0.0) == -200.0);
        CHECK(p.value(29.0) == -200.0);
    }
    SECTION("zero outage gives the zero profile") {
        cfg.outage_mw = 0.0;
        CHECK(outage_profile(cfg).is_zero());
    }
    SECTION("delayed outage") {
        cfg.outage_time_min = 5.0;
        const InjectionProfile p = outage_profile(cfg);
        CHECK(p.value(4.9) == 0.0);
        CHECK(p.value(5.1) == -200.0);
    }
}

TEST_CASE("reaction profile ramps at the allowed rate and holds") {
    SECTION("slow assets: 20 %/min reaches the cap after five minutes") {
        const InjectionProfile p = reaction_profile(1.0, 20.0, 150.0);
        CHECK(p.value(0.5) == 0.0);
        CHECK(p.value(1.0) == 0.0);
        CHECK_THAT(p.value(3.5), WithinAbs(75.0, 1e-12)); // 30 MW/min slope
        CHECK_THAT(p.value(6.0), WithinAbs(150.0, 1e-12));
        CHECK(p.value(30.0) == 150.0);
    }
    SECTION("fast assets: 400 %/min reaches the cap at t = 1.25 min") {
        const InjectionProfile p = reaction_profile(1.0, 400.0, 150.0);
        CHECK_THAT(p.value(1.25), WithinAbs(150.0, 1e-12));
        CHECK(p.value(1.2) < 150.0);
    }
    SECTION("ramp-rate invariant holds for every breakpoint pair") {
        for (double ramp : {20.0, 400.0, 37.5}) {
            const InjectionProfile p = reaction_profile(2.0, ramp, 150.0);
            const auto& bps = p.breakpoints();
            for (std::size_t i = 1; i < bps.size(); ++i) {
                const double slope = (bps[i].power_mw - bps[i - 1].power_mw) /
                                     (bps[i].t_min - bps[i - 1].t_min);
                CHECK(std::abs(slope) <= ramp / 100.0 * 150.0 + 1e-9);
            }
        }
    }
}

TEST_CASE("assemble_inputs includes exactly the played reactions") {
    ScenarioConfig cfg;
    SECTION("(0,0): only the outage") {
        const auto inputs = assemble_inputs(cfg, {0, 0});
        REQUIRE(inputs.size() == 3);
        CHECK(inputs[0].value(10.0) == -200.0);
        CHECK(inputs[1].is_zero());
        CHECK(inputs[2].is_zero());
    }
    SECTION("(1,0): outage plus one reaction") {
        const auto inputs = assemble_inputs(cfg, {1, 0});
        CHECK(inputs[1].value(20.0) == 150.0);
        CHECK(inputs[2].is_zero());
    }
    SECTION("(1,1): long-run net deviation flips sign") {
        const auto inputs = assemble_inputs(cfg, {1, 1});
        double net = 0.0;
        for (const InjectionProfile& p : inputs) {
            net += p.value(29.0);
        }
        CHECK_THAT(net, WithinAbs(100.0, 1e-12));
    }
    SECTION("adding a reaction never lowers the net injection") {
        const auto none = assemble_inputs(cfg, {0, 0});
        const auto one = assemble_inputs(cfg, {1, 0});
        const auto both = assemble_inputs(cfg, {1, 1});
        for (double t = 0.0; t <= 30.0; t += 0.25) {
            const double v0 = none[0].value(t) + none[1].value(t) + none[2].value(t);
            const double v1 = one[0].value(t) + one[1].value(t) + one[2].value(t);
            const double v2 = both[0].value(t) + both[1].value(t) + both[2].value(t);
            REQUIRE(v1 >= v0);
            REQUIRE(v2 >= v1);
        }
    }
}

TEST_CASE("per-BRP overrides make the game asymmetric") {
    ScenarioConfig cfg;
    cfg.brp2 = BrpOverride{5.0, 20.0, 100.0};
    const InjectionProfile r1 = reaction_profile(cfg, 1);
    const InjectionProfile r2 = reaction_profile(cfg, 2);
    CHECK(r1.value(2.0) == 150.0);
    CHECK(r2.value(2.0) == 0.0);
    CHECK_THAT(r2.value(10.0), WithinAbs(100.0, 1e-12));
}

TEST_CASE("scenario ids") {
    ScenarioConfig cfg;
    CHECK(scenario_id(Mechanism::DE, cfg) == "DE_T1_r400");
    cfg.t_game_min = 10.0;
    cfg.ramp_pct_per_min = 20.0;
    CHECK(scenario_id(Mechanism::NL, cfg) == "NL_T10_r20");
}

TEST_CASE("config validation rejects bad scenarios") {
    ScenarioConfig cfg;
    SECTION("t_game beyond the horizon") {
        cfg.t_game_min = 31.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SECTION("nonpositive ramp") {
        cfg.ramp_pct_per_min = 0.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SECTION("horizon not a multiple of the ISP length") {
        cfg.horizon_min = 20.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SECTION("strategy components must be binary") {
        CHECK_THROWS_AS((StrategyProfile{2, 0}.validate()), std::invalid_argument);
    }
}
