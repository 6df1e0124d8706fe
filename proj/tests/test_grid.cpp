#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "smartbal/grid.hpp"
#include "smartbal/scenario.hpp"

using namespace smartbal;
using Catch::Matchers::WithinAbs;

namespace {

InjectionProfile step(double t_min, double mw) {
    return InjectionProfile({{t_min, mw}});
}

double max_abs(const SimTrace& trace, Signal s) {
    double m = 0.0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        m = std::max(m, std::abs(trace.signal(i, s)));
    }
    return m;
}

} // namespace

TEST_CASE("zero input stays exactly at rest") {
    const SimTrace trace = simulate(GridParams::default_profile(), {}, 30.0);
    REQUIRE(trace.samples.size() == 1801);
    for (const TraceSample& s : trace.samples) {
        CHECK(s.delta_f_hz == 0.0);
        CHECK(s.p_frr_req_mw == 0.0);
        CHECK(s.p_fcr_mw == 0.0);
        CHECK(s.p_frr_act_mw == 0.0);
    }
}

TEST_CASE("first sample is the rest state even with an immediate step") {
    const SimTrace trace =
        simulate(GridParams::default_profile(), {step(0.0, -200.0)}, 15.0);
    CHECK(trace.samples.front().delta_f_hz == 0.0);
    CHECK(trace.samples.front().p_ace_mw == -200.0);
}

TEST_CASE("linearity: response is superposition of the parts") {
    const GridParams params = GridParams::default_profile();
    const InjectionProfile a = step(0.0, -200.0);
    const InjectionProfile b =
        InjectionProfile({{1.0, 0.0}, {1.25, 150.0}});

    const SimTrace both = simulate(params, {a, b}, 30.0);
    const SimTrace only_a = simulate(params, {a}, 30.0);
    const SimTrace only_b = simulate(params, {b}, 30.0);

    double max_rel = 0.0;
    for (std::size_t i = 0; i < both.samples.size(); ++i) {
        for (Signal s : {Signal::DeltaF, Signal::FrrRequested, Signal::Fcr}) {
            const double sum = only_a.signal(i, s) + only_b.signal(i, s);
            const double combined = both.signal(i, s);
            const double scale = std::max({std::abs(sum), std::abs(combined), 1e-12});
            max_rel = std::max(max_rel, std::abs(combined - sum) / scale);
        }
    }
    CHECK(max_rel < 1e-6);
}

TEST_CASE("scaling the injection scales the whole trace") {
    const GridParams params = GridParams::default_profile();
    const SimTrace one = simulate(params, {step(2.0, -100.0)}, 30.0);
    const SimTrace three = simulate(params, {step(2.0, -300.0)}, 30.0);
    for (std::size_t i = 0; i < one.samples.size(); i += 60) {
        CHECK_THAT(three.signal(i, Signal::FrrRequested),
                   WithinAbs(3.0 * one.signal(i, Signal::FrrRequested), 1e-6));
    }
}

TEST_CASE("constant deviation is met by an equal opposite FRR request") {
    const GridParams params = GridParams::default_profile();
    const double deviation = -200.0;
    const SimTrace trace = simulate(params, {step(0.0, deviation)}, 240.0);
    const TraceSample& last = trace.samples.back();
    CHECK_THAT(last.p_frr_req_mw, WithinAbs(steady_state_frr(params, deviation), 0.5));
    CHECK_THAT(last.p_frr_req_mw, WithinAbs(200.0, 0.5));
    CHECK_THAT(last.delta_f_hz, WithinAbs(0.0, 1e-4));
}

TEST_CASE("halving dt barely changes the trace") {
    const GridParams params = GridParams::default_profile();
    const SimTrace coarse = simulate(params, {step(0.0, -200.0)}, 30.0, 1.0);
    const SimTrace fine = simulate(params, {step(0.0, -200.0)}, 30.0, 0.5);
    const double scale = max_abs(coarse, Signal::FrrRequested);
    for (std::size_t i = 0; i < coarse.samples.size(); i += 30) {
        const double c = coarse.signal(i, Signal::FrrRequested);
        const double f = fine.signal(2 * i, Signal::FrrRequested);
        CHECK(std::abs(c - f) / scale < 1e-6);
    }
}

TEST_CASE("reduced imbalance with one reaction, counter-activation with two") {
    const GridParams params = GridParams::default_profile();
    ScenarioConfig cfg;
    cfg.t_game_min = 1.0;
    cfg.ramp_pct_per_min = 400.0;

    const SimTrace none = simulate(params, assemble_inputs(cfg, {0, 0}), 30.0);
    const SimTrace one = simulate(params, assemble_inputs(cfg, {1, 0}), 30.0);
    const SimTrace both = simulate(params, assemble_inputs(cfg, {1, 1}), 30.0);

    CHECK(max_abs(one, Signal::FrrRequested) < max_abs(none, Signal::FrrRequested));

    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < both.samples.size(); ++i) {
        lo = std::min(lo, both.signal(i, Signal::FrrRequested));
        hi = std::max(hi, both.signal(i, Signal::FrrRequested));
    }
    CHECK(hi > 1.0);  // shortage first: positive FRR needed
    CHECK(lo < -1.0); // overcompensation later: the request changes sign
}

TEST_CASE("parameter and step validation") {
    const GridParams params = GridParams::default_profile();
    CHECK_THROWS_AS(simulate(params, {}, 30.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(simulate(params, {}, 30.0, 5.0), std::invalid_argument); // > tau/5
    CHECK_THROWS_AS(simulate(params, {}, 0.025, 1.0), std::invalid_argument); // not a multiple

    GridParams bad = params;
    bad.t_inertia_s = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = params;
    bad.k_fcr_mw_per_hz = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("frequency dips on a shortage and fcr reacts against it") {
    const SimTrace trace =
        simulate(GridParams::default_profile(), {step(0.0, -200.0)}, 10.0);
    double min_f = 0.0;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        if (trace.samples[i].delta_f_hz < min_f) {
            min_f = trace.samples[i].delta_f_hz;
            argmin = i;
        }
    }
    CHECK(min_f < 0.0);
    CHECK(trace.samples[argmin].p_fcr_mw > 0.0);
    CHECK(trace.samples[argmin].p_selfreg_mw > 0.0);
}
