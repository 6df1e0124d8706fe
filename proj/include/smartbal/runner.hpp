#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartbal/config.hpp"
#include "smartbal/csv.hpp"
#include "smartbal/ewa.hpp"
#include "smartbal/game.hpp"
#include "smartbal/grid.hpp"
#include "smartbal/hash.hpp"
#include "smartbal/pricing.hpp"
#include "smartbal/scenario.hpp"

namespace smartbal {

struct ManifestEntry {
    std::string path; // relative to the output directory
    std::string sha256;
};

struct Manifest {
    std::string config_hash;
    std::uint64_t root_seed = 0;
    std::vector<ManifestEntry> files;
};

// Serializes every artifact through one collection point: contents are built
// in memory, hashed, then written, so the manifest can never miss a file.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path out_dir) : out_dir_(std::move(out_dir)) {}

    void emit(const std::string& rel_path, const std::string& content) {
        const std::filesystem::path full = out_dir_ / rel_path;
        std::error_code ec;
        std::filesystem::create_directories(full.parent_path(), ec);
        std::ofstream out(full, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + full.string());
        }
        out << content;
        if (!out) {
            throw std::runtime_error("short write to " + full.string());
        }
        entries_.push_back({rel_path, sha256_hex(content)});
    }

    std::vector<ManifestEntry> sorted_entries() const {
        std::vector<ManifestEntry> out = entries_;
        std::sort(out.begin(), out.end(),
                  [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
        return out;
    }

    const std::filesystem::path& out_dir() const { return out_dir_; }

private:
    std::filesystem::path out_dir_;
    std::vector<ManifestEntry> entries_;
};

inline constexpr const char* kTraceCsvHeader =
    "t_min,delta_f_hz,p_frr_req_mw,p_frr_act_mw,p_fcr_mw,p_selfreg_mw,p_ace_mw\n";

inline std::string trace_csv(const SimTrace& trace) {
    std::string out = kTraceCsvHeader;
    out.reserve(out.size() + trace.samples.size() * 64);
    for (const TraceSample& s : trace.samples) {
        csv::row(out, s.t_min, s.delta_f_hz, s.p_frr_req_mw, s.p_frr_act_mw, s.p_fcr_mw,
                 s.p_selfreg_mw, s.p_ace_mw);
    }
    return out;
}

inline std::string settlements_csv(
    const std::vector<std::pair<std::string, Settlement>>& rows) {
    std::string out = "scenario,mechanism,isp,e_b1,e_b2,e_frr,c_pos,c_neg,dual,pi_1,pi_2\n";
    for (const auto& [scenario, s] : rows) {
        const std::string mechanism = scenario.substr(0, 2);
        csv::row(out, scenario, mechanism, s.isp, s.e_b1_mwh, s.e_b2_mwh, s.e_frr_mwh,
                 s.c_pos, s.c_neg, s.dual, s.pi_1, s.pi_2);
    }
    return out;
}

inline std::string payoff_tables_csv(const std::vector<PayoffTable>& tables) {
    std::string out = "mechanism,t_game_min,r_pct_per_min,g,l,g_over_gl\n";
    for (const PayoffTable& t : tables) {
        csv::row(out, to_string(t.mechanism), t.t_game_min, t.ramp_pct_per_min, t.g1, t.l1,
                 t.g1 / (t.g1 + t.l1));
    }
    return out;
}

inline std::string payoff_tables_long_csv(const std::vector<PayoffTable>& tables) {
    std::string out = "scenario,mechanism,t_game_min,r_pct_per_min,g1,g2,l1,l2,well_formed\n";
    for (const PayoffTable& t : tables) {
        csv::row(out, t.scenario, to_string(t.mechanism), t.t_game_min, t.ramp_pct_per_min,
                 t.g1, t.g2, t.l1, t.l2, t.well_formed());
    }
    return out;
}

inline std::string equilibria_csv(const std::vector<PayoffTable>& tables) {
    std::string out =
        "scenario,mechanism,pure_ne,mixed_p1,mixed_p2,overreaction,risk_dominant,note\n";
    for (const PayoffTable& t : tables) {
        std::string pure;
        for (const StrategyProfile& p : pure_nash(t)) {
            if (!pure.empty()) pure += '|';
            pure += p.label();
        }
        const MixedProfile mixed = mixed_nash(t);
        const RiskDominance rd = risk_dominant(t);
        const std::string note =
            rd == RiskDominance::None
                ? "tie: alternating the pure profiles would need coordination"
                : "";
        csv::row(out, t.scenario, to_string(t.mechanism), pure, mixed.p1, mixed.p2,
                 overreaction_probability(mixed), to_string(rd), note);
    }
    return out;
}

inline std::string sweep_stats_csv(const SweepResult& result) {
    std::string out =
        "mechanism,t_game_min,r_pct_per_min,l_plus_g,l_minus_g,beta_class,mean_p1p2,std_p1p2\n";
    for (const SweepCell& c : result.cells) {
        csv::row(out, to_string(c.mechanism), c.t_game_min, c.ramp_pct_per_min, c.l_plus_g,
                 c.l_minus_g, c.beta, c.mean_p1p2, c.std_p1p2);
    }
    return out;
}

inline std::string sweep_scatter_csv(const SweepResult& result) {
    std::string out = "mechanism,scenario,delta,alpha,kappa,beta,seed,p1_final,p2_final\n";
    for (const SweepRunRecord& r : result.runs) {
        csv::row(out, to_string(r.mechanism), r.scenario, r.delta, r.alpha, r.kappa, r.beta,
                 r.seed, r.p1_final, r.p2_final);
    }
    return out;
}

inline std::string trajectory_csv(const EwaRun& run) {
    std::string out = "k,p1,p2,p1p2\n";
    for (const EwaRecord& r : run.trajectory) {
        csv::row(out, r.k, r.p1, r.p2, r.p1 * r.p2);
    }
    return out;
}

// The simulated, globally normalized tables for every (mechanism, scenario).
inline std::vector<PayoffTable> simulated_tables(const ExperimentConfig& cfg) {
    std::vector<PayoffTable> tables;
    tables.reserve(cfg.mechanisms.size() * cfg.scenarios.size());
    for (Mechanism mechanism : cfg.mechanisms) {
        for (const ScenarioConfig& scenario : cfg.scenarios) {
            tables.push_back(
                build_payoff_table(scenario, mechanism, cfg.grid, cfg.dt_s, cfg.dual_tol_mw));
        }
    }
    return normalize_tables(tables);
}

// Tables fed to the equilibrium and learning layers: the built-in reference
// values when tables_from_paper is set, otherwise the simulated ones.
inline std::vector<PayoffTable> analysis_tables(const ExperimentConfig& cfg) {
    if (!cfg.tables_from_paper) {
        return simulated_tables(cfg);
    }
    const std::vector<PayoffTable> reference = reference_tables();
    std::vector<PayoffTable> selected;
    for (Mechanism mechanism : cfg.mechanisms) {
        for (const ScenarioConfig& scenario : cfg.scenarios) {
            const std::string id = scenario_id(mechanism, scenario);
            const auto it =
                std::find_if(reference.begin(), reference.end(),
                             [&](const PayoffTable& t) { return t.scenario == id; });
            if (it == reference.end()) {
                throw config_error("config: tables_from_paper is set but scenario " + id +
                                   " has no reference table (use the six default "
                                   "(t_game_min, ramp_pct_per_min) pairs)");
            }
            selected.push_back(*it);
        }
    }
    return selected;
}

namespace detail {

inline std::string profile_tag(const StrategyProfile& p) { return "p" + p.label(); }

// One scenario name without the mechanism prefix, for mechanism-independent
// artifacts (traces).
inline std::string scenario_tag(const ScenarioConfig& cfg) {
    return "T" + compact_number(cfg.t_game_min) + "_r" + compact_number(cfg.ramp_pct_per_min);
}

} // namespace detail

inline void emit_traces(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    for (const ScenarioConfig& scenario : cfg.scenarios) {
        for (const StrategyProfile profile :
             {StrategyProfile{0, 0}, StrategyProfile{1, 0}, StrategyProfile{1, 1}}) {
            const SimTrace trace = simulate(cfg.grid, assemble_inputs(scenario, profile),
                                            scenario.horizon_min, cfg.dt_s);
            writer.emit("traces/trace_" + detail::scenario_tag(scenario) + "_" +
                            detail::profile_tag(profile) + ".csv",
                        trace_csv(trace));
        }
    }
}

inline void emit_settlements(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    for (const StrategyProfile profile : {StrategyProfile{0, 0}, StrategyProfile{1, 0},
                                          StrategyProfile{0, 1}, StrategyProfile{1, 1}}) {
        std::vector<std::pair<std::string, Settlement>> rows;
        for (Mechanism mechanism : cfg.mechanisms) {
            for (const ScenarioConfig& scenario : cfg.scenarios) {
                const std::vector<InjectionProfile> inputs =
                    assemble_inputs(scenario, profile);
                const SimTrace trace =
                    simulate(cfg.grid, inputs, scenario.horizon_min, cfg.dt_s);
                const ScenarioPayoffs payoffs =
                    scenario_payoffs(trace, inputs[1], inputs[2], mechanism,
                                     scenario.isp_minutes, cfg.dual_tol_mw);
                for (const Settlement& s : payoffs.settlements) {
                    rows.emplace_back(scenario_id(mechanism, scenario), s);
                }
            }
        }
        writer.emit("settlements_" + detail::profile_tag(profile) + ".csv",
                    settlements_csv(rows));
    }
}

inline void emit_batch_trajectories(const ExperimentConfig& cfg,
                                    const std::vector<PayoffTable>& tables,
                                    ArtifactWriter& writer) {
    EwaParams params;
    params.delta = 0.25;
    params.alpha = 0.05;
    params.kappa = 1.0;
    params.beta = 1.0;
    params.batch_size = cfg.batch_size;
    params.mode = EwaMode::BatchSample;
    for (std::size_t ti = 0; ti < tables.size(); ++ti) {
        const PayoffTable& table = tables[ti];
        // Trajectories only for the fastest-reaction scenario of each mechanism.
        if (table.t_game_min != 1.0 || table.ramp_pct_per_min != 400.0) {
            continue;
        }
        for (int seed = 0; seed < 4; ++seed) {
            const EwaRun run = run_ewa(params, table, cfg.sweep.rounds,
                                       derive_seed(cfg.root_seed, 0xb47c4, ti, seed));
            writer.emit("trajectories/ewa_" + table.scenario + "_seed" +
                            std::to_string(seed) + ".csv",
                        trajectory_csv(run));
        }
    }
}

inline std::string manifest_json(const Manifest& manifest) {
    nlohmann::json j;
    j["config_hash"] = manifest.config_hash;
    j["root_seed"] = manifest.root_seed;
    j["files"] = nlohmann::json::array();
    for (const ManifestEntry& e : manifest.files) {
        j["files"].push_back({{"path", e.path}, {"sha256", e.sha256}});
    }
    return j.dump(2) + "\n";
}

// The full pipeline: traces, settlements, payoff tables, equilibria, the
// learning sweep, and sample learning trajectories, plus a manifest hashing
// every emitted file.
inline Manifest run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ArtifactWriter writer(cfg.out_dir);

    emit_traces(cfg, writer);
    emit_settlements(cfg, writer);

    const std::vector<PayoffTable> simulated = simulated_tables(cfg);
    writer.emit("payoff_tables.csv", payoff_tables_csv(simulated));
    writer.emit("payoff_tables_long.csv", payoff_tables_long_csv(simulated));

    const std::vector<PayoffTable> analyzed = analysis_tables(cfg);
    writer.emit("equilibria.csv", equilibria_csv(analyzed));

    const SweepResult swept = sweep(analyzed, cfg.sweep, cfg.root_seed, cfg.jobs);
    writer.emit("sweep_stats.csv", sweep_stats_csv(swept));
    writer.emit("sweep_scatter.csv", sweep_scatter_csv(swept));

    emit_batch_trajectories(cfg, analyzed, writer);

    Manifest manifest;
    manifest.config_hash = cfg.config_hash();
    manifest.root_seed = cfg.root_seed;
    manifest.files = writer.sorted_entries();
    writer.emit("manifest.json", manifest_json(manifest));
    return manifest;
}

} // namespace smartbal
