#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "smartbal/smartbal.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_jobs = true) {
    cmd->add_option("--config", opts.config_path, "experiment config JSON")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "output directory (or file, where noted)");
    cmd->add_option("--seed", opts.seed, "override the config root seed");
    if (with_jobs) {
        cmd->add_option("--jobs", opts.jobs, "worker threads (0 = hardware)");
    }
}

smartbal::ExperimentConfig resolve_config(const CommonOptions& opts) {
    smartbal::ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = smartbal::load_config(opts.config_path);
    }
    if (opts.seed) cfg.root_seed = *opts.seed;
    if (opts.jobs) cfg.jobs = *opts.jobs;
    if (!opts.out.empty()) cfg.out_dir = opts.out;
    return cfg;
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << content;
}

smartbal::StrategyProfile parse_profile(const std::string& text) {
    return {text[0] - '0', text[1] - '0'};
}

smartbal::ScenarioConfig select_scenario(const smartbal::ExperimentConfig& cfg,
                                         double t_game, double ramp) {
    for (const smartbal::ScenarioConfig& s : cfg.scenarios) {
        if (s.t_game_min == t_game && s.ramp_pct_per_min == ramp) {
            return s;
        }
    }
    smartbal::ScenarioConfig s = cfg.scenarios.front();
    s.t_game_min = t_game;
    s.ramp_pct_per_min = ramp;
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"smart balancing game toolkit"};
    app.require_subcommand(1);

    // simulate
    CommonOptions sim_opts;
    double sim_t_game = 1.0;
    double sim_ramp = 400.0;
    std::string sim_profile = "11";
    auto* sim = app.add_subcommand("simulate", "run one scenario and write its trace CSV");
    add_common(sim, sim_opts, false);
    sim->add_option("--t-game", sim_t_game, "T_game in minutes");
    sim->add_option("--ramp", sim_ramp, "reaction ramp in %/min");
    sim->add_option("--profile", sim_profile, "strategy profile: 00, 10, 01, 11")
        ->check(CLI::IsMember({"00", "10", "01", "11"}));

    // payoffs
    CommonOptions pay_opts;
    auto* pay = app.add_subcommand("payoffs", "simulate all scenarios into payoff tables");
    add_common(pay, pay_opts, false);

    // equilibria
    CommonOptions eq_opts;
    auto* eq = app.add_subcommand("equilibria", "equilibrium report per payoff table");
    add_common(eq, eq_opts, false);

    // ewa-run
    CommonOptions run_opts;
    std::string run_mechanism = "DE";
    double run_t_game = 1.0;
    double run_ramp = 400.0;
    double run_delta = 0.25;
    double run_alpha = 0.05;
    double run_kappa = 1.0;
    std::string run_beta = "1";
    std::string run_mode = "batch";
    int run_rounds = 100;
    auto* ewa_run = app.add_subcommand("ewa-run", "one learning trajectory CSV");
    add_common(ewa_run, run_opts, false);
    ewa_run->add_option("--mechanism", run_mechanism, "DE or NL")
        ->check(CLI::IsMember({"DE", "NL"}));
    ewa_run->add_option("--t-game", run_t_game, "scenario T_game in minutes");
    ewa_run->add_option("--ramp", run_ramp, "scenario ramp in %/min");
    ewa_run->add_option("--delta", run_delta, "forgone-payoff weight");
    ewa_run->add_option("--alpha", run_alpha, "memory loss");
    ewa_run->add_option("--kappa", run_kappa, "experience depreciation");
    ewa_run->add_option("--beta", run_beta, "choice intensity (number or inf)");
    ewa_run->add_option("--mode", run_mode, "batch or expected")
        ->check(CLI::IsMember({"batch", "expected"}));
    ewa_run->add_option("--rounds", run_rounds, "update rounds");

    // ewa-sweep
    CommonOptions sweep_opts;
    auto* sweep_cmd = app.add_subcommand("ewa-sweep", "full parameter sweep CSVs");
    add_common(sweep_cmd, sweep_opts);

    // reproduce
    CommonOptions rep_opts;
    auto* rep = app.add_subcommand("reproduce", "end-to-end pipeline with manifest");
    add_common(rep, rep_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*sim) {
            smartbal::ExperimentConfig cfg = resolve_config(sim_opts);
            const smartbal::ScenarioConfig scenario =
                select_scenario(cfg, sim_t_game, sim_ramp);
            const smartbal::StrategyProfile profile = parse_profile(sim_profile);
            const smartbal::SimTrace trace =
                smartbal::simulate(cfg.grid, smartbal::assemble_inputs(scenario, profile),
                                   scenario.horizon_min, cfg.dt_s);
            const std::string path = sim_opts.out.empty() ? "trace.csv" : sim_opts.out;
            write_file(path, smartbal::trace_csv(trace));
            std::cout << path << "\n";
        } else if (*pay) {
            smartbal::ExperimentConfig cfg = resolve_config(pay_opts);
            const std::vector<smartbal::PayoffTable> tables = smartbal::simulated_tables(cfg);
            smartbal::ArtifactWriter writer(cfg.out_dir);
            writer.emit("payoff_tables.csv", smartbal::payoff_tables_csv(tables));
            writer.emit("payoff_tables_long.csv", smartbal::payoff_tables_long_csv(tables));
            std::cout << (writer.out_dir() / "payoff_tables.csv").string() << "\n";
        } else if (*eq) {
            smartbal::ExperimentConfig cfg = resolve_config(eq_opts);
            const std::vector<smartbal::PayoffTable> tables = smartbal::analysis_tables(cfg);
            smartbal::ArtifactWriter writer(cfg.out_dir);
            writer.emit("equilibria.csv", smartbal::equilibria_csv(tables));
            std::cout << (writer.out_dir() / "equilibria.csv").string() << "\n";
        } else if (*ewa_run) {
            smartbal::ExperimentConfig cfg = resolve_config(run_opts);
            const smartbal::Mechanism mechanism =
                smartbal::mechanism_from_string(run_mechanism);
            const smartbal::ScenarioConfig scenario =
                select_scenario(cfg, run_t_game, run_ramp);
            smartbal::ExperimentConfig one = cfg;
            one.mechanisms = {mechanism};
            one.scenarios = {scenario};
            const smartbal::PayoffTable table = smartbal::analysis_tables(one).front();

            smartbal::EwaParams params;
            params.delta = run_delta;
            params.alpha = run_alpha;
            params.kappa = run_kappa;
            params.beta = run_beta == "inf"
                              ? std::numeric_limits<double>::infinity()
                              : std::stod(run_beta);
            params.batch_size = cfg.batch_size;
            params.mode = run_mode == "expected" ? smartbal::EwaMode::Expected
                                                 : smartbal::EwaMode::BatchSample;
            const smartbal::EwaRun run =
                smartbal::run_ewa(params, table, run_rounds, cfg.root_seed);
            const std::string path =
                run_opts.out.empty() ? "ewa_" + table.scenario + ".csv" : run_opts.out;
            write_file(path, smartbal::trajectory_csv(run));
            const smartbal::EwaRecord last = run.trajectory.back();
            std::cout << path << "\n"
                      << "fixed point: "
                      << to_string(smartbal::classify_fixed_point(last.p1, last.p2,
                                                                  cfg.fp_threshold))
                      << " (p1 = " << last.p1 << ", p2 = " << last.p2 << ")\n";
        } else if (*sweep_cmd) {
            smartbal::ExperimentConfig cfg = resolve_config(sweep_opts);
            const std::vector<smartbal::PayoffTable> tables = smartbal::analysis_tables(cfg);
            const smartbal::SweepResult result =
                smartbal::sweep(tables, cfg.sweep, cfg.root_seed, cfg.jobs);
            smartbal::ArtifactWriter writer(cfg.out_dir);
            writer.emit("sweep_stats.csv", smartbal::sweep_stats_csv(result));
            writer.emit("sweep_scatter.csv", smartbal::sweep_scatter_csv(result));
            std::cout << (writer.out_dir() / "sweep_stats.csv").string() << "\n";
        } else if (*rep) {
            smartbal::ExperimentConfig cfg = resolve_config(rep_opts);
            const smartbal::Manifest manifest = smartbal::run_experiment(cfg);
            std::cout << cfg.out_dir << "/manifest.json (" << manifest.files.size()
                      << " files, config " << manifest.config_hash.substr(0, 12) << ")\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
