#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "smartbal/runner.hpp"

using namespace smartbal;
using Catch::Matchers::ContainsSubstring;

namespace fs = std::filesystem;

namespace {

ExperimentConfig parse_text(const std::string& text) {
    return parse_config_text(text, "<test>");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

// A deliberately small experiment so the full pipeline stays fast.
ExperimentConfig small_config(const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.out_dir = out_dir;
    cfg.scenarios = {default_scenarios()[0], default_scenarios()[3]}; // T1/r400, T5/r20
    cfg.sweep.deltas = {0.0, 0.25};
    cfg.sweep.alphas = {0.05};
    cfg.sweep.kappas = {1.0};
    cfg.sweep.n_seeds = 4;
    cfg.sweep.rounds = 25;
    return cfg;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / ("smartbal_" + name)) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("config defaults") {
    const ExperimentConfig cfg = parse_text("{}");
    CHECK(cfg.version == 1);
    CHECK(cfg.root_seed == 7);
    CHECK(cfg.jobs == 0);
    CHECK(cfg.dt_s == 1.0);
    CHECK(cfg.dual_tol_mw == 1.0);
    CHECK(cfg.tables_from_paper);
    CHECK(cfg.mechanisms.size() == 2);
    CHECK(cfg.scenarios.size() == 6);
    CHECK(cfg.scenarios[0].t_game_min == 1.0);
    CHECK(cfg.scenarios[0].ramp_pct_per_min == 400.0);
    CHECK(cfg.scenarios[5].t_game_min == 10.0);
    CHECK(cfg.scenarios[5].ramp_pct_per_min == 20.0);
    CHECK(cfg.sweep.deltas == std::vector<double>{0.0, 0.25, 0.5});
    CHECK(cfg.sweep.n_seeds == 100);
    CHECK(cfg.sweep.rounds == 100);
    CHECK(cfg.sweep.betas.size() == 2);
    CHECK(std::isinf(cfg.sweep.betas[1]));
    CHECK(cfg.grid.p_base_mw == 80000.0);
}

TEST_CASE("config overrides") {
    const ExperimentConfig cfg = parse_text(R"({
        "root_seed": 99,
        "jobs": 3,
        "grid": {"t_inertia_s": 12.0},
        "mechanisms": ["NL"],
        "scenarios": [{"t_game_min": 5, "ramp_pct_per_min": 20,
                       "brp2": {"ramp_pct_per_min": 40}}],
        "ewa": {"betas": [1, "inf"], "n_seeds": 10}
    })");
    CHECK(cfg.root_seed == 99);
    CHECK(cfg.jobs == 3);
    CHECK(cfg.grid.t_inertia_s == 12.0);
    CHECK(cfg.grid.p_base_mw == 80000.0); // untouched fields keep defaults
    REQUIRE(cfg.mechanisms.size() == 1);
    CHECK(cfg.mechanisms[0] == Mechanism::NL);
    REQUIRE(cfg.scenarios.size() == 1);
    CHECK(cfg.scenarios[0].t_game_min == 5.0);
    REQUIRE(cfg.scenarios[0].brp2.has_value());
    CHECK(cfg.scenarios[0].brp2->ramp_pct_per_min == 40.0);
    CHECK(cfg.scenarios[0].brp2->t_game_min == 5.0); // inherits the scenario value
    CHECK(cfg.sweep.n_seeds == 10);
    CHECK(parse_text(R"({"grid": "default"})").grid.k_fcr_mw_per_hz ==
          GridParams::default_profile().k_fcr_mw_per_hz);
}

TEST_CASE("config diagnostics name the offending path") {
    CHECK_THROWS_WITH(parse_text(R"({"sed": 1})"),
                      ContainsSubstring("$: unknown key 'sed'"));
    CHECK_THROWS_WITH(parse_text(R"({"grid": {"inertia": 10}})"),
                      ContainsSubstring("$.grid: unknown key 'inertia'"));
    CHECK_THROWS_WITH(parse_text(R"({"dt_s": "fast"})"),
                      ContainsSubstring("$.dt_s: expected a number"));
    CHECK_THROWS_WITH(parse_text(R"({"root_seed": -3})"),
                      ContainsSubstring("$.root_seed"));
    CHECK_THROWS_WITH(parse_text(R"({"mechanisms": ["DE", "UK"]})"),
                      ContainsSubstring("$.mechanisms[1]"));
    CHECK_THROWS_WITH(parse_text(R"({"scenarios": []})"),
                      ContainsSubstring("$.scenarios"));
    CHECK_THROWS_WITH(parse_text(R"({"scenarios": [{"t_game_min": 40}]})"),
                      ContainsSubstring("t_game_min"));
    CHECK_THROWS_WITH(parse_text(R"({"ewa": {"betas": ["sometimes"]}})"),
                      ContainsSubstring("$.ewa.betas[0]"));
    CHECK_THROWS_WITH(parse_text(R"({"grid": "german"})"),
                      ContainsSubstring("unknown grid profile"));
    CHECK_THROWS_WITH(parse_text("{not json"), ContainsSubstring("<test>"));
    CHECK_THROWS_AS(parse_text(R"({"version": 2})"), config_error);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), config_error);
}

TEST_CASE("config hash tracks the experiment, not the plumbing") {
    ExperimentConfig a;
    ExperimentConfig b;
    b.out_dir = "elsewhere";
    b.jobs = 13;
    CHECK(a.config_hash() == b.config_hash());
    CHECK(a.config_hash().size() == 64);

    ExperimentConfig c;
    c.root_seed = 8;
    CHECK(a.config_hash() != c.config_hash());

    SECTION("round-trips through its own JSON form") {
        const ExperimentConfig reparsed = parse_config(a.to_json());
        CHECK(reparsed.config_hash() == a.config_hash());
    }
}

TEST_CASE("analysis tables") {
    ExperimentConfig cfg = small_config("unused");
    SECTION("reference values are selected per scenario id") {
        const std::vector<PayoffTable> tables = analysis_tables(cfg);
        REQUIRE(tables.size() == 4);
        CHECK(tables[0].scenario == "DE_T1_r400");
        CHECK(tables[0].g1 == 0.28);
        CHECK(tables[1].scenario == "DE_T5_r20");
        CHECK(tables[2].scenario == "NL_T1_r400");
        CHECK(tables[3].l1 == 0.37);
    }
    SECTION("non-default scenarios have no reference row") {
        cfg.scenarios[0].t_game_min = 2.0;
        CHECK_THROWS_AS(analysis_tables(cfg), config_error);
    }
    SECTION("simulated tables are used when the flag is off") {
        cfg.tables_from_paper = false;
        const std::vector<PayoffTable> tables = analysis_tables(cfg);
        REQUIRE(tables.size() == 4);
        double max_g = 0.0;
        double max_l = 0.0;
        for (const PayoffTable& t : tables) {
            CHECK(t.well_formed());
            max_g = std::max(max_g, std::max(t.g1, t.g2));
            max_l = std::max(max_l, std::max(t.l1, t.l2));
        }
        CHECK_THAT(max_g + max_l, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("run_experiment writes a complete, self-verifying output tree") {
    TempDir dir("runner");
    const ExperimentConfig cfg = small_config((dir.path / "out").string());
    const Manifest manifest = run_experiment(cfg);

    const std::set<std::string> expected = {
        "traces/trace_T1_r400_p00.csv",    "traces/trace_T1_r400_p10.csv",
        "traces/trace_T1_r400_p11.csv",    "traces/trace_T5_r20_p00.csv",
        "traces/trace_T5_r20_p10.csv",     "traces/trace_T5_r20_p11.csv",
        "settlements_p00.csv",             "settlements_p10.csv",
        "settlements_p01.csv",             "settlements_p11.csv",
        "payoff_tables.csv",               "payoff_tables_long.csv",
        "equilibria.csv",                  "sweep_stats.csv",
        "sweep_scatter.csv",
        "trajectories/ewa_DE_T1_r400_seed0.csv",
        "trajectories/ewa_DE_T1_r400_seed1.csv",
        "trajectories/ewa_DE_T1_r400_seed2.csv",
        "trajectories/ewa_DE_T1_r400_seed3.csv",
        "trajectories/ewa_NL_T1_r400_seed0.csv",
        "trajectories/ewa_NL_T1_r400_seed1.csv",
        "trajectories/ewa_NL_T1_r400_seed2.csv",
        "trajectories/ewa_NL_T1_r400_seed3.csv",
    };

    SECTION("manifest covers every artifact with correct hashes") {
        REQUIRE(manifest.files.size() == expected.size());
        std::set<std::string> listed;
        for (const ManifestEntry& e : manifest.files) {
            listed.insert(e.path);
            CHECK(sha256_hex(read_file(dir.path / "out" / e.path)) == e.sha256);
        }
        CHECK(listed == expected);
        CHECK(manifest.config_hash == cfg.config_hash());
        CHECK(manifest.root_seed == 7);

        // the manifest file itself agrees with the returned struct
        const auto parsed = nlohmann::json::parse(read_file(dir.path / "out" / "manifest.json"));
        CHECK(parsed["config_hash"] == manifest.config_hash);
        CHECK(parsed["files"].size() == manifest.files.size());

        // and nothing else was written
        std::size_t on_disk = 0;
        for (const auto& entry : fs::recursive_directory_iterator(dir.path / "out")) {
            if (entry.is_regular_file()) ++on_disk;
        }
        CHECK(on_disk == expected.size() + 1); // + manifest.json
    }

    SECTION("csv headers are stable contracts") {
        CHECK(first_line(read_file(dir.path / "out" / "traces/trace_T1_r400_p00.csv")) ==
              "t_min,delta_f_hz,p_frr_req_mw,p_frr_act_mw,p_fcr_mw,p_selfreg_mw,p_ace_mw");
        CHECK(first_line(read_file(dir.path / "out" / "settlements_p10.csv")) ==
              "scenario,mechanism,isp,e_b1,e_b2,e_frr,c_pos,c_neg,dual,pi_1,pi_2");
        CHECK(first_line(read_file(dir.path / "out" / "payoff_tables.csv")) ==
              "mechanism,t_game_min,r_pct_per_min,g,l,g_over_gl");
        CHECK(first_line(read_file(dir.path / "out" / "sweep_stats.csv")) ==
              "mechanism,t_game_min,r_pct_per_min,l_plus_g,l_minus_g,beta_class,mean_p1p2,std_p1p2");
        CHECK(first_line(read_file(dir.path / "out" / "sweep_scatter.csv")) ==
              "mechanism,scenario,delta,alpha,kappa,beta,seed,p1_final,p2_final");
    }

    SECTION("row counts match the configured grid") {
        const std::string stats = read_file(dir.path / "out" / "sweep_stats.csv");
        const std::size_t lines = std::count(stats.begin(), stats.end(), '\n');
        CHECK(lines == 1 + 4 * 2); // header + tables x beta classes

        const std::string scatter = read_file(dir.path / "out" / "sweep_scatter.csv");
        const std::size_t scatter_lines = std::count(scatter.begin(), scatter.end(), '\n');
        CHECK(scatter_lines == 1 + 4 * 2 * 2 * 4); // tables x betas x combos x seeds

        const std::string settle = read_file(dir.path / "out" / "settlements_p11.csv");
        CHECK(std::count(settle.begin(), settle.end(), '\n') == 1 + 2 * 2 * 2);

        const std::string traj =
            read_file(dir.path / "out" / "trajectories/ewa_DE_T1_r400_seed0.csv");
        CHECK(std::count(traj.begin(), traj.end(), '\n') ==
              static_cast<long>(2 + cfg.sweep.rounds)); // header + k=0..rounds
    }
}

TEST_CASE("run_experiment output is byte-stable across job counts and reruns") {
    TempDir dir("runner_jobs");
    ExperimentConfig serial = small_config((dir.path / "a").string());
    serial.jobs = 1;
    ExperimentConfig threaded = small_config((dir.path / "b").string());
    threaded.jobs = 3;
    ExperimentConfig again = small_config((dir.path / "c").string());
    again.jobs = 3;

    run_experiment(serial);
    run_experiment(threaded);
    run_experiment(again);

    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir.path / "a")) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), dir.path / "a");
        const std::string want = read_file(entry.path());
        INFO(rel.string());
        CHECK(read_file(dir.path / "b" / rel) == want);
        CHECK(read_file(dir.path / "c" / rel) == want);
        ++compared;
    }
    CHECK(compared == 24); // 23 artifacts + manifest.json
}
