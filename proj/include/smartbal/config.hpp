#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartbal/ewa.hpp"
#include "smartbal/game.hpp"
#include "smartbal/grid.hpp"
#include "smartbal/hash.hpp"
#include "smartbal/scenario.hpp"

namespace smartbal {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The six default (T_game, ramp) scenarios, in report row order.
inline std::vector<ScenarioConfig> default_scenarios() {
    std::vector<ScenarioConfig> out;
    for (double t_game : {1.0, 5.0, 10.0}) {
        for (double ramp : {400.0, 20.0}) {
            ScenarioConfig cfg;
            cfg.t_game_min = t_game;
            cfg.ramp_pct_per_min = ramp;
            out.push_back(cfg);
        }
    }
    return out;
}

// Published normalized (g, l) values for the twelve default scenarios; used
// when the tables_from_paper config flag asks for literal table inputs
// instead of simulated ones.
inline std::vector<PayoffTable> reference_tables() {
    struct Row {
        Mechanism mechanism;
        double t_game;
        double ramp;
        double g;
        double l;
    };
    static const Row rows[] = {
        {Mechanism::DE, 1, 400, 0.28, 0.44},  {Mechanism::DE, 1, 20, 0.31, 0.35},
        {Mechanism::DE, 5, 400, 0.32, 0.19},  {Mechanism::DE, 5, 20, 0.32, 0.15},
        {Mechanism::DE, 10, 400, 0.30, 0.13}, {Mechanism::DE, 10, 20, 0.27, 0.11},
        {Mechanism::NL, 1, 400, 0.30, 0.55},  {Mechanism::NL, 1, 20, 0.37, 0.48},
        {Mechanism::NL, 5, 400, 0.45, 0.44},  {Mechanism::NL, 5, 20, 0.42, 0.37},
        {Mechanism::NL, 10, 400, 0.43, 0.30}, {Mechanism::NL, 10, 20, 0.45, 0.19},
    };
    std::vector<PayoffTable> tables;
    tables.reserve(std::size(rows));
    for (const Row& r : rows) {
        PayoffTable t;
        t.g1 = t.g2 = r.g;
        t.l1 = t.l2 = r.l;
        t.mechanism = r.mechanism;
        t.t_game_min = r.t_game;
        t.ramp_pct_per_min = r.ramp;
        ScenarioConfig cfg;
        cfg.t_game_min = r.t_game;
        cfg.ramp_pct_per_min = r.ramp;
        t.scenario = scenario_id(r.mechanism, cfg);
        tables.push_back(t);
    }
    return tables;
}

struct ExperimentConfig {
    int version = 1;
    std::uint64_t root_seed = 7;
    std::string out_dir = "out";
    int jobs = 0; // 0 = use hardware concurrency
    double dt_s = 1.0;
    double dual_tol_mw = 1.0;
    bool tables_from_paper = true;
    GridParams grid;
    std::vector<Mechanism> mechanisms{Mechanism::DE, Mechanism::NL};
    std::vector<ScenarioConfig> scenarios = default_scenarios();
    SweepGrid sweep;
    int batch_size = 100;
    double fp_threshold = 0.1;

    void validate() const {
        if (version != 1) {
            throw config_error("config: $.version: unsupported version " +
                               std::to_string(version));
        }
        if (scenarios.empty()) {
            throw config_error("config: $.scenarios: at least one scenario required");
        }
        if (mechanisms.empty()) {
            throw config_error("config: $.mechanisms: at least one mechanism required");
        }
        if (!(dt_s > 0.0)) {
            throw config_error("config: $.dt_s: must be > 0");
        }
        if (!(dual_tol_mw >= 0.0)) {
            throw config_error("config: $.dual_tol_mw: must be >= 0");
        }
        if (batch_size < 1) {
            throw config_error("config: $.ewa.batch_size: must be >= 1");
        }
        if (!(fp_threshold > 0.0 && fp_threshold < 0.5)) {
            throw config_error("config: $.ewa.fp_threshold: must be in (0, 0.5)");
        }
        try {
            grid.validate();
            for (const ScenarioConfig& s : scenarios) {
                s.validate();
            }
            sweep.validate();
        } catch (const std::invalid_argument& e) {
            throw config_error(std::string("config: ") + e.what());
        }
    }

    // Canonical JSON form. Output plumbing (out_dir, jobs) is excluded from
    // the hashed form so the same experiment hashes identically wherever it
    // is written and however it is parallelized.
    nlohmann::json to_json(bool include_output_fields = true) const {
        nlohmann::json j;
        j["version"] = version;
        j["root_seed"] = root_seed;
        if (include_output_fields) {
            j["out_dir"] = out_dir;
            j["jobs"] = jobs;
        }
        j["dt_s"] = dt_s;
        j["dual_tol_mw"] = dual_tol_mw;
        j["tables_from_paper"] = tables_from_paper;
        j["grid"] = {
            {"t_inertia_s", grid.t_inertia_s},
            {"p_base_mw", grid.p_base_mw},
            {"k_fcr_mw_per_hz", grid.k_fcr_mw_per_hz},
            {"t_fcr_act_s", grid.t_fcr_act_s},
            {"k_load_mw_per_hz", grid.k_load_mw_per_hz},
            {"k_afrr", grid.k_afrr},
            {"t_afrr_s", grid.t_afrr_s},
            {"t_afrr_act_s", grid.t_afrr_act_s},
            {"f_nominal_hz", grid.f_nominal_hz},
        };
        j["mechanisms"] = nlohmann::json::array();
        for (Mechanism m : mechanisms) {
            j["mechanisms"].push_back(to_string(m));
        }
        j["scenarios"] = nlohmann::json::array();
        for (const ScenarioConfig& s : scenarios) {
            nlohmann::json js = {
                {"outage_mw", s.outage_mw},
                {"outage_time_min", s.outage_time_min},
                {"t_game_min", s.t_game_min},
                {"ramp_pct_per_min", s.ramp_pct_per_min},
                {"p_b_max_mw", s.p_b_max_mw},
                {"horizon_min", s.horizon_min},
                {"isp_minutes", s.isp_minutes},
            };
            auto add_override = [&](const char* key, const std::optional<BrpOverride>& o) {
                if (o) {
                    js[key] = {
                        {"t_game_min", o->t_game_min},
                        {"ramp_pct_per_min", o->ramp_pct_per_min},
                        {"p_b_max_mw", o->p_b_max_mw},
                    };
                }
            };
            add_override("brp1", s.brp1);
            add_override("brp2", s.brp2);
            j["scenarios"].push_back(js);
        }
        auto beta_value = [](double b) {
            return std::isinf(b) ? nlohmann::json("inf") : nlohmann::json(b);
        };
        nlohmann::json betas = nlohmann::json::array();
        for (double b : sweep.betas) {
            betas.push_back(beta_value(b));
        }
        j["ewa"] = {
            {"deltas", sweep.deltas},
            {"alphas", sweep.alphas},
            {"kappas", sweep.kappas},
            {"betas", betas},
            {"n_seeds", sweep.n_seeds},
            {"rounds", sweep.rounds},
            {"batch_size", batch_size},
            {"fp_threshold", fp_threshold},
        };
        return j;
    }

    std::string config_hash() const { return sha256_hex(to_json(false).dump()); }
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw config_error("config: " + path + ": unknown key '" + it.key() + "'");
        }
    }
}

inline double as_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) {
        throw config_error("config: " + path + ": expected a number");
    }
    return j.get<double>();
}

inline int as_int(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        throw config_error("config: " + path + ": expected an integer");
    }
    return j.get<int>();
}

inline std::uint64_t as_u64(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        throw config_error("config: " + path + ": expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

inline bool as_bool(const nlohmann::json& j, const std::string& path) {
    if (!j.is_boolean()) {
        throw config_error("config: " + path + ": expected true or false");
    }
    return j.get<bool>();
}

inline std::string as_string(const nlohmann::json& j, const std::string& path) {
    if (!j.is_string()) {
        throw config_error("config: " + path + ": expected a string");
    }
    return j.get<std::string>();
}

inline std::vector<double> as_number_list(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        throw config_error("config: " + path + ": expected a nonempty array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline double as_beta(const nlohmann::json& j, const std::string& path) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "infinity") {
            return std::numeric_limits<double>::infinity();
        }
        throw config_error("config: " + path + ": expected a number or \"inf\"");
    }
    return as_number(j, path);
}

inline GridParams parse_grid(const nlohmann::json& j, const std::string& path) {
    GridParams grid = GridParams::default_profile();
    if (j.is_string()) {
        if (j.get<std::string>() != "default") {
            throw config_error("config: " + path + ": unknown grid profile '" +
                               j.get<std::string>() + "' (use \"default\" or an object)");
        }
        return grid;
    }
    if (!j.is_object()) {
        throw config_error("config: " + path + ": expected \"default\" or an object");
    }
    check_keys(j, path,
               {"t_inertia_s", "p_base_mw", "k_fcr_mw_per_hz", "t_fcr_act_s",
                "k_load_mw_per_hz", "k_afrr", "t_afrr_s", "t_afrr_act_s", "f_nominal_hz"});
    auto set = [&](const char* key, double& field) {
        if (j.contains(key)) {
            field = as_number(j[key], path + "." + key);
        }
    };
    set("t_inertia_s", grid.t_inertia_s);
    set("p_base_mw", grid.p_base_mw);
    set("k_fcr_mw_per_hz", grid.k_fcr_mw_per_hz);
    set("t_fcr_act_s", grid.t_fcr_act_s);
    set("k_load_mw_per_hz", grid.k_load_mw_per_hz);
    set("k_afrr", grid.k_afrr);
    set("t_afrr_s", grid.t_afrr_s);
    set("t_afrr_act_s", grid.t_afrr_act_s);
    set("f_nominal_hz", grid.f_nominal_hz);
    return grid;
}

inline BrpOverride parse_brp_override(const nlohmann::json& j, const std::string& path,
                                      const ScenarioConfig& base) {
    if (!j.is_object()) {
        throw config_error("config: " + path + ": expected an object");
    }
    check_keys(j, path, {"t_game_min", "ramp_pct_per_min", "p_b_max_mw"});
    BrpOverride o{base.t_game_min, base.ramp_pct_per_min, base.p_b_max_mw};
    if (j.contains("t_game_min")) o.t_game_min = as_number(j["t_game_min"], path + ".t_game_min");
    if (j.contains("ramp_pct_per_min"))
        o.ramp_pct_per_min = as_number(j["ramp_pct_per_min"], path + ".ramp_pct_per_min");
    if (j.contains("p_b_max_mw")) o.p_b_max_mw = as_number(j["p_b_max_mw"], path + ".p_b_max_mw");
    return o;
}

inline ScenarioConfig parse_scenario(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) {
        throw config_error("config: " + path + ": expected an object");
    }
    check_keys(j, path,
               {"outage_mw", "outage_time_min", "t_game_min", "ramp_pct_per_min",
                "p_b_max_mw", "horizon_min", "isp_minutes", "brp1", "brp2"});
    ScenarioConfig s;
    auto set = [&](const char* key, double& field) {
        if (j.contains(key)) {
            field = as_number(j[key], path + "." + key);
        }
    };
    set("outage_mw", s.outage_mw);
    set("outage_time_min", s.outage_time_min);
    set("t_game_min", s.t_game_min);
    set("ramp_pct_per_min", s.ramp_pct_per_min);
    set("p_b_max_mw", s.p_b_max_mw);
    set("horizon_min", s.horizon_min);
    set("isp_minutes", s.isp_minutes);
    if (j.contains("brp1")) s.brp1 = parse_brp_override(j["brp1"], path + ".brp1", s);
    if (j.contains("brp2")) s.brp2 = parse_brp_override(j["brp2"], path + ".brp2", s);
    return s;
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw config_error("config: $: expected a JSON object");
    }
    detail::check_keys(j, "$",
                       {"version", "root_seed", "out_dir", "jobs", "dt_s", "dual_tol_mw",
                        "tables_from_paper", "grid", "mechanisms", "scenarios", "ewa"});
    ExperimentConfig cfg;
    if (j.contains("version")) cfg.version = detail::as_int(j["version"], "$.version");
    if (j.contains("root_seed")) cfg.root_seed = detail::as_u64(j["root_seed"], "$.root_seed");
    if (j.contains("out_dir")) cfg.out_dir = detail::as_string(j["out_dir"], "$.out_dir");
    if (j.contains("jobs")) cfg.jobs = detail::as_int(j["jobs"], "$.jobs");
    if (j.contains("dt_s")) cfg.dt_s = detail::as_number(j["dt_s"], "$.dt_s");
    if (j.contains("dual_tol_mw"))
        cfg.dual_tol_mw = detail::as_number(j["dual_tol_mw"], "$.dual_tol_mw");
    if (j.contains("tables_from_paper"))
        cfg.tables_from_paper = detail::as_bool(j["tables_from_paper"], "$.tables_from_paper");
    if (j.contains("grid")) cfg.grid = detail::parse_grid(j["grid"], "$.grid");
    if (j.contains("mechanisms")) {
        const nlohmann::json& ms = j["mechanisms"];
        if (!ms.is_array()) {
            throw config_error("config: $.mechanisms: expected an array");
        }
        cfg.mechanisms.clear();
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const std::string path = "$.mechanisms[" + std::to_string(i) + "]";
            try {
                cfg.mechanisms.push_back(
                    mechanism_from_string(detail::as_string(ms[i], path)));
            } catch (const std::invalid_argument& e) {
                throw config_error("config: " + path + ": " + e.what());
            }
        }
    }
    if (j.contains("scenarios")) {
        const nlohmann::json& ss = j["scenarios"];
        if (!ss.is_array()) {
            throw config_error("config: $.scenarios: expected an array");
        }
        cfg.scenarios.clear();
        for (std::size_t i = 0; i < ss.size(); ++i) {
            cfg.scenarios.push_back(detail::parse_scenario(
                ss[i], "$.scenarios[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("ewa")) {
        const nlohmann::json& e = j["ewa"];
        if (!e.is_object()) {
            throw config_error("config: $.ewa: expected an object");
        }
        detail::check_keys(e, "$.ewa",
                           {"deltas", "alphas", "kappas", "betas", "n_seeds", "rounds",
                            "batch_size", "fp_threshold"});
        if (e.contains("deltas")) cfg.sweep.deltas = detail::as_number_list(e["deltas"], "$.ewa.deltas");
        if (e.contains("alphas")) cfg.sweep.alphas = detail::as_number_list(e["alphas"], "$.ewa.alphas");
        if (e.contains("kappas")) cfg.sweep.kappas = detail::as_number_list(e["kappas"], "$.ewa.kappas");
        if (e.contains("betas")) {
            const nlohmann::json& bs = e["betas"];
            if (!bs.is_array() || bs.empty()) {
                throw config_error("config: $.ewa.betas: expected a nonempty array");
            }
            cfg.sweep.betas.clear();
            for (std::size_t i = 0; i < bs.size(); ++i) {
                cfg.sweep.betas.push_back(
                    detail::as_beta(bs[i], "$.ewa.betas[" + std::to_string(i) + "]"));
            }
        }
        if (e.contains("n_seeds")) cfg.sweep.n_seeds = detail::as_int(e["n_seeds"], "$.ewa.n_seeds");
        if (e.contains("rounds")) cfg.sweep.rounds = detail::as_int(e["rounds"], "$.ewa.rounds");
        if (e.contains("batch_size"))
            cfg.batch_size = detail::as_int(e["batch_size"], "$.ewa.batch_size");
        if (e.contains("fp_threshold"))
            cfg.fp_threshold = detail::as_number(e["fp_threshold"], "$.ewa.fp_threshold");
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text,
                                          const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config: " + origin + ": " + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw config_error("config: cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

} // namespace smartbal
