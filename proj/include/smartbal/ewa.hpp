#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "smartbal/game.hpp"
#include "smartbal/rng.hpp"

namespace smartbal {

class state_corruption_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EwaMode { BatchSample, Expected };

struct EwaParams {
    double delta = 0.0; // forgone-payoff weight
    double alpha = 0.0; // memory loss
    double kappa = 0.0; // experience depreciation
    double beta = 1.0;  // choice intensity; may be infinity
    int batch_size = 100;
    EwaMode mode = EwaMode::Expected;

    void validate() const {
        auto unit_range = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument(std::string("EwaParams: ") + name +
                                            " must lie in [0, 1]");
            }
        };
        unit_range(delta, "delta");
        unit_range(alpha, "alpha");
        unit_range(kappa, "kappa");
        if (!(beta > 0.0)) { // admits +infinity, rejects NaN
            throw std::invalid_argument("EwaParams: beta must be > 0 (or infinite)");
        }
        if (batch_size < 1) {
            throw std::invalid_argument("EwaParams: batch_size must be >= 1");
        }
    }
};

// Learning state after k updates. Index convention: [player][strategy], with
// strategy j = 1 meaning S_b = 1 (perform smart balancing).
struct EwaState {
    double n = 1.0;
    std::array<std::array<double, 2>, 2> attractions{{{0.0, 0.0}, {0.0, 0.0}}};
    std::array<std::array<double, 2>, 2> probs{{{0.5, 0.5}, {0.5, 0.5}}};
    int k = 0;

    double p1() const { return probs[0][1]; }
    double p2() const { return probs[1][1]; }
};

// Logit choice rule; beta = infinity degenerates to argmax with exact ties
// split evenly.
inline std::array<double, 2> choice_probs(const std::array<double, 2>& attractions,
                                          double beta) {
    if (std::isinf(beta)) {
        if (attractions[0] > attractions[1]) return {1.0, 0.0};
        if (attractions[1] > attractions[0]) return {0.0, 1.0};
        return {0.5, 0.5};
    }
    const double z0 = beta * attractions[0];
    const double z1 = beta * attractions[1];
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m);
    const double e1 = std::exp(z1 - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

// Fresh state: unit experience and standard-normal attractions drawn from a
// dedicated generator, so equal seeds give equal states.
inline EwaState init_state(std::uint64_t seed, const EwaParams& params) {
    params.validate();
    SplitMix64 rng(seed);
    EwaState state;
    for (auto& player : state.attractions) {
        for (double& a : player) {
            a = rng.next_normal();
        }
    }
    state.probs[0] = choice_probs(state.attractions[0], params.beta);
    state.probs[1] = choice_probs(state.attractions[1], params.beta);
    return state;
}

namespace detail {

inline double ewa_payoff(const PayoffTable& table, int player, int own, int opp) {
    return player == 0 ? table.payoff_1(own, opp) : table.payoff_2(opp, own);
}

inline void check_probs(const EwaState& state) {
    for (const auto& row : state.probs) {
        if (std::abs(row[0] + row[1] - 1.0) > 1e-9) {
            throw state_corruption_error(
                "ewa_update: probability row does not sum to 1");
        }
    }
}

// Shared tail of both update modes: depreciate experience, fold the per-
// strategy increments into the attractions, refresh the choice probabilities.
inline EwaState apply_increments(const EwaState& state, const EwaParams& params,
                                 const std::array<std::array<double, 2>, 2>& increments) {
    EwaState next = state;
    next.n = (1.0 - params.kappa) * (1.0 - params.alpha) * state.n + 1.0;
    for (int b = 0; b < 2; ++b) {
        for (int j = 0; j < 2; ++j) {
            next.attractions[b][j] =
                ((1.0 - params.alpha) * state.n * state.attractions[b][j] +
                 increments[b][j]) /
                next.n;
        }
        next.probs[b] = choice_probs(next.attractions[b], params.beta);
    }
    next.k = state.k + 1;
    return next;
}

} // namespace detail

// Expected-play update: both the identity weight and the opponent's action
// are replaced by their expectations under the current mixed strategies
// (actions independent across players).
inline EwaState ewa_update(const EwaState& state, const EwaParams& params,
                           const PayoffTable& table) {
    params.validate();
    detail::check_probs(state);
    std::array<std::array<double, 2>, 2> increments{};
    for (int b = 0; b < 2; ++b) {
        const int opp = 1 - b;
        for (int j = 0; j < 2; ++j) {
            const double expected_payoff =
                state.probs[opp][0] * detail::ewa_payoff(table, b, j, 0) +
                state.probs[opp][1] * detail::ewa_payoff(table, b, j, 1);
            increments[b][j] =
                (params.delta + (1.0 - params.delta) * state.probs[b][j]) *
                expected_payoff;
        }
    }
    return detail::apply_increments(state, params, increments);
}

// Batch update: play batch_size games with actions sampled from the current
// strategies, then weight each strategy's batch-average payoff by the realized
// own-play fraction.
inline EwaState ewa_update(const EwaState& state, const EwaParams& params,
                           const PayoffTable& table, SplitMix64& rng) {
    params.validate();
    detail::check_probs(state);
    std::array<std::array<int, 2>, 2> play_counts{};
    std::array<std::array<double, 2>, 2> payoff_sums{};
    for (int game = 0; game < params.batch_size; ++game) {
        const int a0 = rng.next_unit() < state.probs[0][1] ? 1 : 0;
        const int a1 = rng.next_unit() < state.probs[1][1] ? 1 : 0;
        ++play_counts[0][a0];
        ++play_counts[1][a1];
        for (int j = 0; j < 2; ++j) {
            payoff_sums[0][j] += detail::ewa_payoff(table, 0, j, a1);
            payoff_sums[1][j] += detail::ewa_payoff(table, 1, j, a0);
        }
    }
    const double batch = static_cast<double>(params.batch_size);
    std::array<std::array<double, 2>, 2> increments{};
    for (int b = 0; b < 2; ++b) {
        for (int j = 0; j < 2; ++j) {
            const double own_fraction = play_counts[b][j] / batch;
            increments[b][j] =
                (params.delta + (1.0 - params.delta) * own_fraction) *
                (payoff_sums[b][j] / batch);
        }
    }
    return detail::apply_increments(state, params, increments);
}

struct EwaRecord {
    int k = 0;
    double p1 = 0.0;
    double p2 = 0.0;
};

struct EwaRun {
    std::vector<EwaRecord> trajectory; // rounds + 1 records, starting at k = 0
    EwaState final_state;
};

// Runs one learning trajectory. The seed fixes both the initial attractions
// and (in batch mode) the sampled plays; expected mode consumes no randomness
// beyond initialization.
inline EwaRun run_ewa(const EwaParams& params, const PayoffTable& table, int rounds,
                      std::uint64_t seed) {
    params.validate();
    if (rounds < 1) {
        throw std::invalid_argument("run_ewa: rounds must be >= 1");
    }
    EwaState state = init_state(derive_seed(seed, 0), params);
    SplitMix64 play_rng(derive_seed(seed, 1));
    EwaRun run;
    run.trajectory.reserve(static_cast<std::size_t>(rounds) + 1);
    run.trajectory.push_back({state.k, state.p1(), state.p2()});
    for (int round = 0; round < rounds; ++round) {
        state = params.mode == EwaMode::Expected
                    ? ewa_update(state, params, table)
                    : ewa_update(state, params, table, play_rng);
        run.trajectory.push_back({state.k, state.p1(), state.p2()});
    }
    run.final_state = state;
    return run;
}

enum class FixedPointClass { Pure, Mixed };

inline const char* to_string(FixedPointClass c) {
    return c == FixedPointClass::Pure ? "pure" : "mixed";
}

// Pure when both probabilities ended within `threshold` of a corner.
inline FixedPointClass classify_fixed_point(double p1, double p2,
                                            double threshold = 0.1) {
    if (!(threshold > 0.0 && threshold < 0.5)) {
        throw std::invalid_argument("classify_fixed_point: threshold must be in (0, 0.5)");
    }
    const bool corner_1 = std::min(p1, 1.0 - p1) < threshold;
    const bool corner_2 = std::min(p2, 1.0 - p2) < threshold;
    return corner_1 && corner_2 ? FixedPointClass::Pure : FixedPointClass::Mixed;
}

struct SweepGrid {
    std::vector<double> deltas{0.0, 0.25, 0.5};
    std::vector<double> alphas{0.0, 0.05, 0.1};
    std::vector<double> kappas{0.0, 0.5, 1.0};
    std::vector<double> betas{1.0, std::numeric_limits<double>::infinity()};
    int n_seeds = 100;
    int rounds = 100;

    void validate() const {
        if (deltas.empty() || alphas.empty() || kappas.empty() || betas.empty()) {
            throw std::invalid_argument("SweepGrid: empty parameter dimension");
        }
        if (n_seeds < 1 || rounds < 1) {
            throw std::invalid_argument("SweepGrid: n_seeds and rounds must be >= 1");
        }
    }

    std::size_t combos() const {
        return deltas.size() * alphas.size() * kappas.size();
    }
};

// Aggregated overreaction statistics of one (table, beta) cell.
struct SweepCell {
    std::string scenario;
    Mechanism mechanism = Mechanism::DE;
    double t_game_min = 0.0;
    double ramp_pct_per_min = 0.0;
    double l_plus_g = 0.0;
    double l_minus_g = 0.0;
    double beta = 1.0;
    double mean_p1p2 = 0.0;
    double std_p1p2 = 0.0;
};

// One finished run, for scatter output.
struct SweepRunRecord {
    std::string scenario;
    Mechanism mechanism = Mechanism::DE;
    double delta = 0.0;
    double alpha = 0.0;
    double kappa = 0.0;
    double beta = 1.0;
    int seed = 0;
    double p1_final = 0.0;
    double p2_final = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<SweepRunRecord> runs;
};

namespace detail {

struct SweepCombo {
    double delta;
    double alpha;
    double kappa;
};

inline std::vector<SweepCombo> enumerate_combos(const SweepGrid& grid) {
    std::vector<SweepCombo> combos;
    combos.reserve(grid.combos());
    for (double d : grid.deltas) {
        for (double a : grid.alphas) {
            for (double k : grid.kappas) {
                combos.push_back({d, a, k});
            }
        }
    }
    return combos;
}

} // namespace detail

// Expected-mode sweep over the full (table, beta, delta, alpha, kappa, seed)
// grid. Every run writes to a preassigned slot and the reduction walks the
// slots in a fixed order, so results are identical for any worker count. The
// run seed depends only on (combo, seed index): the same initial attractions
// are reused across tables and beta classes.
inline SweepResult sweep(const std::vector<PayoffTable>& tables, const SweepGrid& grid,
                         std::uint64_t root_seed, int jobs = 0) {
    grid.validate();
    if (tables.empty()) {
        throw std::invalid_argument("sweep: empty table set");
    }
    const std::vector<detail::SweepCombo> combos = detail::enumerate_combos(grid);
    const std::size_t n_tables = tables.size();
    const std::size_t n_betas = grid.betas.size();
    const std::size_t n_combos = combos.size();
    const auto n_seeds = static_cast<std::size_t>(grid.n_seeds);
    const std::size_t per_table = n_betas * n_combos * n_seeds;
    const std::size_t total = n_tables * per_table;

    struct RunOutcome {
        double p1 = 0.0;
        double p2 = 0.0;
    };
    std::vector<RunOutcome> outcomes(total);

    auto run_one = [&](std::size_t index) {
        const std::size_t ti = index / per_table;
        std::size_t rest = index % per_table;
        const std::size_t bi = rest / (n_combos * n_seeds);
        rest %= n_combos * n_seeds;
        const std::size_t ci = rest / n_seeds;
        const std::size_t si = rest % n_seeds;

        EwaParams params;
        params.delta = combos[ci].delta;
        params.alpha = combos[ci].alpha;
        params.kappa = combos[ci].kappa;
        params.beta = grid.betas[bi];
        params.mode = EwaMode::Expected;

        EwaState state = init_state(derive_seed(root_seed, ci, si), params);
        for (int round = 0; round < grid.rounds; ++round) {
            state = ewa_update(state, params, tables[ti]);
        }
        outcomes[index] = {state.p1(), state.p2()};
    };

    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, 64));
    if (workers == 1 || total < 2) {
        for (std::size_t i = 0; i < total; ++i) {
            run_one(i);
        }
    } else {
        std::atomic<std::size_t> cursor{0};
        auto worker = [&] {
            constexpr std::size_t chunk = 64;
            while (true) {
                const std::size_t begin = cursor.fetch_add(chunk);
                if (begin >= total) break;
                const std::size_t end = std::min(begin + chunk, total);
                for (std::size_t i = begin; i < end; ++i) {
                    run_one(i);
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }

    SweepResult result;
    result.cells.reserve(n_tables * n_betas);
    result.runs.reserve(total);
    for (std::size_t ti = 0; ti < n_tables; ++ti) {
        const PayoffTable& table = tables[ti];
        for (std::size_t bi = 0; bi < n_betas; ++bi) {
            double sum = 0.0;
            double sum_sq = 0.0;
            for (std::size_t ci = 0; ci < n_combos; ++ci) {
                for (std::size_t si = 0; si < n_seeds; ++si) {
                    const std::size_t index =
                        ti * per_table + bi * n_combos * n_seeds + ci * n_seeds + si;
                    const RunOutcome& o = outcomes[index];
                    const double x = o.p1 * o.p2;
                    sum += x;
                    sum_sq += x * x;
                    result.runs.push_back({table.scenario, table.mechanism,
                                           combos[ci].delta, combos[ci].alpha,
                                           combos[ci].kappa, grid.betas[bi],
                                           static_cast<int>(si), o.p1, o.p2});
                }
            }
            const double count = static_cast<double>(n_combos * n_seeds);
            const double mean = sum / count;
            const double variance = std::max(sum_sq / count - mean * mean, 0.0);
            SweepCell cell;
            cell.scenario = table.scenario;
            cell.mechanism = table.mechanism;
            cell.t_game_min = table.t_game_min;
            cell.ramp_pct_per_min = table.ramp_pct_per_min;
            cell.l_plus_g = table.l1 + table.g1;
            cell.l_minus_g = table.l1 - table.g1;
            cell.beta = grid.betas[bi];
            cell.mean_p1p2 = mean;
            cell.std_p1p2 = std::sqrt(variance);
            result.cells.push_back(cell);
        }
    }
    return result;
}

} // namespace smartbal
