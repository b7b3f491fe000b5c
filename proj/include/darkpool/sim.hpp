#pragma once

/**
 * @file sim.hpp
 * @brief Monte Carlo engine for the controlled dark-pool system.
 *
 * Simulates the mid-price, the regime chain, commission-dependent Poisson
 * client flow and the execution of a lit-pool policy, and estimates the
 * objective
 *
 *   E[ int g(u, X_u) du - sum eps_m - sum eps_l + U(terminal) ].
 *
 * Paths use independent, deterministically seeded RNG substreams so the
 * estimate is reproducible bit-for-bit regardless of how paths would be
 * scheduled.
 */

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "darkpool/model.hpp"
#include "darkpool/policy.hpp"

namespace darkpool {

enum class PriceModel { Arithmetic, Geometric };
enum class TerminalUtility {
    Quadratic,  ///< y + x s - k x^2  (block liquidation walking the book)
    LinearAbs   ///< y + x s - k|x| - eps_m  (matches the solver terminal slice)
};

struct SimConfig {
    long long paths = 1;
    std::uint64_t seed = 0;
    double dt_sim = 0.0;  ///< 0 means: use the policy grid step
    bool enforce_exit = false;
    double y_min = -std::numeric_limits<double>::infinity();
    double y_max = std::numeric_limits<double>::infinity();
    int x0 = 0;
    double y0 = 0.0;
    int k0 = 0;
    PriceModel price_model = PriceModel::Arithmetic;
    TerminalUtility terminal = TerminalUtility::LinearAbs;
    int sample_paths = 0;       ///< number of PathRecords to keep
    bool bernoulli_regime = false;  ///< per-step chain instead of exact clocks
};

enum class EventKind {
    DarkFillBuy,   ///< b-side client flow, inventory up
    DarkFillSell,  ///< a-side client flow, inventory down
    LimitFill,
    LimitMiss,
    MarketExec,
    RegimeSwitch
};

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::DarkFillBuy: return "dark-fill-buy";
        case EventKind::DarkFillSell: return "dark-fill-sell";
        case EventKind::LimitFill: return "limit-fill";
        case EventKind::LimitMiss: return "limit-miss";
        case EventKind::MarketExec: return "market-exec";
        case EventKind::RegimeSwitch: return "regime-switch";
    }
    return "?";
}

struct PathEvent {
    double t = 0.0;
    EventKind kind = EventKind::DarkFillBuy;
    int size = 0;
    double dx = 0.0;
    double dy = 0.0;
    int k_idx = 0;
};

struct PathRecord {
    std::vector<PathEvent> events;
    State terminal;
    double objective = 0.0;
};

struct SimResult {
    double mean = 0.0;
    double std_error = 0.0;
    long long paths = 0;
    long long excluded = 0;
    std::vector<PathRecord> samples;
};

/// Policy queried by the simulator; absent result means the state is not
/// covered by the policy grid.
struct SimPolicy {
    std::function<std::optional<NodeAction>(double t, int x, int k_idx)> lookup;
};

/// Always continue with fixed commissions (first level of each menu).
inline SimPolicy make_uncontrolled_policy(const MarketParams& market) {
    NodeAction act;
    act.type = ActionType::Continue;
    act.delta_a = market.lambda_a.front().delta;
    act.delta_b = market.lambda_b.front().delta;
    return SimPolicy{[act](double, int, int) { return std::optional<NodeAction>(act); }};
}

/// Table lookup with the nearest-earlier time slice; the policy is
/// piecewise constant between solver time nodes.
inline SimPolicy make_table_policy(const PolicyTable& table) {
    auto shared = std::make_shared<PolicyTable>(table);
    return SimPolicy{[shared](double t, int x, int k_idx) -> std::optional<NodeAction> {
        const GridSpec& grid = shared->grid;
        if (x < grid.x_min || x > grid.x_max) return std::nullopt;
        if (k_idx < 0 || k_idx >= shared->n_regimes()) return std::nullopt;
        int it = static_cast<int>(std::floor(t / grid.dt() + 1e-9));
        it = std::max(0, std::min(grid.t_steps, it));
        return shared->action_at(k_idx, it, x);
    }};
}

/// Poisson event count over a step of length dt.
inline int sample_arrivals(double lambda, double dt, std::mt19937_64& rng) {
    if (lambda < 0.0) throw std::domain_error("sample_arrivals: negative intensity");
    if (lambda * dt == 0.0) return 0;
    std::poisson_distribution<int> dist(lambda * dt);
    return dist(rng);
}

/// One Bernoulli step of the regime chain at the infinitesimal definition
/// P[switch to j] = r_ij dt.  Requires dt small enough that the exit mass
/// does not exceed one.
inline int step_regime(int k_idx, double dt,
                       const std::vector<std::vector<double>>& generator,
                       std::mt19937_64& rng) {
    const std::size_t n = generator.size();
    if (n <= 1) return k_idx;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    for (std::size_t j = 0; j < n; ++j) {
        if (static_cast<int>(j) == k_idx) continue;
        const double pj = generator[k_idx][j] * dt;
        if (u < pj) return static_cast<int>(j);
        u -= pj;
    }
    return k_idx;
}

class SimExcludedError : public std::runtime_error {
  public:
    SimExcludedError(long long excluded, long long paths)
        : std::runtime_error("simulate: " + std::to_string(excluded) + " of " +
                             std::to_string(paths) +
                             " paths left the policy grid (> 1%)"),
          excluded_paths(excluded),
          total_paths(paths) {}
    long long excluded_paths;
    long long total_paths;
};

namespace sim_detail {

inline double intensity_for(const std::vector<CommissionLevel>& menu, double delta) {
    for (const auto& lvl : menu)
        if (std::abs(lvl.delta - delta) <= 1e-12) return lvl.intensity;
    // Policy commissions must come from the menu; treat a mismatch as a
    // wiring bug rather than silently extrapolating.
    throw std::runtime_error("simulate: policy commission " + std::to_string(delta) +
                             " not present in the market menu");
}

inline int draw_size(const std::vector<SizeAtom>& law, std::mt19937_64& rng) {
    if (law.size() == 1) return law.front().size;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    for (const auto& atom : law) {
        if (u < atom.prob) return atom.size;
        u -= atom.prob;
    }
    return law.back().size;
}

struct PathOutcome {
    double objective = 0.0;
    bool excluded = false;
    PathRecord record;  // populated only when sampling
};

inline PathOutcome run_path(const SimPolicy& policy, const MarketParams& market,
                            const CostParams& costs, const GridSpec& grid,
                            const SimConfig& cfg, std::uint64_t path_index,
                            bool keep_events) {
    PathOutcome out;
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                      static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(path_index),
                      static_cast<std::uint32_t>(path_index >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double T = grid.horizon;
    double dt = cfg.dt_sim > 0.0 ? cfg.dt_sim : grid.dt();
    const long long steps = std::max<long long>(1, std::llround(T / dt));
    dt = T / static_cast<double>(steps);

    int x = cfg.x0;
    double y = cfg.y0;
    double s = market.s0;
    int k_idx = cfg.k0;
    double t = 0.0;
    double objective = 0.0;

    auto record_event = [&](EventKind kind, int size, double dx, double dy) {
        if (keep_events)
            out.record.events.push_back(PathEvent{t, kind, size, dx, dy, k_idx});
    };

    const bool clocks = !cfg.bernoulli_regime && market.regimes.size() > 1;
    double next_switch = std::numeric_limits<double>::infinity();
    auto draw_switch_time = [&](double from) {
        const double rate = -market.generator[k_idx][k_idx];
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        std::exponential_distribution<double> expo(rate);
        return from + expo(rng);
    };
    if (clocks) next_switch = draw_switch_time(0.0);

    auto switch_regime = [&](double at) {
        const double rate = -market.generator[k_idx][k_idx];
        double u = unif(rng) * rate;
        int to = k_idx;
        for (std::size_t j = 0; j < market.regimes.size(); ++j) {
            if (static_cast<int>(j) == k_idx) continue;
            if (u < market.generator[k_idx][j]) {
                to = static_cast<int>(j);
                break;
            }
            u -= market.generator[k_idx][j];
        }
        const int prev = k_idx;
        k_idx = to;
        if (keep_events && to != prev)
            out.record.events.push_back(PathEvent{at, EventKind::RegimeSwitch, 0, 0.0, 0.0, k_idx});
    };

    bool stopped = false;
    for (long long i = 0; i < steps && !stopped; ++i) {
        t = static_cast<double>(i) * dt;
        const double k_spread = market.regimes[k_idx];

        // Impulse block at the policy check time: market orders execute
        // until the policy stops asking; a limit order is re-posted on a
        // miss, matching the fixed point of the limit obstacle.
        std::optional<NodeAction> node = policy.lookup(t, x, k_idx);
        long long guard = 0;
        while (node && node->type != ActionType::Continue) {
            if (++guard > 1000000)
                throw std::runtime_error("simulate: impulse loop did not terminate");
            if (node->type == ActionType::Market) {
                const int xi = node->xi;
                const double dy = -xi * (s + xi * k_spread);
                y += dy;
                x += xi;
                objective -= costs.eps_m;
                record_event(EventKind::MarketExec, 1, xi, dy);
            } else {
                const double kap = node->kappa;
                const int eta = node->eta;
                objective -= costs.eps_l;
                const double p = fill_probability(kap, market.fill, costs.kappa_bar);
                if (unif(rng) < p) {
                    const double dy = -eta * (s - eta * (k_spread + kap));
                    y += dy;
                    x += eta;
                    record_event(EventKind::LimitFill, 1, eta, dy);
                } else {
                    record_event(EventKind::LimitMiss, 0, 0.0, 0.0);
                }
            }
            node = policy.lookup(t, x, k_idx);
        }
        if (!node) {
            out.excluded = true;
            return out;
        }

        // Running inventory penalty over the step.
        objective -= costs.phi * static_cast<double>(x) * static_cast<double>(x) * dt;

        // Dark-pool client flow at the commissions chosen by the policy.
        const double lam_a = intensity_for(market.lambda_a, node->delta_a);
        const double lam_b = intensity_for(market.lambda_b, node->delta_b);
        const int n_a = sample_arrivals(lam_a, dt, rng);
        for (int e = 0; e < n_a; ++e) {
            const int size = draw_size(market.size_law_a, rng);
            const double dy = size * (s + node->delta_a);
            y += dy;
            x -= size;
            record_event(EventKind::DarkFillSell, size, -size, dy);
        }
        const int n_b = sample_arrivals(lam_b, dt, rng);
        for (int e = 0; e < n_b; ++e) {
            const int size = draw_size(market.size_law_b, rng);
            const double dy = -size * (s - node->delta_b);
            y += dy;
            x += size;
            record_event(EventKind::DarkFillBuy, size, size, dy);
        }

        // Regime chain: exact exponential clocks by default, per-step
        // Bernoulli in the diagnostic mode.
        if (market.regimes.size() > 1) {
            if (clocks) {
                while (next_switch <= t + dt) {
                    const double at = next_switch;
                    switch_regime(at);
                    next_switch = draw_switch_time(at);
                }
            } else {
                const int to = step_regime(k_idx, dt, market.generator, rng);
                if (to != k_idx) {
                    k_idx = to;
                    if (keep_events)
                        out.record.events.push_back(
                            PathEvent{t + dt, EventKind::RegimeSwitch, 0, 0.0, 0.0, k_idx});
                }
            }
        }

        // Mid-price step (the h-reduced objective is price-independent;
        // the path keeps it for realistic records and the U evaluation).
        const double z = gauss(rng);
        if (cfg.price_model == PriceModel::Arithmetic)
            s += market.mu * dt + market.sigma * std::sqrt(dt) * z;
        else
            s *= std::exp((market.mu - 0.5 * market.sigma * market.sigma) * dt +
                          market.sigma * std::sqrt(dt) * z);

        if (cfg.enforce_exit &&
            (y < cfg.y_min || y > cfg.y_max || x < grid.x_min || x > grid.x_max)) {
            stopped = true;  // tau*: leave the admissible domain, settle now
            t += dt;
        }
    }
    if (!stopped) t = T;

    const double k_spread = market.regimes[k_idx];
    double terminal_u = y + x * s;
    if (cfg.terminal == TerminalUtility::Quadratic)
        terminal_u -= k_spread * static_cast<double>(x) * static_cast<double>(x);
    else
        terminal_u -= k_spread * std::abs(static_cast<double>(x)) + costs.eps_m;
    objective += terminal_u;

    out.objective = objective;
    if (keep_events) {
        out.record.terminal = State{t, x, y, s, k_idx};
        out.record.objective = objective;
    }
    return out;
}

}  // namespace sim_detail

/// Sample-mean estimate of the objective under the given policy.
/// Identical (seed, config) inputs give bit-identical results.  Paths that
/// leave the policy grid without enforce_exit are excluded and counted;
/// more than 1% of them raises SimExcludedError.
inline SimResult simulate(const SimPolicy& policy, const MarketParams& market,
                          const CostParams& costs, const GridSpec& grid,
                          const SimConfig& cfg) {
    if (cfg.paths < 1) throw std::invalid_argument("simulate: paths must be >= 1");
    SimResult result;
    result.paths = cfg.paths;
    double sum = 0.0, sum_sq = 0.0;
    long long used = 0;

    for (long long p = 0; p < cfg.paths; ++p) {
        const bool keep = p < cfg.sample_paths;
        auto outcome = sim_detail::run_path(policy, market, costs, grid, cfg,
                                            static_cast<std::uint64_t>(p), keep);
        if (outcome.excluded) {
            ++result.excluded;
            continue;
        }
        ++used;
        sum += outcome.objective;
        sum_sq += outcome.objective * outcome.objective;
        if (keep) result.samples.push_back(std::move(outcome.record));
    }

    if (result.excluded * 100 > cfg.paths)
        throw SimExcludedError(result.excluded, cfg.paths);
    if (used == 0) throw std::runtime_error("simulate: no usable paths");

    result.mean = sum / static_cast<double>(used);
    if (used > 1) {
        const double var =
            std::max(0.0, (sum_sq - sum * sum / static_cast<double>(used)) /
                              static_cast<double>(used - 1));
        result.std_error = std::sqrt(var / static_cast<double>(used));
    }
    return result;
}

}  // namespace darkpool
