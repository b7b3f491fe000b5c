#pragma once

/**
 * @file toy.hpp
 * @brief Exact solver for the discrete-observation model with constant
 *        spread, unit orders and fixed commissions.
 *
 * With those restrictions the value of any strategy depends only on how
 * many market sells / market buys / limit sells / limit buys it contains,
 * not on their time ordering.  Stage n (calendar time T - (n-1)*dt, so
 * n - 1 decision slots remain) therefore reduces to maximising a closed
 * form over 4-tuples of order counts.  `solve_toy` performs that
 * maximisation exactly through a reduced search over net shifts;
 * `enumerate_oracle` does it by brute force over all tuples.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace darkpool {

enum class ToyAction { MB, LB, DP, LS, MS };

inline const char* to_string(ToyAction a) {
    switch (a) {
        case ToyAction::MB: return "MB";
        case ToyAction::LB: return "LB";
        case ToyAction::DP: return "DP";
        case ToyAction::LS: return "LS";
        case ToyAction::MS: return "MS";
    }
    return "??";
}

/// Counts of lit-pool orders in a strategy: market sells/buys, limit
/// sells/buys.  Admissible for stage n when total() <= n - 1.
struct StrategyCount {
    int q_ma = 0;
    int q_mb = 0;
    int q_la = 0;
    int q_lb = 0;

    int total() const { return q_ma + q_mb + q_la + q_lb; }
    bool operator==(const StrategyCount&) const = default;
};

struct ToyParams {
    double delta_a = 0.0;  ///< fixed a-side commission
    double delta_b = 0.0;  ///< fixed b-side commission
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    double k = 0.0;        ///< constant half-spread
    double p = 1.0;        ///< limit-order fill probability
    double eps_m = 0.0;
    double eps_l = 0.0;
    double horizon = 1.0;  ///< T
    int stages = 1;        ///< N, with N * dt = T

    double dt() const { return horizon / static_cast<double>(stages); }
    double c1() const {
        return lambda_a * delta_a + lambda_b * delta_b - k * (lambda_a + lambda_b);
    }
    double c2() const { return lambda_b - lambda_a; }
};

/// Number of distinguishable strategies with n - 1 decision slots:
/// multisets over {MS, MB, LS, LB} of size at most n - 1, which is
/// (1/4!) * n * (n+1) * (n+2) * (n+3).
inline std::int64_t count_distinguishable(int n) {
    if (n < 1) throw std::domain_error("count_distinguishable: n must be >= 1");
    std::int64_t m = n;
    return m * (m + 1) * (m + 2) * (m + 3) / 24;
}

/// Value when trading happens in the dark pool only:
/// V = y + x s + c1 (T - t) - k (x + c2 (T - t))^2.
inline double uncontrolled_value(double t, double x, double y, double s,
                                 const ToyParams& par) {
    const double tau = par.horizon - t;
    const double shifted = x + par.c2() * tau;
    return y + x * s + par.c1() * tau - par.k * shifted * shifted;
}

namespace toy_detail {

/// Closed-form stage value for counts q with remaining time tau.
inline double counts_value(double x, double y, double s, const StrategyCount& q,
                           double tau, const ToyParams& par) {
    const int m_orders = q.q_ma + q.q_mb;
    const int l_orders = q.q_la + q.q_lb;
    const double shift =
        (q.q_lb - q.q_la) * par.p + (q.q_mb - q.q_ma) + par.c2() * tau;
    const double base = x + shift;
    return y + x * s + par.c1() * tau - (par.k + par.eps_m) * m_orders +
           (par.k * par.p - par.eps_l) * l_orders - par.k * base * base;
}

}  // namespace toy_detail

/// Stage value at calendar time T - (n-1)*dt for a committed strategy q.
/// Throws std::domain_error when q is inadmissible for stage n.
inline double stage_value(int n, double x, double y, double s,
                          const StrategyCount& q, const ToyParams& par) {
    if (n < 1) throw std::domain_error("stage_value: n must be >= 1");
    if (q.q_ma < 0 || q.q_mb < 0 || q.q_la < 0 || q.q_lb < 0 || q.total() > n - 1)
        throw std::domain_error("stage_value: inadmissible strategy count for stage " +
                                std::to_string(n));
    return toy_detail::counts_value(x, y, s, q, (n - 1) * par.dt(), par);
}

/// Limit orders can appear in an optimal strategy iff
/// eps_l < p (eps_m + 3k + pk).  The condition is time- and
/// strategy-independent.
inline bool limit_order_viable(const ToyParams& par) {
    return par.eps_l < par.p * (par.eps_m + 3.0 * par.k + par.p * par.k);
}

namespace toy_detail {

/// Tie-break preference: dark pool first, then limit before market
/// (cheaper penalty first), sells before buys.
inline constexpr std::array<ToyAction, 5> kPreference = {
    ToyAction::DP, ToyAction::LS, ToyAction::LB, ToyAction::MS, ToyAction::MB};

inline StrategyCount apply(StrategyCount q, ToyAction a) {
    switch (a) {
        case ToyAction::MB: ++q.q_mb; break;
        case ToyAction::LB: ++q.q_lb; break;
        case ToyAction::DP: break;
        case ToyAction::LS: ++q.q_la; break;
        case ToyAction::MS: ++q.q_ma; break;
    }
    return q;
}

/// Best value over all completions of `seed` with at most `budget` extra
/// orders, evaluated at remaining time tau.  Market orders always cost
/// (k + eps_m) so only net market shifts matter; a cancelling limit pair
/// pays off exactly when k p > eps_l, in which case all leftover slots are
/// spent on pairs.
inline double best_completion(double x, const StrategyCount& seed, int budget,
                              double tau, const ToyParams& par) {
    const bool churn = par.k * par.p - par.eps_l > 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (int dm = -budget; dm <= budget; ++dm) {
        const int rem = budget - std::abs(dm);
        for (int dl = -rem; dl <= rem; ++dl) {
            const int leftover = rem - std::abs(dl);
            const int pairs = churn ? leftover / 2 : 0;
            StrategyCount q = seed;
            if (dm >= 0) q.q_mb += dm; else q.q_ma += -dm;
            if (dl >= 0) q.q_lb += dl; else q.q_la += -dl;
            q.q_la += pairs;
            q.q_lb += pairs;
            const double v = counts_value(x, 0.0, 0.0, q, tau, par);
            if (v > best) best = v;
        }
    }
    return best;
}

}  // namespace toy_detail

/// The five-branch threshold rule for the decision taken at calendar time
/// T - n*dt on top of a committed strategy q: evaluated as the argmax of
/// the stage closed form over the five candidate actions, which reproduces
/// the published inequality table wherever that table is unambiguous.
/// Exact ties go to the earlier entry of {DP, LS, LB, MS, MB}.
inline ToyAction optimal_action(int n, double x, const StrategyCount& q,
                                const ToyParams& par) {
    if (n < 1) throw std::domain_error("optimal_action: n must be >= 1");
    if (q.total() < 0) throw std::domain_error("optimal_action: bad counts");
    const double tau = n * par.dt();
    ToyAction best = ToyAction::DP;
    double best_v = -std::numeric_limits<double>::infinity();
    for (ToyAction a : toy_detail::kPreference) {
        const double v =
            toy_detail::counts_value(x, 0.0, 0.0, toy_detail::apply(q, a), tau, par);
        if (v > best_v) {
            best_v = v;
            best = a;
        }
    }
    return best;
}

/// Value and first-slot action of an optimal stage-n strategy.
struct ToyDecision {
    double value = 0.0;
    ToyAction action = ToyAction::DP;
};

/// One row of the solved table.
struct ToyCell {
    int stage = 1;
    int x = 0;
    double value = 0.0;
    ToyAction action = ToyAction::DP;
};

struct ToyTable {
    int stages = 0;
    int x_min = 0;
    int x_max = 0;
    std::vector<ToyCell> cells;  ///< stage-major, then x ascending

    const ToyCell& at(int stage, int x) const {
        const int nx = x_max - x_min + 1;
        return cells[static_cast<std::size_t>(stage - 1) * nx + (x - x_min)];
    }
};

namespace toy_detail {

/// Optimal stage-n value and tie-broken first-slot action at inventory x
/// (values quoted at y = 0, s = 0; both enter additively).
inline ToyDecision decide(int n, double x, const ToyParams& par) {
    if (n == 1) return {counts_value(x, 0.0, 0.0, {}, 0.0, par), ToyAction::DP};
    const double tau = (n - 1) * par.dt();
    ToyDecision out;
    out.value = -std::numeric_limits<double>::infinity();
    for (ToyAction a : kPreference) {
        const StrategyCount seed = apply({}, a);
        const double v = best_completion(x, seed, n - 2, tau, par);
        if (v > out.value) {
            out.value = v;
            out.action = a;
        }
    }
    return out;
}

}  // namespace toy_detail

/// Solves every stage n = 1..N for integer inventories in [x_min, x_max]
/// by exact backward induction over order counts.  Values agree with
/// enumerate_oracle to the last bit; stage 1 is the terminal stage and
/// always reports DP.
inline ToyTable solve_toy(const ToyParams& par, int x_min, int x_max) {
    if (par.stages < 1) throw std::domain_error("solve_toy: stages must be >= 1");
    if (x_min > x_max) throw std::domain_error("solve_toy: empty inventory range");
    // n^4/24 tuples per node is exact but quartic; keep the table desk-sized.
    if (par.stages > 400 || (x_max - x_min) > 4000)
        throw std::runtime_error("solve_toy: state space exceeds configured cap");
    ToyTable table;
    table.stages = par.stages;
    table.x_min = x_min;
    table.x_max = x_max;
    table.cells.reserve(static_cast<std::size_t>(par.stages) * (x_max - x_min + 1));
    for (int n = 1; n <= par.stages; ++n) {
        for (int x = x_min; x <= x_max; ++x) {
            const ToyDecision d = toy_detail::decide(n, x, par);
            table.cells.push_back({n, x, d.value, d.action});
        }
    }
    return table;
}

/// Brute-force oracle: exhaustively maximises the stage closed form over
/// all admissible 4-tuples.  Guarded to small stage counts; the reduced
/// search in solve_toy matches it exactly.
inline ToyDecision enumerate_oracle_decision(const ToyParams& par, double x, int n) {
    if (n < 1) throw std::domain_error("enumerate_oracle: n must be >= 1");
    if (n > 6) throw std::domain_error("enumerate_oracle: refused for n > 6");
    if (n == 1)
        return {toy_detail::counts_value(x, 0.0, 0.0, {}, 0.0, par), ToyAction::DP};

    const double tau = (n - 1) * par.dt();
    const int slots = n - 1;
    // Best value per first-slot action; DP is available whenever the tuple
    // leaves at least one slot unused.
    std::array<double, 5> per_root;
    per_root.fill(-std::numeric_limits<double>::infinity());
    auto root_index = [](ToyAction a) {
        switch (a) {
            case ToyAction::DP: return 0;
            case ToyAction::LS: return 1;
            case ToyAction::LB: return 2;
            case ToyAction::MS: return 3;
            case ToyAction::MB: return 4;
        }
        return 0;
    };
    for (int q_ma = 0; q_ma <= slots; ++q_ma)
        for (int q_mb = 0; q_mb + q_ma <= slots; ++q_mb)
            for (int q_la = 0; q_la + q_mb + q_ma <= slots; ++q_la)
                for (int q_lb = 0; q_lb + q_la + q_mb + q_ma <= slots; ++q_lb) {
                    const StrategyCount q{q_ma, q_mb, q_la, q_lb};
                    const double v = toy_detail::counts_value(x, 0.0, 0.0, q, tau, par);
                    auto update = [&](ToyAction a) {
                        double& slot = per_root[root_index(a)];
                        if (v > slot) slot = v;
                    };
                    if (q.total() < slots) update(ToyAction::DP);
                    if (q_ma > 0) update(ToyAction::MS);
                    if (q_mb > 0) update(ToyAction::MB);
                    if (q_la > 0) update(ToyAction::LS);
                    if (q_lb > 0) update(ToyAction::LB);
                }
    ToyDecision out;
    out.value = -std::numeric_limits<double>::infinity();
    for (ToyAction a : toy_detail::kPreference) {
        const double v = per_root[root_index(a)];
        if (v > out.value) {
            out.value = v;
            out.action = a;
        }
    }
    return out;
}

/// Spec-level oracle entry point (value only).
inline double enumerate_oracle(const ToyParams& par, double x, int n) {
    return enumerate_oracle_decision(par, x, n).value;
}

}  // namespace darkpool
