#pragma once

/**
 * @file qvi.hpp
 * @brief Finite-difference solver for the reduced quasi-variational
 *        inequalities in h(t, x).
 *
 * After the ansatz V = y + x s + h(t, x), the control problem reduces to
 * a one-dimensional double-obstacle QVI per spread regime:
 *
 *   min{ phi x^2 - dh/dt - sup_a - sup_b - coupling,
 *        h - M h,      (market-order obstacle)
 *        h - L h } = 0 (limit-order obstacle)
 *
 * with terminal condition h_k(T, x) = -k|x| - eps_m.  The scheme is an
 * explicit Euler sweep backward in time followed by a node-wise obstacle
 * projection iterated to its fixed point, so that after every step the
 * surface dominates both obstacles evaluated on itself.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "darkpool/model.hpp"

namespace darkpool {

enum class VariantKind { FixedCommissions, CommissionMenu, RegimeSwitching };

inline const char* to_string(VariantKind v) {
    switch (v) {
        case VariantKind::FixedCommissions: return "fixed";
        case VariantKind::CommissionMenu: return "menu";
        case VariantKind::RegimeSwitching: return "regime";
    }
    return "?";
}

enum class ActionType { Continue, Limit, Market };

inline const char* to_string(ActionType a) {
    switch (a) {
        case ActionType::Continue: return "continue";
        case ActionType::Limit: return "limit";
        case ActionType::Market: return "market";
    }
    return "?";
}

/// Argmax record for one grid node.
struct NodeAction {
    ActionType type = ActionType::Continue;
    double delta_a = 0.0;  ///< chosen a-side commission (Continue)
    double delta_b = 0.0;  ///< chosen b-side commission (Continue)
    int eta = 0;           ///< limit-order direction (Limit)
    double kappa = 0.0;    ///< limit-price offset (Limit)
    int xi = 0;            ///< market-order direction (Market)
};

struct SolveOptions {
    /// Buy only when short, sell only when long, no lit order at x = 0.
    bool no_speculation = true;
    /// Fixed-point tolerance of the obstacle projection within a slice.
    double projection_tol = 1e-13;
    int max_projection_sweeps = 100000;
};

class StabilityError : public std::runtime_error {
  public:
    StabilityError(double bound_value, double limit)
        : std::runtime_error("explicit scheme unstable: dt * total event intensity = " +
                             std::to_string(bound_value) + " exceeds " +
                             std::to_string(limit)),
          bound(bound_value) {}
    double bound;
};

/// Solved value surface h(regime, t, x) with the per-node argmax record.
struct ValueSurface {
    GridSpec grid;
    std::vector<double> regimes;
    std::vector<double> h;            ///< [regime][time][x]
    std::vector<NodeAction> action;   ///< same layout

    int n_regimes() const { return static_cast<int>(regimes.size()); }
    int n_x() const { return grid.n_x(); }
    int n_t() const { return grid.t_steps + 1; }

    std::size_t index(int r, int it, int x) const {
        return (static_cast<std::size_t>(r) * n_t() + it) * n_x() + (x - grid.x_min);
    }
    double value(int r, int it, int x) const { return h[index(r, it, x)]; }
    const NodeAction& action_at(int r, int it, int x) const {
        return action[index(r, it, x)];
    }
    double time_of(int it) const { return grid.dt() * it; }

    bool empty() const { return h.empty(); }
};

/// Read-only view of one time slice with linear extrapolation outside the
/// inventory grid at the terminal slope -k sign(x).
struct SliceView {
    const double* data = nullptr;  ///< [regime][x] contiguous
    int n_regimes = 0;
    int x_min = 0;
    int x_max = 0;
    const double* regime_spreads = nullptr;

    double operator()(int r, int x) const {
        const double* row = data + static_cast<std::size_t>(r) * (x_max - x_min + 1);
        if (x < x_min) return row[0] - regime_spreads[r] * (x_min - x);
        if (x > x_max) return row[x_max - x_min] - regime_spreads[r] * (x - x_max);
        return row[x - x_min];
    }
};

struct RhsResult {
    double value = 0.0;
    double delta_a = 0.0;
    double delta_b = 0.0;
};

/// Drift of the continuation branch at (x, regime): running penalty plus
/// the commission-optimised dark-flow expectations plus regime coupling.
/// The returned deltas are the argmax over each menu.
inline RhsResult continuation_rhs(const SliceView& h, int x, int r,
                                  const MarketParams& market, const CostParams& costs) {
    RhsResult out;
    out.value = -costs.phi * static_cast<double>(x) * static_cast<double>(x);
    const double h_here = h(r, x);

    double best_a = -std::numeric_limits<double>::infinity();
    for (const auto& lvl : market.lambda_a) {
        double e = 0.0;
        for (const auto& atom : market.size_law_a)
            e += atom.prob * (atom.size * lvl.delta + h(r, x - atom.size) - h_here);
        const double v = lvl.intensity * e;
        if (v > best_a) {
            best_a = v;
            out.delta_a = lvl.delta;
        }
    }
    double best_b = -std::numeric_limits<double>::infinity();
    for (const auto& lvl : market.lambda_b) {
        double e = 0.0;
        for (const auto& atom : market.size_law_b)
            e += atom.prob * (atom.size * lvl.delta + h(r, x + atom.size) - h_here);
        const double v = lvl.intensity * e;
        if (v > best_b) {
            best_b = v;
            out.delta_b = lvl.delta;
        }
    }
    out.value += best_a + best_b;

    for (int j = 0; j < h.n_regimes; ++j)
        if (j != r && !market.generator.empty())
            out.value += market.generator[r][j] * (h(j, x) - h_here);
    return out;
}

struct MarketObstacleResult {
    double value = -std::numeric_limits<double>::infinity();
    int xi = 0;  ///< 0 when no direction is admissible
};

/// Best immediate unit market order: sup over admissible xi of
/// -k - eps_m + h(x + xi).  Orders pointing outside the grid are
/// inadmissible; under no-speculation only inventory-reducing directions
/// are allowed and nothing is admissible at x = 0.
inline MarketObstacleResult market_obstacle(const SliceView& h, int x, int r,
                                            double eps_m, bool no_speculation) {
    MarketObstacleResult out;
    const double k = h.regime_spreads[r];
    for (int xi : {-1, +1}) {
        if (no_speculation && ((xi < 0 && x <= 0) || (xi > 0 && x >= 0))) continue;
        if (x + xi < h.x_min || x + xi > h.x_max) continue;
        const double v = -k - eps_m + h(r, x + xi);
        if (v > out.value) {
            out.value = v;
            out.xi = xi;
        }
    }
    return out;
}

struct LimitObstacleResult {
    double value = -std::numeric_limits<double>::infinity();
    int eta = 0;
    double kappa = 0.0;
};

/// Best immediate limit order: sup over admissible eta and kappa of
///   l(kappa) [ (k + kappa) - eps_l + h(x + eta) ]
///   + (1 - l(kappa)) [ -eps_l + h(x) ]
/// where l(kappa) is the full-fill probability; the no-fill branch still
/// pays the penalty.
inline LimitObstacleResult limit_obstacle(const SliceView& h, int x, int r,
                                          const CostParams& costs, const FillModel& fill,
                                          bool no_speculation) {
    LimitObstacleResult out;
    const double k = h.regime_spreads[r];
    const double h_here = h(r, x);
    for (int eta : {-1, +1}) {
        if (no_speculation && ((eta < 0 && x <= 0) || (eta > 0 && x >= 0))) continue;
        if (x + eta < h.x_min || x + eta > h.x_max) continue;
        const double h_fill = h(r, x + eta);
        for (double kap : costs.kappa_grid) {
            const double p = fill.p0 * std::exp(-fill.alpha * kap);
            const double v = p * ((k + kap) - costs.eps_l + h_fill) +
                             (1.0 - p) * (-costs.eps_l + h_here);
            if (v > out.value) {
                out.value = v;
                out.eta = eta;
                out.kappa = kap;
            }
        }
    }
    return out;
}

namespace qvi_detail {

inline SliceView make_view(const std::vector<double>& slice, int n_regimes,
                           const GridSpec& grid, const std::vector<double>& regimes) {
    return SliceView{slice.data(), n_regimes, grid.x_min, grid.x_max, regimes.data()};
}

inline void enforce_variant(VariantKind kind, const MarketParams& market) {
    const std::size_t n = market.regimes.size();
    if (kind == VariantKind::RegimeSwitching) {
        if (n < 2)
            throw std::invalid_argument("regime-switching variant needs >= 2 regimes");
    } else {
        if (n != 1)
            throw std::invalid_argument("single-regime variant given several regimes");
    }
    if (kind == VariantKind::FixedCommissions &&
        (market.lambda_a.size() != 1 || market.lambda_b.size() != 1))
        throw std::invalid_argument(
            "fixed-commission variant needs exactly one commission level per side");
}

}  // namespace qvi_detail

/// Backward sweep from the terminal slice.  Each step applies the explicit
/// Euler update and then projects onto the obstacles, iterating the
/// projection (Jacobi sweeps) until the slice dominates obstacles computed
/// on itself.  Deterministic; throws StabilityError when the explicit
/// bound dt * (lambda_a_max + lambda_b_max + max regime exit rate) > 1.
inline ValueSurface solve(VariantKind kind, const MarketParams& market,
                          const CostParams& costs, const GridSpec& grid,
                          const SolveOptions& options = {}) {
    qvi_detail::enforce_variant(kind, market);

    const double intensity = total_event_intensity(market);
    if (grid.dt() * intensity > 1.0 + 1e-12)
        throw StabilityError(grid.dt() * intensity, 1.0);

    const int R = static_cast<int>(market.regimes.size());
    const int nx = grid.n_x();
    const int nt = grid.t_steps + 1;
    const double dt = grid.dt();

    ValueSurface surf;
    surf.grid = grid;
    surf.regimes = market.regimes;
    surf.h.assign(static_cast<std::size_t>(R) * nt * nx, 0.0);
    surf.action.assign(surf.h.size(), NodeAction{});

    // Scratch slices laid out [regime][x].
    std::vector<double> prev(static_cast<std::size_t>(R) * nx);
    std::vector<double> cont(prev.size()), work(prev.size()), next(prev.size());
    std::vector<RhsResult> rhs(prev.size());

    auto flat = [&](int r, int x) {
        return static_cast<std::size_t>(r) * nx + (x - grid.x_min);
    };

    // Terminal condition h_k(T, x) = -k|x| - eps_m; no projection applies
    // at T.  The recorded action is Continue with the flat-surface
    // commission argmax, purely informational.
    for (int r = 0; r < R; ++r)
        for (int x = grid.x_min; x <= grid.x_max; ++x)
            prev[flat(r, x)] = -market.regimes[r] * std::abs(x) - costs.eps_m;
    {
        const SliceView view = qvi_detail::make_view(prev, R, grid, market.regimes);
        for (int r = 0; r < R; ++r)
            for (int x = grid.x_min; x <= grid.x_max; ++x) {
                const RhsResult rr = continuation_rhs(view, x, r, market, costs);
                const std::size_t id = surf.index(r, grid.t_steps, x);
                surf.h[id] = prev[flat(r, x)];
                surf.action[id] =
                    NodeAction{ActionType::Continue, rr.delta_a, rr.delta_b, 0, 0.0, 0};
            }
    }

    for (int it = grid.t_steps - 1; it >= 0; --it) {
        // Explicit Euler step off the later slice.
        const SliceView prev_view = qvi_detail::make_view(prev, R, grid, market.regimes);
        for (int r = 0; r < R; ++r)
            for (int x = grid.x_min; x <= grid.x_max; ++x) {
                const std::size_t id = flat(r, x);
                rhs[id] = continuation_rhs(prev_view, x, r, market, costs);
                cont[id] = prev[id] + dt * rhs[id].value;
            }

        // Obstacle projection to its fixed point (Jacobi so the result is
        // independent of sweep order).
        work = cont;
        int sweeps = 0;
        for (;; ++sweeps) {
            if (sweeps > options.max_projection_sweeps)
                throw std::runtime_error("obstacle projection did not converge at t index " +
                                         std::to_string(it));
            const SliceView view = qvi_detail::make_view(work, R, grid, market.regimes);
            double max_lift = 0.0;
            for (int r = 0; r < R; ++r)
                for (int x = grid.x_min; x <= grid.x_max; ++x) {
                    const auto m = market_obstacle(view, x, r, costs.eps_m,
                                                   options.no_speculation);
                    const auto l = limit_obstacle(view, x, r, costs, market.fill,
                                                  options.no_speculation);
                    const std::size_t id = flat(r, x);
                    const double lifted = std::max({work[id], m.value, l.value});
                    next[id] = lifted;
                    max_lift = std::max(max_lift, lifted - work[id]);
                }
            work.swap(next);
            if (max_lift <= options.projection_tol) break;
        }

        // Final slice values and argmax record, ties resolved
        // Continue > Limit > Market.
        const SliceView view = qvi_detail::make_view(work, R, grid, market.regimes);
        for (int r = 0; r < R; ++r)
            for (int x = grid.x_min; x <= grid.x_max; ++x) {
                const auto m = market_obstacle(view, x, r, costs.eps_m,
                                               options.no_speculation);
                const auto l = limit_obstacle(view, x, r, costs, market.fill,
                                              options.no_speculation);
                const std::size_t id = flat(r, x);
                const double hv = std::max({cont[id], m.value, l.value});
                if (!std::isfinite(hv))
                    throw std::runtime_error(
                        "non-finite value at regime " + std::to_string(r) + ", t index " +
                        std::to_string(it) + ", x = " + std::to_string(x));
                NodeAction act;
                if (cont[id] >= hv) {
                    act = NodeAction{ActionType::Continue, rhs[id].delta_a,
                                     rhs[id].delta_b, 0, 0.0, 0};
                } else if (l.value >= hv) {
                    act = NodeAction{ActionType::Limit, 0.0, 0.0, l.eta, l.kappa, 0};
                } else {
                    act = NodeAction{ActionType::Market, 0.0, 0.0, 0, 0.0, m.xi};
                }
                next[id] = hv;
                const std::size_t sid = surf.index(r, it, x);
                surf.h[sid] = hv;
                surf.action[sid] = act;
            }
        prev.swap(next);
    }
    return surf;
}

/// Worst interior complementarity defect of a solved surface:
///   max over interior nodes of | min{ F, h - Mh, h - Lh } |
/// with the PDE residual F evaluated by a same-slice discretisation,
/// independent of the marching direction used by solve().  First order in
/// dt for this scheme.
struct ComplementarityStats {
    double max_abs_defect = 0.0;
    int worst_regime = 0;
    int worst_time = 0;
    int worst_x = 0;
};

inline ComplementarityStats complementarity_defect(const ValueSurface& surf,
                                                   const MarketParams& market,
                                                   const CostParams& costs,
                                                   const SolveOptions& options = {}) {
    ComplementarityStats stats;
    const GridSpec& grid = surf.grid;
    const int R = surf.n_regimes();
    const int nx = grid.n_x();
    const double dt = grid.dt();
    std::vector<double> slice(static_cast<std::size_t>(R) * nx);

    for (int it = 0; it < grid.t_steps; ++it) {
        for (int r = 0; r < R; ++r)
            for (int x = grid.x_min; x <= grid.x_max; ++x)
                slice[static_cast<std::size_t>(r) * nx + (x - grid.x_min)] =
                    surf.value(r, it, x);
        const SliceView view = qvi_detail::make_view(slice, R, grid, surf.regimes);
        for (int r = 0; r < R; ++r)
            for (int x = grid.x_min + 1; x < grid.x_max; ++x) {
                const double h_now = surf.value(r, it, x);
                const double h_next = surf.value(r, it + 1, x);
                const double f = (h_now - h_next) / dt -
                                 continuation_rhs(view, x, r, market, costs).value;
                const auto m =
                    market_obstacle(view, x, r, costs.eps_m, options.no_speculation);
                const auto l = limit_obstacle(view, x, r, costs, market.fill,
                                              options.no_speculation);
                const double defect =
                    std::min({f, h_now - m.value, h_now - l.value});
                if (std::abs(defect) > stats.max_abs_defect) {
                    stats.max_abs_defect = std::abs(defect);
                    stats.worst_regime = r;
                    stats.worst_time = it;
                    stats.worst_x = x;
                }
            }
    }
    return stats;
}

}  // namespace darkpool
