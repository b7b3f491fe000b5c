#pragma once

/**
 * @file model.hpp
 * @brief Domain types and parameter validation for the dark-pool
 *        market-making toolkit.
 *
 * A dark pool earns per-share commissions on client flow and hedges its
 * inventory in the lit order book.  Everything downstream (the exact toy
 * solver, the QVI finite-difference solvers and the Monte Carlo engine)
 * consumes the parameter containers defined here.
 */

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace darkpool {

/// One entry of a commission menu: posting commission `delta` attracts
/// client flow at Poisson rate `intensity`.
struct CommissionLevel {
    double delta = 0.0;
    double intensity = 0.0;
};

/// Atom of a discrete order-size law (sizes are positive integers so the
/// inventory stays on an integer lattice).
struct SizeAtom {
    int size = 1;
    double prob = 1.0;
};

/// Limit-order fill model: a full fill (z = 1) happens with probability
/// p0 * exp(-alpha * kappa) when the order is posted kappa away from the
/// best quote.  alpha = 0 recovers a constant fill probability.
struct FillModel {
    double p0 = 1.0;
    double alpha = 0.0;
};

struct MarketParams {
    double sigma = 0.0;   ///< mid-price volatility (per sqrt(time))
    double mu = 0.0;      ///< mid-price drift (per time)
    double s0 = 0.0;      ///< initial mid-price

    /// Half-spread regimes k_1..k_n (a single entry means a constant spread).
    std::vector<double> regimes;
    /// Generator (r_ij) of the regime chain; rows sum to zero.
    std::vector<std::vector<double>> generator;

    /// Commission menus with their arrival intensities.  The a-side flow
    /// removes inventory (the pool sells at s + delta_a); the b-side flow
    /// adds inventory (the pool buys at s - delta_b).
    std::vector<CommissionLevel> lambda_a;
    std::vector<CommissionLevel> lambda_b;

    std::vector<SizeAtom> size_law_a;
    std::vector<SizeAtom> size_law_b;

    FillModel fill;
};

struct CostParams {
    double eps_m = 0.0;   ///< lit-pool penalty per market order
    double eps_l = 0.0;   ///< lit-pool penalty per limit order
    std::vector<double> delta_menu_a;  ///< admissible a-side commissions
    std::vector<double> delta_menu_b;  ///< admissible b-side commissions
    double kappa_bar = 0.0;            ///< maximum limit-price offset
    std::vector<double> kappa_grid;    ///< admissible offsets in [0, kappa_bar]
    double phi = 0.0;                  ///< running inventory-penalty weight
};

enum class ObservationMode { Continuous, Discrete };

struct GridSpec {
    int x_min = -10;
    int x_max = 10;
    int t_steps = 100;      ///< number of time steps N
    double horizon = 1.0;   ///< T
    ObservationMode observation_mode = ObservationMode::Continuous;

    double dt() const { return horizon / static_cast<double>(t_steps); }
    int n_x() const { return x_max - x_min + 1; }
};

struct State {
    double t = 0.0;
    int x = 0;
    double y = 0.0;
    double s = 0.0;
    int k_idx = 0;
};

/// A single violated invariant.  `code` is machine-readable and stable.
struct Violation {
    std::string code;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Probability that a limit order posted kappa away from the best quote
/// fills in full.  Throws std::domain_error outside [0, kappa_bar].
inline double fill_probability(double kappa, const FillModel& fill, double kappa_bar) {
    if (!(kappa >= 0.0) || kappa > kappa_bar)
        throw std::domain_error("fill_probability: kappa outside [0, kappa_bar]");
    return fill.p0 * std::exp(-fill.alpha * kappa);
}

namespace detail {

inline void check_size_law(const std::vector<SizeAtom>& law, const char* side,
                           ValidationReport& out) {
    if (law.empty()) {
        out.push_back({"size_law_empty",
                       std::string("size law ") + side + " has no atoms"});
        return;
    }
    double total = 0.0;
    for (const auto& a : law) {
        if (a.size < 1)
            out.push_back({"size_law_support",
                           std::string("size law ") + side +
                               " has non-positive size " + std::to_string(a.size)});
        if (a.prob < 0.0)
            out.push_back({"size_law_negative_mass",
                           std::string("size law ") + side + " has negative mass"});
        total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-12)
        out.push_back({"size_law_sum",
                       std::string("size law ") + side + " sums to " +
                           std::to_string(total) + ", expected 1"});
}

inline void check_menu(const std::vector<CommissionLevel>& menu,
                       const std::vector<double>& declared, const char* side,
                       const std::vector<double>& regimes, ValidationReport& out) {
    if (menu.empty()) {
        out.push_back({"menu_empty",
                       std::string("commission menu ") + side + " is empty"});
        return;
    }
    for (const auto& lvl : menu) {
        if (lvl.intensity < 0.0)
            out.push_back({"intensity_negative",
                           std::string("menu ") + side + " has negative intensity"});
        if (lvl.delta < 0.0)
            out.push_back({"commission_negative",
                           std::string("menu ") + side + " has negative commission"});
        for (double k : regimes)
            if (lvl.delta > k + 1e-12)
                out.push_back({"commission_exceeds_halfspread",
                               std::string("menu ") + side + " commission " +
                                   std::to_string(lvl.delta) +
                                   " exceeds half-spread " + std::to_string(k)});
    }
    if (declared.size() != menu.size()) {
        out.push_back({"menu_mismatch",
                       std::string("declared delta menu ") + side +
                           " does not match the intensity table"});
        return;
    }
    for (std::size_t i = 0; i < menu.size(); ++i)
        if (std::abs(declared[i] - menu[i].delta) > 1e-12)
            out.push_back({"menu_mismatch",
                           std::string("declared delta menu ") + side +
                               " does not match the intensity table"});
}

inline double max_intensity(const std::vector<CommissionLevel>& menu) {
    double m = 0.0;
    for (const auto& lvl : menu) m = std::max(m, lvl.intensity);
    return m;
}

}  // namespace detail

/// Total event intensity that bounds the explicit time step: the largest
/// a-side and b-side arrival rates plus the fastest regime exit rate.
inline double total_event_intensity(const MarketParams& market) {
    double rate = detail::max_intensity(market.lambda_a) +
                  detail::max_intensity(market.lambda_b);
    double exit_rate = 0.0;
    const std::size_t n = market.generator.size();
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < market.generator[i].size(); ++j)
            if (j != i) row += market.generator[i][j];
        exit_rate = std::max(exit_rate, row);
    }
    return rate + exit_rate;
}

/// Checks every finite invariant of the parameter set and returns the full
/// list of violations.  Never throws; an empty report means the
/// configuration is usable.  Pure: identical inputs yield identical reports.
inline ValidationReport validate(const MarketParams& market, const CostParams& costs,
                                 const GridSpec& grid) {
    ValidationReport out;

    // penalty ordering eps_m > eps_l > 1
    if (!(costs.eps_m > costs.eps_l))
        out.push_back({"eps_ordering", "eps_m must exceed eps_l"});
    if (!(costs.eps_l > 1.0))
        out.push_back({"eps_ordering", "eps_l must exceed 1"});

    if (costs.phi < 0.0)
        out.push_back({"phi_negative", "phi must be non-negative"});

    if (market.regimes.empty())
        out.push_back({"regimes_empty", "at least one half-spread regime required"});
    for (double k : market.regimes)
        if (k < 0.0)
            out.push_back({"halfspread_negative", "half-spread must be non-negative"});

    // generator shape and sign structure
    const std::size_t n = market.regimes.size();
    if (market.generator.size() != n) {
        out.push_back({"generator_dims", "generator must be n x n with n = #regimes"});
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            if (market.generator[i].size() != n) {
                out.push_back({"generator_dims", "generator row " + std::to_string(i) +
                                                     " has wrong length"});
                continue;
            }
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                row += market.generator[i][j];
                if (j != i && market.generator[i][j] < 0.0)
                    out.push_back({"generator_offdiag_sign",
                                   "off-diagonal generator entries must be >= 0"});
            }
            if (std::abs(row) > 1e-9)
                out.push_back({"generator_row_sum", "generator row " + std::to_string(i) +
                                                        " sums to " + std::to_string(row)});
        }
    }

    detail::check_menu(market.lambda_a, costs.delta_menu_a, "a", market.regimes, out);
    detail::check_menu(market.lambda_b, costs.delta_menu_b, "b", market.regimes, out);
    detail::check_size_law(market.size_law_a, "a", out);
    detail::check_size_law(market.size_law_b, "b", out);

    if (!(market.fill.p0 > 0.0) || market.fill.p0 > 1.0)
        out.push_back({"fill_p0_range", "p0 must lie in (0, 1]"});
    if (market.fill.alpha < 0.0)
        out.push_back({"fill_alpha_range", "alpha must be non-negative"});

    if (costs.kappa_bar < 0.0)
        out.push_back({"kappa_bar_negative", "kappa_bar must be non-negative"});
    if (costs.kappa_grid.empty())
        out.push_back({"kappa_grid_empty", "kappa grid must not be empty"});
    for (double kap : costs.kappa_grid)
        if (kap < 0.0 || kap > costs.kappa_bar + 1e-12)
            out.push_back({"kappa_grid_range",
                           "kappa grid value " + std::to_string(kap) +
                               " outside [0, kappa_bar]"});

    if (!(grid.x_min < 0 && 0 < grid.x_max))
        out.push_back({"grid_bounds", "inventory bounds must satisfy x_min < 0 < x_max"});
    if (grid.t_steps < 1 || !(grid.horizon > 0.0))
        out.push_back({"grid_dt", "need t_steps >= 1 and horizon > 0"});
    else if (grid.dt() * total_event_intensity(market) > 1.0 + 1e-12)
        out.push_back({"stability_bound",
                       "dt * total event intensity = " +
                           std::to_string(grid.dt() * total_event_intensity(market)) +
                           " exceeds 1"});

    return out;
}

}  // namespace darkpool
