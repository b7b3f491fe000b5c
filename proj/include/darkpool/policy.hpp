#pragma once

/**
 * @file policy.hpp
 * @brief Region extraction and lit-pool boundary curves from a solved
 *        value surface.
 *
 * Nodes are classified by which QVI branch binds (continuation, limit,
 * market); boundary curves report, per regime, side and time, the
 * smallest inventory magnitude at which each lit action appears, plus the
 * limit-price offset at the limit boundary.
 */

#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "darkpool/qvi.hpp"

namespace darkpool {

enum class Region { CR, LI, MI };

inline const char* to_string(Region r) {
    switch (r) {
        case Region::CR: return "CR";
        case Region::LI: return "LI";
        case Region::MI: return "MI";
    }
    return "?";
}

/// Node-wise action table; partitions every grid node.
struct PolicyTable {
    GridSpec grid;
    std::vector<double> regimes;
    std::vector<NodeAction> action;  ///< [regime][time][x]
    std::vector<Region> region;

    int n_regimes() const { return static_cast<int>(regimes.size()); }
    int n_x() const { return grid.n_x(); }
    int n_t() const { return grid.t_steps + 1; }
    std::size_t index(int r, int it, int x) const {
        return (static_cast<std::size_t>(r) * n_t() + it) * n_x() + (x - grid.x_min);
    }
    const NodeAction& action_at(int r, int it, int x) const {
        return action[index(r, it, x)];
    }
    Region region_at(int r, int it, int x) const { return region[index(r, it, x)]; }
};

/// Classifies every node of a solved surface by its recorded argmax.
/// Refuses unsolved or non-finite surfaces.
inline PolicyTable extract_regions(const ValueSurface& surf) {
    if (surf.empty()) throw std::runtime_error("extract_regions: unsolved surface");
    for (double v : surf.h)
        if (!std::isfinite(v))
            throw std::runtime_error("extract_regions: surface contains non-finite values");

    PolicyTable table;
    table.grid = surf.grid;
    table.regimes = surf.regimes;
    table.action = surf.action;
    table.region.resize(surf.action.size());
    for (std::size_t i = 0; i < surf.action.size(); ++i) {
        switch (surf.action[i].type) {
            case ActionType::Continue: table.region[i] = Region::CR; break;
            case ActionType::Limit: table.region[i] = Region::LI; break;
            case ActionType::Market: table.region[i] = Region::MI; break;
        }
    }
    return table;
}

/// Boundary curves per regime and side; entries are absent where the
/// corresponding region is empty at that time.
struct BoundaryCurves {
    struct Curve {
        std::vector<std::optional<int>> x_limit;          ///< smallest |x| in LI
        std::vector<std::optional<int>> x_market;         ///< smallest |x| in MI
        std::vector<std::optional<double>> kappa_at_limit;
    };
    GridSpec grid;
    std::vector<double> regimes;
    std::vector<Curve> positive;  ///< one per regime, indexed by time
    std::vector<Curve> negative;
};

struct BoundaryOptions {
    /// Skip isolated single-node region islands instead of failing.
    bool tolerate_islands = false;
};

namespace policy_detail {

struct SideScan {
    std::optional<int> x_limit;
    std::optional<int> x_market;
    std::optional<double> kappa;
    bool banded = true;
};

/// Walks one side of x = 0 outward and checks the CR..LI..MI band order.
inline SideScan scan_side(const PolicyTable& table, int r, int it, int direction,
                          bool tolerate_islands) {
    const int extent = direction > 0 ? table.grid.x_max : -table.grid.x_min;
    std::vector<Region> labels;
    labels.reserve(extent);
    for (int step = 1; step <= extent; ++step)
        labels.push_back(table.region_at(r, it, direction * step));

    if (tolerate_islands) {
        // Absorb single-node islands into identical surroundings so they
        // neither break the order check nor surface as boundary nodes.
        for (std::size_t i = 1; i + 1 < labels.size(); ++i)
            if (labels[i] != labels[i - 1] && labels[i] != labels[i + 1] &&
                labels[i - 1] == labels[i + 1])
                labels[i] = labels[i - 1];
    }

    SideScan out;
    int phase = 0;  // 0 = CR, 1 = LI, 2 = MI
    for (Region lab : labels) {
        const int rank = lab == Region::CR ? 0 : lab == Region::LI ? 1 : 2;
        if (rank < phase) {
            out.banded = false;
            return out;
        }
        phase = rank;
    }

    for (int step = 1; step <= extent; ++step) {
        const int x = direction * step;
        const Region reg = labels[step - 1];
        if (reg == Region::LI && !out.x_limit) {
            out.x_limit = x;
            out.kappa = table.action_at(r, it, x).kappa;
        }
        if (reg == Region::MI && !out.x_market) out.x_market = x;
    }
    return out;
}

}  // namespace policy_detail

/// Extracts the limit/market boundary curves.  Fails with a structural
/// error naming the offending (regime, t) when regions interleave,
/// unless single-node islands are tolerated.
inline BoundaryCurves extract_boundaries(const PolicyTable& table,
                                         const BoundaryOptions& options = {}) {
    BoundaryCurves curves;
    curves.grid = table.grid;
    curves.regimes = table.regimes;
    curves.positive.resize(table.n_regimes());
    curves.negative.resize(table.n_regimes());

    std::string broken;
    for (int r = 0; r < table.n_regimes(); ++r) {
        auto& pos = curves.positive[r];
        auto& neg = curves.negative[r];
        for (int it = 0; it < table.n_t(); ++it) {
            const auto up =
                policy_detail::scan_side(table, r, it, +1, options.tolerate_islands);
            const auto dn =
                policy_detail::scan_side(table, r, it, -1, options.tolerate_islands);
            if (!up.banded || !dn.banded) {
                if (!broken.empty()) broken += ", ";
                broken += "(regime " + std::to_string(r) + ", t index " +
                          std::to_string(it) + ")";
            }
            pos.x_limit.push_back(up.x_limit);
            pos.x_market.push_back(up.x_market);
            pos.kappa_at_limit.push_back(up.kappa);
            neg.x_limit.push_back(dn.x_limit);
            neg.x_market.push_back(dn.x_market);
            neg.kappa_at_limit.push_back(dn.kappa);
        }
    }
    if (!broken.empty())
        throw std::runtime_error("extract_boundaries: interleaved regions at " + broken);
    return curves;
}

}  // namespace darkpool
