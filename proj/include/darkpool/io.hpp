#pragma once

/**
 * @file io.hpp
 * @brief Deterministic artifact I/O: CSV tables for toy solutions, value
 *        surfaces and boundary curves, JSON summaries and run manifests,
 *        and the canonical configuration hash.
 *
 * All numeric output goes through one %.12g formatter so repeated runs
 * are byte-identical.
 */

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "darkpool/policy.hpp"
#include "darkpool/qvi.hpp"
#include "darkpool/sim.hpp"
#include "darkpool/toy.hpp"

namespace darkpool {

inline std::string fmt(double v) {
    if (v == 0.0) v = 0.0;  // normalise -0
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// FNV-1a 64-bit over the canonical (key-sorted) JSON dump.
inline std::string config_hash(const nlohmann::json& doc) {
    const std::string canon = doc.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Toy table CSV: stage,x,value,action
// ---------------------------------------------------------------------------

inline void write_toy_csv(std::ostream& os, const ToyTable& table) {
    os << "stage,x,value,action\n";
    for (const auto& cell : table.cells)
        os << cell.stage << ',' << cell.x << ',' << fmt(cell.value) << ','
           << to_string(cell.action) << '\n';
}

// ---------------------------------------------------------------------------
// Value surface CSV: regime,t,x,h,action,delta_a,delta_b,eta,kappa,xi
// with a metadata comment line used for grid round-trips.
// ---------------------------------------------------------------------------

inline void write_surface_csv(std::ostream& os, const ValueSurface& surf,
                              const std::string& hash) {
    const GridSpec& g = surf.grid;
    os << "# darkpool-surface v1 hash=" << hash << " x_min=" << g.x_min
       << " x_max=" << g.x_max << " t_steps=" << g.t_steps
       << " horizon=" << fmt(g.horizon) << " regimes=";
    for (int r = 0; r < surf.n_regimes(); ++r) {
        if (r) os << ';';
        os << fmt(surf.regimes[r]);
    }
    os << '\n';
    os << "regime,t,x,h,action,delta_a,delta_b,eta,kappa,xi\n";
    for (int r = 0; r < surf.n_regimes(); ++r)
        for (int it = 0; it < surf.n_t(); ++it)
            for (int x = g.x_min; x <= g.x_max; ++x) {
                const NodeAction& a = surf.action_at(r, it, x);
                os << r << ',' << fmt(surf.time_of(it)) << ',' << x << ','
                   << fmt(surf.value(r, it, x)) << ',' << to_string(a.type) << ',';
                switch (a.type) {
                    case ActionType::Continue:
                        os << fmt(a.delta_a) << ',' << fmt(a.delta_b) << ",,,";
                        break;
                    case ActionType::Limit:
                        os << ",," << a.eta << ',' << fmt(a.kappa) << ',';
                        break;
                    case ActionType::Market:
                        os << ",,,," << a.xi;
                        break;
                }
                os << '\n';
            }
}

struct SurfaceFile {
    ValueSurface surface;
    std::string hash;
};

namespace io_detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string meta_field(const std::string& header, const std::string& key) {
    const std::string tag = key + "=";
    const auto pos = header.find(tag);
    if (pos == std::string::npos)
        throw std::runtime_error("surface file: missing metadata field " + key);
    const auto end = header.find(' ', pos);
    return header.substr(pos + tag.size(), end == std::string::npos
                                               ? std::string::npos
                                               : end - pos - tag.size());
}

}  // namespace io_detail

/// Parses a surface CSV written by write_surface_csv.
inline SurfaceFile read_surface_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# darkpool-surface v1", 0) != 0)
        throw std::runtime_error("surface file: missing metadata header");

    SurfaceFile out;
    out.hash = io_detail::meta_field(line, "hash");
    GridSpec grid;
    grid.x_min = std::stoi(io_detail::meta_field(line, "x_min"));
    grid.x_max = std::stoi(io_detail::meta_field(line, "x_max"));
    grid.t_steps = std::stoi(io_detail::meta_field(line, "t_steps"));
    grid.horizon = std::stod(io_detail::meta_field(line, "horizon"));
    std::vector<double> regimes;
    for (const auto& tok : io_detail::split(io_detail::meta_field(line, "regimes"), ';'))
        regimes.push_back(std::stod(tok));

    if (!std::getline(is, line) || line.rfind("regime,t,x,h,action", 0) != 0)
        throw std::runtime_error("surface file: missing column header");

    ValueSurface surf;
    surf.grid = grid;
    surf.regimes = regimes;
    surf.h.assign(static_cast<std::size_t>(regimes.size()) * (grid.t_steps + 1) *
                      grid.n_x(),
                  std::numeric_limits<double>::quiet_NaN());
    surf.action.assign(surf.h.size(), NodeAction{});

    const double dt = grid.dt();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = io_detail::split(line, ',');
        if (f.size() != 10)
            throw std::runtime_error("surface file: malformed row: " + line);
        const int r = std::stoi(f[0]);
        const int it = static_cast<int>(std::llround(std::stod(f[1]) / dt));
        const int x = std::stoi(f[2]);
        if (r < 0 || r >= static_cast<int>(regimes.size()) || it < 0 ||
            it > grid.t_steps || x < grid.x_min || x > grid.x_max)
            throw std::runtime_error("surface file: row outside declared grid: " + line);
        const std::size_t id = surf.index(r, it, x);
        surf.h[id] = std::stod(f[3]);
        NodeAction a;
        if (f[4] == "continue") {
            a.type = ActionType::Continue;
            a.delta_a = std::stod(f[5]);
            a.delta_b = std::stod(f[6]);
        } else if (f[4] == "limit") {
            a.type = ActionType::Limit;
            a.eta = std::stoi(f[7]);
            a.kappa = std::stod(f[8]);
        } else if (f[4] == "market") {
            a.type = ActionType::Market;
            a.xi = std::stoi(f[9]);
        } else {
            throw std::runtime_error("surface file: unknown action: " + f[4]);
        }
        surf.action[id] = a;
    }
    for (double v : surf.h)
        if (std::isnan(v))
            throw std::runtime_error("surface file: grid not fully covered");
    return out.surface = std::move(surf), out;
}

// ---------------------------------------------------------------------------
// Boundary CSV: regime,t,side,x_limit,x_market,kappa_at_limit
// ---------------------------------------------------------------------------

inline void write_boundaries_csv(std::ostream& os, const BoundaryCurves& curves) {
    os << "regime,t,side,x_limit,x_market,kappa_at_limit\n";
    const double dt = curves.grid.dt();
    auto emit = [&](int r, int it, const char* side,
                    const BoundaryCurves::Curve& curve) {
        os << r << ',' << fmt(it * dt) << ',' << side << ',';
        if (curve.x_limit[it]) os << *curve.x_limit[it];
        os << ',';
        if (curve.x_market[it]) os << *curve.x_market[it];
        os << ',';
        if (curve.kappa_at_limit[it]) os << fmt(*curve.kappa_at_limit[it]);
        os << '\n';
    };
    for (std::size_t r = 0; r < curves.positive.size(); ++r)
        for (int it = 0; it <= curves.grid.t_steps; ++it) {
            emit(static_cast<int>(r), it, "pos", curves.positive[r]);
            emit(static_cast<int>(r), it, "neg", curves.negative[r]);
        }
}

// ---------------------------------------------------------------------------
// Simulation artifacts
// ---------------------------------------------------------------------------

inline nlohmann::json summary_json(const SimResult& result, std::uint64_t seed,
                                   const std::string& hash) {
    return nlohmann::json{{"config_hash", hash},
                          {"excluded", result.excluded},
                          {"mean", result.mean},
                          {"paths", result.paths},
                          {"seed", seed},
                          {"stderr", result.std_error}};
}

inline void write_path_log(std::ostream& os, const std::vector<PathRecord>& samples) {
    for (const auto& rec : samples) {
        for (const auto& ev : rec.events) {
            nlohmann::json line{{"t", ev.t},      {"kind", to_string(ev.kind)},
                                {"size", ev.size}, {"dx", ev.dx},
                                {"dy", ev.dy},     {"k", ev.k_idx}};
            os << line.dump() << '\n';
        }
        nlohmann::json tail{{"t", rec.terminal.t},
                            {"kind", "terminal"},
                            {"x", rec.terminal.x},
                            {"y", rec.terminal.y},
                            {"s", rec.terminal.s},
                            {"k", rec.terminal.k_idx},
                            {"objective", rec.objective}};
        os << tail.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct RunManifest {
    std::string config_hash;
    std::string subcommand;
    std::string version = "0.1.0";
    std::uint64_t seed = 0;
    nlohmann::json parameters;
    std::vector<std::string> outputs;
    double duration_ms = 0.0;
};

inline nlohmann::json manifest_json(const RunManifest& m) {
    return nlohmann::json{{"config_hash", m.config_hash},
                          {"duration_ms", m.duration_ms},
                          {"outputs", m.outputs},
                          {"parameters", m.parameters},
                          {"seed", m.seed},
                          {"subcommand", m.subcommand},
                          {"version", m.version}};
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << text;
}

}  // namespace darkpool
