#pragma once

/**
 * @file config.hpp
 * @brief Strict JSON configuration: one document with top-level blocks
 *        "market", "costs", "grid" and optional "toy" and "sim" blocks
 *        shared by every subcommand.  Unknown keys are rejected and every
 *        number must be finite.
 */

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "darkpool/model.hpp"
#include "darkpool/sim.hpp"
#include "darkpool/toy.hpp"

namespace darkpool {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct Config {
    MarketParams market;
    CostParams costs;
    GridSpec grid;
    std::optional<ToyParams> toy;
    SimConfig sim;
    bool has_sim = false;
};

namespace config_detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError("missing key \"" + std::string(key) + "\" in " + where);
    return *it;
}

inline double num(const json& v, const std::string& where) {
    if (!v.is_number())
        throw ConfigError(where + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + " must be finite");
    return d;
}

inline double num_at(const json& obj, const char* key, const std::string& where) {
    return num(require(obj, key, where), where + "." + key);
}

inline double num_or(const json& obj, const char* key, const std::string& where,
                     double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return num(*it, where + "." + key);
}

inline int int_at(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer())
        throw ConfigError(where + "." + key + " must be an integer");
    return v.get<int>();
}

inline std::vector<CommissionLevel> menu_at(const json& obj, const char* key,
                                            const std::string& where) {
    const json& arr = require(obj, key, where);
    if (!arr.is_array() || arr.empty())
        throw ConfigError(where + "." + key + " must be a non-empty array");
    std::vector<CommissionLevel> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string at = where + "." + key + "[" + std::to_string(i) + "]";
        if (!arr[i].is_object()) throw ConfigError(at + " must be an object");
        reject_unknown(arr[i], at, {"delta", "lambda"});
        out.push_back({num_at(arr[i], "delta", at), num_at(arr[i], "lambda", at)});
    }
    return out;
}

inline std::vector<SizeAtom> law_at(const json& obj, const char* key,
                                    const std::string& where) {
    const json& arr = require(obj, key, where);
    if (!arr.is_array() || arr.empty())
        throw ConfigError(where + "." + key + " must be a non-empty array");
    std::vector<SizeAtom> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string at = where + "." + key + "[" + std::to_string(i) + "]";
        if (!arr[i].is_object()) throw ConfigError(at + " must be an object");
        reject_unknown(arr[i], at, {"size", "prob"});
        out.push_back({int_at(arr[i], "size", at), num_at(arr[i], "prob", at)});
    }
    return out;
}

inline std::vector<double> num_array(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ConfigError(where + " must be an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(num(arr[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline MarketParams parse_market(const json& m) {
    reject_unknown(m, "market",
                   {"sigma", "mu", "s0", "regimes", "generator", "lambda_a", "lambda_b",
                    "size_law_a", "size_law_b", "fill_model"});
    MarketParams market;
    market.sigma = num_at(m, "sigma", "market");
    market.mu = num_at(m, "mu", "market");
    market.s0 = num_at(m, "s0", "market");
    market.regimes = num_array(require(m, "regimes", "market"), "market.regimes");
    const json& gen = require(m, "generator", "market");
    if (!gen.is_array()) throw ConfigError("market.generator must be an array of rows");
    for (std::size_t i = 0; i < gen.size(); ++i)
        market.generator.push_back(
            num_array(gen[i], "market.generator[" + std::to_string(i) + "]"));
    if (market.generator.size() != market.regimes.size())
        throw ConfigError("market.generator and market.regimes dimensions disagree");
    for (const auto& row : market.generator)
        if (row.size() != market.regimes.size())
            throw ConfigError("market.generator rows must match the regime count");
    market.lambda_a = menu_at(m, "lambda_a", "market");
    market.lambda_b = menu_at(m, "lambda_b", "market");
    market.size_law_a = law_at(m, "size_law_a", "market");
    market.size_law_b = law_at(m, "size_law_b", "market");
    const json& fill = require(m, "fill_model", "market");
    reject_unknown(fill, "market.fill_model", {"p0", "alpha"});
    market.fill.p0 = num_at(fill, "p0", "market.fill_model");
    market.fill.alpha = num_at(fill, "alpha", "market.fill_model");
    return market;
}

inline CostParams parse_costs(const json& c) {
    reject_unknown(c, "costs",
                   {"eps_m", "eps_l", "delta_menu_a", "delta_menu_b", "kappa_bar",
                    "kappa_grid", "phi"});
    CostParams costs;
    costs.eps_m = num_at(c, "eps_m", "costs");
    costs.eps_l = num_at(c, "eps_l", "costs");
    costs.delta_menu_a =
        num_array(require(c, "delta_menu_a", "costs"), "costs.delta_menu_a");
    costs.delta_menu_b =
        num_array(require(c, "delta_menu_b", "costs"), "costs.delta_menu_b");
    costs.kappa_bar = num_at(c, "kappa_bar", "costs");
    costs.kappa_grid = num_array(require(c, "kappa_grid", "costs"), "costs.kappa_grid");
    costs.phi = num_at(c, "phi", "costs");
    return costs;
}

inline GridSpec parse_grid(const json& g) {
    reject_unknown(g, "grid",
                   {"x_min", "x_max", "t_steps", "horizon", "observation_mode"});
    GridSpec grid;
    grid.x_min = int_at(g, "x_min", "grid");
    grid.x_max = int_at(g, "x_max", "grid");
    grid.t_steps = int_at(g, "t_steps", "grid");
    grid.horizon = num_at(g, "horizon", "grid");
    if (auto it = g.find("observation_mode"); it != g.end()) {
        const std::string mode = it->get<std::string>();
        if (mode == "continuous")
            grid.observation_mode = ObservationMode::Continuous;
        else if (mode == "discrete")
            grid.observation_mode = ObservationMode::Discrete;
        else
            throw ConfigError("grid.observation_mode must be continuous or discrete");
    }
    return grid;
}

inline ToyParams parse_toy(const json& t) {
    reject_unknown(t, "toy",
                   {"delta_a", "delta_b", "lambda_a", "lambda_b", "k", "p", "eps_m",
                    "eps_l", "horizon", "stages"});
    ToyParams toy;
    toy.delta_a = num_at(t, "delta_a", "toy");
    toy.delta_b = num_at(t, "delta_b", "toy");
    toy.lambda_a = num_at(t, "lambda_a", "toy");
    toy.lambda_b = num_at(t, "lambda_b", "toy");
    toy.k = num_at(t, "k", "toy");
    toy.p = num_at(t, "p", "toy");
    toy.eps_m = num_at(t, "eps_m", "toy");
    toy.eps_l = num_at(t, "eps_l", "toy");
    toy.horizon = num_at(t, "horizon", "toy");
    toy.stages = int_at(t, "stages", "toy");
    if (toy.stages < 1) throw ConfigError("toy.stages must be >= 1");
    if (!(toy.p > 0.0) || toy.p > 1.0) throw ConfigError("toy.p must lie in (0, 1]");
    if (toy.delta_a < 0 || toy.delta_b < 0 || toy.lambda_a < 0 || toy.lambda_b < 0 ||
        toy.k < 0 || toy.eps_m < 0 || toy.eps_l < 0 || !(toy.horizon > 0))
        throw ConfigError("toy parameters must be non-negative with horizon > 0");
    return toy;
}

inline SimConfig parse_sim(const json& s) {
    reject_unknown(s, "sim",
                   {"paths", "seed", "dt", "enforce_exit", "y_min", "y_max", "x0", "y0",
                    "k0", "price_model", "terminal", "sample_paths"});
    SimConfig cfg;
    if (auto it = s.find("paths"); it != s.end()) cfg.paths = it->get<long long>();
    if (auto it = s.find("seed"); it != s.end()) cfg.seed = it->get<std::uint64_t>();
    cfg.dt_sim = num_or(s, "dt", "sim", 0.0);
    if (auto it = s.find("enforce_exit"); it != s.end())
        cfg.enforce_exit = it->get<bool>();
    cfg.y_min = num_or(s, "y_min", "sim", cfg.y_min);
    cfg.y_max = num_or(s, "y_max", "sim", cfg.y_max);
    if (auto it = s.find("x0"); it != s.end()) cfg.x0 = it->get<int>();
    cfg.y0 = num_or(s, "y0", "sim", 0.0);
    if (auto it = s.find("k0"); it != s.end()) cfg.k0 = it->get<int>();
    if (auto it = s.find("price_model"); it != s.end()) {
        const std::string m = it->get<std::string>();
        if (m == "abm")
            cfg.price_model = PriceModel::Arithmetic;
        else if (m == "gbm")
            cfg.price_model = PriceModel::Geometric;
        else
            throw ConfigError("sim.price_model must be abm or gbm");
    }
    if (auto it = s.find("terminal"); it != s.end()) {
        const std::string m = it->get<std::string>();
        if (m == "quadratic")
            cfg.terminal = TerminalUtility::Quadratic;
        else if (m == "linear_abs")
            cfg.terminal = TerminalUtility::LinearAbs;
        else
            throw ConfigError("sim.terminal must be quadratic or linear_abs");
    }
    if (auto it = s.find("sample_paths"); it != s.end())
        cfg.sample_paths = it->get<int>();
    if (cfg.paths < 1) throw ConfigError("sim.paths must be >= 1");
    if (cfg.dt_sim < 0) throw ConfigError("sim.dt must be positive when given");
    return cfg;
}

}  // namespace config_detail

/// Parses and structurally checks a configuration document.  Numeric
/// domain checks beyond shape (penalty ordering, generator rows, ...) are
/// the job of validate().
inline Config parse_config(const nlohmann::json& doc) {
    using namespace config_detail;
    if (!doc.is_object()) throw ConfigError("configuration root must be an object");
    reject_unknown(doc, "configuration root", {"market", "costs", "grid", "toy", "sim"});
    Config cfg;
    cfg.market = parse_market(require(doc, "market", "configuration root"));
    cfg.costs = parse_costs(require(doc, "costs", "configuration root"));
    cfg.grid = parse_grid(require(doc, "grid", "configuration root"));
    if (auto it = doc.find("toy"); it != doc.end()) cfg.toy = parse_toy(*it);
    if (auto it = doc.find("sim"); it != doc.end()) {
        cfg.sim = parse_sim(*it);
        cfg.has_sim = true;
    }
    return cfg;
}

inline Config parse_config_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

}  // namespace darkpool
