// Command-line front end: configuration ingestion, subcommand dispatch and
// deterministic artifact emission (value surfaces, boundary curves,
// simulation summaries, plot-ready CSV).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "darkpool/config.hpp"
#include "darkpool/io.hpp"
#include "darkpool/model.hpp"
#include "darkpool/policy.hpp"
#include "darkpool/qvi.hpp"
#include "darkpool/sim.hpp"
#include "darkpool/toy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode {
    kOk = 0,
    kRuntime = 1,
    kConfig = 2,
    kStability = 3,
    kExcluded = 4,
};

int log_level() {
    const char* env = std::getenv("DARKPOOL_LOG");
    if (!env) return 0;
    const std::string v = env;
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[darkpool] " << msg << '\n';
}

struct LoadedConfig {
    darkpool::Config config;
    json raw;
    std::string hash;
};

LoadedConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw darkpool::ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    LoadedConfig out;
    out.config = darkpool::parse_config_text(buf.str());
    out.raw = json::parse(buf.str());
    out.hash = darkpool::config_hash(out.raw);
    return out;
}

std::string validation_text(const darkpool::ValidationReport& report) {
    std::string text;
    for (const auto& v : report) text += "  [" + v.code + "] " + v.message + "\n";
    return text;
}

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void write_manifest(const fs::path& out_dir, darkpool::RunManifest manifest,
                    double duration_ms) {
    manifest.duration_ms = duration_ms;
    darkpool::write_text_file((out_dir / "run_manifest.json").string(),
                              darkpool::manifest_json(manifest).dump(2) + "\n");
}

int cmd_toy(const std::string& config_path, const std::string& out_dir_raw) {
    Timer timer;
    LoadedConfig loaded = load_config(config_path);
    if (!loaded.config.toy)
        throw darkpool::ConfigError("toy subcommand needs a \"toy\" block");
    const darkpool::ToyParams& toy = *loaded.config.toy;

    const fs::path out_dir(out_dir_raw);
    fs::create_directories(out_dir);

    const darkpool::ToyTable table =
        darkpool::solve_toy(toy, loaded.config.grid.x_min, loaded.config.grid.x_max);
    std::ostringstream csv;
    darkpool::write_toy_csv(csv, table);
    darkpool::write_text_file((out_dir / "toy_table.csv").string(), csv.str());

    darkpool::RunManifest manifest;
    manifest.config_hash = loaded.hash;
    manifest.subcommand = "toy";
    manifest.parameters = {
        {"stages", toy.stages},
        {"distinguishable", darkpool::count_distinguishable(toy.stages)},
        {"limit_orders_viable", darkpool::limit_order_viable(toy)},
        {"x_min", loaded.config.grid.x_min},
        {"x_max", loaded.config.grid.x_max}};
    manifest.outputs = {"toy_table.csv"};
    write_manifest(out_dir, manifest, timer.ms());
    log_info("toy table written to " + (out_dir / "toy_table.csv").string());
    return kOk;
}

darkpool::VariantKind parse_variant(const std::string& name) {
    if (name == "fixed") return darkpool::VariantKind::FixedCommissions;
    if (name == "menu") return darkpool::VariantKind::CommissionMenu;
    if (name == "regime") return darkpool::VariantKind::RegimeSwitching;
    throw darkpool::ConfigError("unknown variant \"" + name + "\"");
}

int cmd_solve(const std::string& config_path, const std::string& variant_name,
              const std::string& out_dir_raw) {
    Timer timer;
    LoadedConfig loaded = load_config(config_path);
    const auto report =
        darkpool::validate(loaded.config.market, loaded.config.costs, loaded.config.grid);
    if (!report.empty()) {
        std::cerr << "configuration invalid:\n" << validation_text(report);
        return kConfig;
    }
    const darkpool::VariantKind kind = parse_variant(variant_name);

    const fs::path out_dir(out_dir_raw);
    fs::create_directories(out_dir);

    const darkpool::ValueSurface surf = darkpool::solve(
        kind, loaded.config.market, loaded.config.costs, loaded.config.grid);
    const darkpool::PolicyTable table = darkpool::extract_regions(surf);
    const darkpool::BoundaryCurves curves = darkpool::extract_boundaries(table);

    std::ostringstream surface_csv;
    darkpool::write_surface_csv(surface_csv, surf, loaded.hash);
    darkpool::write_text_file((out_dir / "surface.csv").string(), surface_csv.str());

    std::ostringstream boundary_csv;
    darkpool::write_boundaries_csv(boundary_csv, curves);
    darkpool::write_text_file((out_dir / "boundaries.csv").string(), boundary_csv.str());

    darkpool::RunManifest manifest;
    manifest.config_hash = loaded.hash;
    manifest.subcommand = "solve";
    manifest.parameters = {{"variant", variant_name},
                           {"regimes", loaded.config.market.regimes},
                           {"t_steps", loaded.config.grid.t_steps},
                           {"x_min", loaded.config.grid.x_min},
                           {"x_max", loaded.config.grid.x_max}};
    manifest.outputs = {"surface.csv", "boundaries.csv"};
    write_manifest(out_dir, manifest, timer.ms());
    log_info("surface and boundaries written to " + out_dir.string());
    return kOk;
}

int cmd_boundaries(const std::string& surface_path, const std::string& out_dir_raw) {
    Timer timer;
    std::ifstream is(surface_path);
    if (!is) throw std::runtime_error("cannot open surface file " + surface_path);
    const darkpool::SurfaceFile file = darkpool::read_surface_csv(is);
    const darkpool::PolicyTable table = darkpool::extract_regions(file.surface);
    const darkpool::BoundaryCurves curves = darkpool::extract_boundaries(table);

    const fs::path out_dir(out_dir_raw);
    fs::create_directories(out_dir);
    std::ostringstream boundary_csv;
    darkpool::write_boundaries_csv(boundary_csv, curves);
    darkpool::write_text_file((out_dir / "boundaries.csv").string(), boundary_csv.str());

    darkpool::RunManifest manifest;
    manifest.config_hash = file.hash;
    manifest.subcommand = "boundaries";
    manifest.parameters = {{"surface", surface_path}};
    manifest.outputs = {"boundaries.csv"};
    write_manifest(out_dir, manifest, timer.ms());
    return kOk;
}

int cmd_simulate(const std::string& config_path, const std::string& policy_path,
                 std::optional<long long> paths_override,
                 std::optional<std::uint64_t> seed_override,
                 const std::string& out_dir_raw) {
    Timer timer;
    LoadedConfig loaded = load_config(config_path);
    const auto report =
        darkpool::validate(loaded.config.market, loaded.config.costs, loaded.config.grid);
    if (!report.empty()) {
        std::cerr << "configuration invalid:\n" << validation_text(report);
        return kConfig;
    }
    darkpool::SimConfig sim = loaded.config.sim;
    if (paths_override) sim.paths = *paths_override;
    if (seed_override) sim.seed = *seed_override;

    darkpool::SimPolicy policy;
    std::string policy_hash;
    if (policy_path.empty()) {
        policy = darkpool::make_uncontrolled_policy(loaded.config.market);
    } else {
        std::ifstream is(policy_path);
        if (!is) throw std::runtime_error("cannot open policy file " + policy_path);
        const darkpool::SurfaceFile file = darkpool::read_surface_csv(is);
        policy_hash = file.hash;
        if (file.surface.grid.x_min > loaded.config.grid.x_min ||
            file.surface.grid.x_max < loaded.config.grid.x_max)
            throw darkpool::ConfigError("policy grid does not cover the simulated range");
        if (sim.dt_sim > 0.0 && sim.dt_sim > file.surface.grid.dt() + 1e-12)
            throw darkpool::ConfigError("sim.dt must not exceed the policy grid step");
        policy = darkpool::make_table_policy(darkpool::extract_regions(file.surface));
    }

    const fs::path out_dir(out_dir_raw);
    fs::create_directories(out_dir);

    darkpool::SimResult result;
    try {
        result = darkpool::simulate(policy, loaded.config.market, loaded.config.costs,
                                    loaded.config.grid, sim);
    } catch (const darkpool::SimExcludedError& e) {
        std::cerr << e.what() << '\n';
        return kExcluded;
    }

    darkpool::write_text_file(
        (out_dir / "sim_summary.json").string(),
        darkpool::summary_json(result, sim.seed, loaded.hash).dump(2) + "\n");
    if (!result.samples.empty()) {
        std::ostringstream log;
        darkpool::write_path_log(log, result.samples);
        darkpool::write_text_file((out_dir / "paths.jsonl").string(), log.str());
    }

    darkpool::RunManifest manifest;
    manifest.config_hash = loaded.hash;
    manifest.subcommand = "simulate";
    manifest.seed = sim.seed;
    manifest.parameters = {{"paths", sim.paths},
                           {"policy", policy_path.empty() ? "uncontrolled" : policy_path},
                           {"policy_hash", policy_hash},
                           {"excluded", result.excluded}};
    manifest.outputs = {"sim_summary.json"};
    if (!result.samples.empty()) manifest.outputs.push_back("paths.jsonl");
    write_manifest(out_dir, manifest, timer.ms());
    log_info("simulation mean " + darkpool::fmt(result.mean) + " +- " +
             darkpool::fmt(result.std_error));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dark-pool market-making toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", variant = "fixed", policy_path;
    std::optional<long long> paths;
    std::optional<std::uint64_t> seed;

    auto* toy = app.add_subcommand("toy", "exact discrete-model table");
    toy->add_option("--config", config_path, "configuration JSON")->required();
    toy->add_option("--out", out_dir, "output directory");

    auto* solve = app.add_subcommand("solve", "finite-difference QVI solve");
    solve->add_option("--config", config_path, "configuration JSON")->required();
    solve->add_option("--variant", variant, "fixed | menu | regime");
    solve->add_option("--out", out_dir, "output directory");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo policy evaluation");
    simulate->add_option("--config", config_path, "configuration JSON")->required();
    simulate->add_option("--policy", policy_path, "surface CSV from solve");
    simulate->add_option("--paths", paths, "number of paths");
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--out", out_dir, "output directory");

    auto* boundaries = app.add_subcommand("boundaries", "boundary CSV from a surface");
    boundaries->add_option("--policy", policy_path, "surface CSV from solve")->required();
    boundaries->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (toy->parsed()) return cmd_toy(config_path, out_dir);
        if (solve->parsed()) return cmd_solve(config_path, variant, out_dir);
        if (simulate->parsed())
            return cmd_simulate(config_path, policy_path, paths, seed, out_dir);
        if (boundaries->parsed()) return cmd_boundaries(policy_path, out_dir);
    } catch (const darkpool::StabilityError& e) {
        std::cerr << e.what() << '\n';
        return kStability;
    } catch (const darkpool::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}
