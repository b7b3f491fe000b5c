#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "darkpool/sim.hpp"
#include "darkpool/toy.hpp"

using namespace darkpool;

namespace {

MarketParams toy_market(double lambda = 0.5, double delta = 0.25) {
    MarketParams m;
    m.sigma = 0.3;
    m.s0 = 100.0;
    m.regimes = {0.5};
    m.generator = {{0.0}};
    m.lambda_a = {{delta, lambda}};
    m.lambda_b = {{delta, lambda}};
    m.size_law_a = {{1, 1.0}};
    m.size_law_b = {{1, 1.0}};
    m.fill = {0.92, 0.0};
    return m;
}

CostParams toy_costs() {
    CostParams c;
    c.eps_m = 5.0;
    c.eps_l = 3.0;
    c.delta_menu_a = {0.25};
    c.delta_menu_b = {0.25};
    c.kappa_bar = 2.0;
    c.kappa_grid = {0.0, 1.0, 2.0};
    c.phi = 0.0;
    return c;
}

GridSpec toy_grid() {
    GridSpec g;
    g.x_min = -50;
    g.x_max = 50;
    g.t_steps = 100;
    g.horizon = 1.0;
    return g;
}

SimConfig quiet_config(long long paths, std::uint64_t seed) {
    SimConfig cfg;
    cfg.paths = paths;
    cfg.seed = seed;
    cfg.dt_sim = 0.01;
    cfg.terminal = TerminalUtility::Quadratic;
    return cfg;
}

}  // namespace

TEST_CASE("degenerate market produces the terminal utility with zero error") {
    MarketParams m = toy_market(0.0);
    m.sigma = 0.0;
    SimConfig cfg = quiet_config(64, 7);
    cfg.x0 = 3;
    cfg.y0 = 2.0;
    const SimResult r =
        simulate(make_uncontrolled_policy(m), m, toy_costs(), toy_grid(), cfg);
    const double expected = 2.0 + 3.0 * 100.0 - 0.5 * 9.0;
    CHECK(r.mean == Catch::Approx(expected).epsilon(1e-12));
    CHECK(r.std_error == 0.0);
}

TEST_CASE("uncontrolled mean matches the closed form within three errors") {
    const MarketParams m = toy_market();
    SimConfig cfg = quiet_config(20000, 99);
    cfg.x0 = 2;
    const SimResult r =
        simulate(make_uncontrolled_policy(m), m, toy_costs(), toy_grid(), cfg);
    ToyParams toy;
    toy.delta_a = toy.delta_b = 0.25;
    toy.lambda_a = toy.lambda_b = 0.5;
    toy.k = 0.5;
    toy.p = 0.92;
    toy.eps_m = 5.0;
    toy.eps_l = 3.0;
    toy.horizon = 1.0;
    toy.stages = 100;
    const double target = uncontrolled_value(0.0, 2.0, 0.0, 100.0, toy);
    CHECK(std::abs(r.mean - target) <= 3.0 * r.std_error);
}

TEST_CASE("poisson arrival sampling reproduces the first two moments") {
    std::mt19937_64 rng(4242);
    const double lambda = 2.0, dt = 1.0;
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const int c = sample_arrivals(lambda, dt, rng);
        sum += c;
        sum_sq += static_cast<double>(c) * c;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    // sd of the sample mean; sd of the sample variance via the fourth
    // central moment of Poisson, mu4 = lambda (1 + 3 lambda).
    const double sd_mean = std::sqrt(lambda / n);
    const double mu4 = lambda * (1.0 + 3.0 * lambda);
    const double sd_var = std::sqrt((mu4 - lambda * lambda) / n);
    CHECK(std::abs(mean - lambda) <= 3.0 * sd_mean);
    CHECK(std::abs(var - lambda) <= 3.0 * sd_var);
    CHECK(sample_arrivals(0.0, dt, rng) == 0);
}

TEST_CASE("regime stepping respects the infinitesimal definition") {
    std::mt19937_64 rng(11);
    const std::vector<std::vector<double>> gen{{-0.8, 0.8}, {0.5, -0.5}};
    const double dt = 0.05;
    const int n = 200000;
    int switches = 0;
    for (int i = 0; i < n; ++i)
        if (step_regime(0, dt, gen, rng) != 0) ++switches;
    const double p = 0.8 * dt;
    const double sd = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(switches) / n - p) <= 3.0 * sd);

    const std::vector<std::vector<double>> none{{0.0}};
    for (int i = 0; i < 100; ++i) CHECK(step_regime(0, 0.1, none, rng) == 0);

    const std::vector<std::vector<double>> zero2{{0.0, 0.0}, {0.0, 0.0}};
    for (int i = 0; i < 100; ++i) CHECK(step_regime(1, 0.1, zero2, rng) == 1);
}

TEST_CASE("long-run regime occupation approaches the stationary law") {
    // Generator with rates 1 (0 -> 1) and 2 (1 -> 0): stationary (2/3, 1/3).
    MarketParams m = toy_market(0.0);
    m.sigma = 0.0;
    m.regimes = {0.5, 1.0};
    m.generator = {{-1.0, 1.0}, {2.0, -2.0}};
    GridSpec g = toy_grid();
    g.horizon = 50.0;
    g.t_steps = 5000;
    SimConfig cfg = quiet_config(60, 123);
    cfg.dt_sim = 0.01;
    cfg.sample_paths = 60;
    const SimResult r =
        simulate(make_uncontrolled_policy(m), m, toy_costs(), g, cfg);
    // Reconstruct occupation of regime 0 from the switch events.
    std::vector<double> fractions;
    for (const auto& rec : r.samples) {
        double at = 0.0, occ0 = 0.0;
        int k = 0;
        for (const auto& ev : rec.events) {
            if (ev.kind != EventKind::RegimeSwitch) continue;
            if (k == 0) occ0 += ev.t - at;
            at = ev.t;
            k = ev.k_idx;
        }
        if (k == 0) occ0 += g.horizon - at;
        fractions.push_back(occ0 / g.horizon);
    }
    double mean = 0.0;
    for (double f : fractions) mean += f;
    mean /= fractions.size();
    double var = 0.0;
    for (double f : fractions) var += (f - mean) * (f - mean);
    var /= (fractions.size() - 1);
    const double sd = std::sqrt(var / fractions.size());
    CHECK(std::abs(mean - 2.0 / 3.0) <= 3.0 * sd);
}

TEST_CASE("identical seeds give bit-identical results") {
    const MarketParams m = toy_market();
    SimConfig cfg = quiet_config(500, 31415);
    cfg.sample_paths = 3;
    const SimResult a =
        simulate(make_uncontrolled_policy(m), m, toy_costs(), toy_grid(), cfg);
    const SimResult b =
        simulate(make_uncontrolled_policy(m), m, toy_costs(), toy_grid(), cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        REQUIRE(a.samples[i].events.size() == b.samples[i].events.size());
        CHECK(a.samples[i].objective == b.samples[i].objective);
        for (std::size_t e = 0; e < a.samples[i].events.size(); ++e) {
            CHECK(a.samples[i].events[e].t == b.samples[i].events[e].t);
            CHECK(a.samples[i].events[e].dy == b.samples[i].events[e].dy);
        }
    }
}

TEST_CASE("event logs satisfy the cash and inventory accounting identities") {
    const MarketParams m = toy_market(2.0);
    SimConfig cfg = quiet_config(40, 777);
    cfg.x0 = 1;
    cfg.y0 = 5.0;
    cfg.sample_paths = 40;
    const SimResult r =
        simulate(make_uncontrolled_policy(m), m, toy_costs(), toy_grid(), cfg);
    REQUIRE(!r.samples.empty());
    for (const auto& rec : r.samples) {
        double dx = 0.0, dy = 0.0;
        for (const auto& ev : rec.events) {
            dx += ev.dx;
            dy += ev.dy;
        }
        CHECK(rec.terminal.x == 1 + static_cast<int>(dx));
        CHECK(rec.terminal.y == Catch::Approx(5.0 + dy).margin(1e-9));
    }
}

TEST_CASE("doubling the paths shrinks the standard error by root two") {
    const MarketParams m = toy_market();
    SimConfig cfg = quiet_config(30000, 2024);
    const SimResult half =
        simulate(make_uncontrolled_policy(m), m, toy_costs(), toy_grid(), cfg);
    cfg.paths = 60000;
    const SimResult full =
        simulate(make_uncontrolled_policy(m), m, toy_costs(), toy_grid(), cfg);
    const double ratio = half.std_error / full.std_error;
    CHECK(ratio > 1.30);
    CHECK(ratio < 1.53);
}

TEST_CASE("paths leaving the policy grid are excluded and capped at 1%") {
    // A policy covering only |x| <= 1 with busy flow: essentially every
    // path wanders off the table.
    PolicyTable tiny;
    tiny.grid.x_min = -1;
    tiny.grid.x_max = 1;
    tiny.grid.t_steps = 1;
    tiny.grid.horizon = 1.0;
    tiny.regimes = {0.5};
    NodeAction cont;
    cont.type = ActionType::Continue;
    cont.delta_a = 0.25;
    cont.delta_b = 0.25;
    tiny.action.assign(2 * 3, cont);
    tiny.region.assign(2 * 3, Region::CR);
    const MarketParams m = toy_market(8.0);
    SimConfig cfg = quiet_config(300, 5);
    CHECK_THROWS_AS(
        simulate(make_table_policy(tiny), m, toy_costs(), toy_grid(), cfg),
        SimExcludedError);
}

TEST_CASE("enforce_exit settles the path at the cash boundary") {
    // Client sells pour in; with a tight gains target the path stops early.
    MarketParams m = toy_market(0.0);
    m.sigma = 0.0;
    m.lambda_b = {{0.25, 30.0}};  // heavy buy flow spends cash fast
    SimConfig cfg = quiet_config(50, 17);
    cfg.enforce_exit = true;
    cfg.y_min = -500.0;
    cfg.y_max = 500.0;
    cfg.sample_paths = 50;
    const SimResult r =
        simulate(make_uncontrolled_policy(m), m, toy_costs(), toy_grid(), cfg);
    bool any_early = false;
    for (const auto& rec : r.samples)
        if (rec.terminal.t < 1.0) {
            any_early = true;
            CHECK(rec.terminal.y < cfg.y_min);
        }
    CHECK(any_early);
}
