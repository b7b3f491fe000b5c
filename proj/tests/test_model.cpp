#include <catch2/catch_amalgamated.hpp>

#include "darkpool/model.hpp"

using namespace darkpool;

namespace {

MarketParams sample_market() {
    MarketParams m;
    m.sigma = 0.3;
    m.s0 = 100.0;
    m.regimes = {0.5};
    m.generator = {{0.0}};
    m.lambda_a = {{0.25, 0.5}};
    m.lambda_b = {{0.25, 0.5}};
    m.size_law_a = {{1, 1.0}};
    m.size_law_b = {{1, 1.0}};
    m.fill = {0.92, 0.0};
    return m;
}

CostParams sample_costs() {
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

GridSpec sample_grid() {
    GridSpec g;
    g.x_min = -10;
    g.x_max = 10;
    g.t_steps = 100;
    g.horizon = 1.0;
    return g;
}

bool has_code(const ValidationReport& report, const std::string& code) {
    for (const auto& v : report)
        if (v.code == code) return true;
    return false;
}

}  // namespace

TEST_CASE("valid configuration yields an empty report") {
    const auto report = validate(sample_market(), sample_costs(), sample_grid());
    for (const auto& v : report) INFO(v.code << ": " << v.message);
    CHECK(report.empty());
}

TEST_CASE("penalty ordering violations are reported") {
    auto costs = sample_costs();
    costs.eps_m = 2.0;
    costs.eps_l = 2.0;  // eps_m must strictly exceed eps_l
    CHECK(has_code(validate(sample_market(), costs, sample_grid()), "eps_ordering"));

    costs = sample_costs();
    costs.eps_l = 0.5;  // eps_l must exceed 1
    CHECK(has_code(validate(sample_market(), costs, sample_grid()), "eps_ordering"));
}

TEST_CASE("generator sign structure is checked") {
    auto market = sample_market();
    market.regimes = {0.5, 1.0};
    market.generator = {{0.5, -0.5}, {0.2, -0.2}};  // reversed signs in row 0
    market.lambda_a = {{0.25, 0.5}};
    market.lambda_b = {{0.25, 0.5}};
    const auto report = validate(market, sample_costs(), sample_grid());
    CHECK(has_code(report, "generator_offdiag_sign"));
    CHECK(has_code(report, "generator_row_sum"));
}

TEST_CASE("generator rows must sum to zero") {
    auto market = sample_market();
    market.regimes = {0.5, 1.0};
    market.generator = {{-0.5, 0.5}, {0.2, -0.3}};
    CHECK(has_code(validate(market, sample_costs(), sample_grid()),
                   "generator_row_sum"));
}

TEST_CASE("commissions may not exceed the half-spread of any regime") {
    auto market = sample_market();
    market.lambda_a = {{0.7, 0.5}};  // 0.7 > k = 0.5
    auto costs = sample_costs();
    costs.delta_menu_a = {0.7};
    CHECK(has_code(validate(market, costs, sample_grid()),
                   "commission_exceeds_halfspread"));
}

TEST_CASE("size laws must be normalised with positive integer support") {
    auto market = sample_market();
    market.size_law_a = {{1, 0.5}, {2, 0.4}};
    CHECK(has_code(validate(market, sample_costs(), sample_grid()), "size_law_sum"));

    market = sample_market();
    market.size_law_b = {{0, 1.0}};
    CHECK(has_code(validate(market, sample_costs(), sample_grid()),
                   "size_law_support"));
}

TEST_CASE("explicit stability bound is part of validation") {
    auto market = sample_market();
    market.lambda_a = {{0.25, 80.0}};
    market.lambda_b = {{0.25, 80.0}};
    auto grid = sample_grid();  // dt = 0.01, intensity 160 -> bound 1.6
    CHECK(has_code(validate(market, sample_costs(), grid), "stability_bound"));
}

TEST_CASE("validate is pure and idempotent") {
    auto market = sample_market();
    market.fill.p0 = 0.0;
    const auto r1 = validate(market, sample_costs(), sample_grid());
    const auto r2 = validate(market, sample_costs(), sample_grid());
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].code == r2[i].code);
        CHECK(r1[i].message == r2[i].message);
    }
    CHECK(has_code(r1, "fill_p0_range"));
}

TEST_CASE("fill probability at kappa = 0 equals p0") {
    CHECK(fill_probability(0.0, FillModel{0.92, 0.0}, 2.0) == 0.92);
    CHECK(fill_probability(0.0, FillModel{0.6, 1.3}, 2.0) == 0.6);
}

TEST_CASE("constant fill model ignores kappa") {
    const FillModel fill{0.92, 0.0};
    for (double kap : {0.0, 0.5, 1.0, 2.0})
        CHECK(fill_probability(kap, fill, 2.0) == 0.92);
}

TEST_CASE("exponential fill decay matches an independent series") {
    // 0.9 * exp(-0.5 * 2) = 0.9 * e^-1, with e^-1 from the Taylor series.
    double series = 0.0, term = 1.0;
    for (int n = 1; n <= 30; ++n) {
        series += term;
        term *= -1.0 / n;
    }
    series += term;
    const double expected = 0.9 * series;
    CHECK(fill_probability(2.0, FillModel{0.9, 0.5}, 2.0) ==
          Catch::Approx(expected).epsilon(1e-12));
    CHECK(fill_probability(2.0, FillModel{0.9, 0.5}, 2.0) ==
          Catch::Approx(0.33109).margin(1e-5));
}

TEST_CASE("fill probability rejects offsets outside the admissible band") {
    CHECK_THROWS_AS(fill_probability(-0.1, FillModel{0.9, 0.1}, 2.0),
                    std::domain_error);
    CHECK_THROWS_AS(fill_probability(2.5, FillModel{0.9, 0.1}, 2.0),
                    std::domain_error);
}

TEST_CASE("fill probability is strictly decreasing in kappa when alpha > 0") {
    const FillModel fill{0.8, 0.7};
    double prev = 2.0;
    for (double kap = 0.0; kap <= 2.0; kap += 0.25) {
        const double p = fill_probability(kap, fill, 2.0);
        CHECK(p < prev);
        CHECK(p > 0.0);
        prev = p;
    }
}
