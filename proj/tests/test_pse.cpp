#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "molelab/pse.hpp"
#include "molelab/rng.hpp"
#include "molelab/sampling.hpp"

#include <cmath>
#include <set>

using namespace molelab;

namespace {

ParameterSpace unit_square() {
    return ParameterSpace({{"x", 0.0, 1.0, Scale::linear},
                           {"y", 0.0, 1.0, Scale::linear}});
}

PatternProblem identity_problem() {
    return [](const ParameterVector& g, std::uint64_t) {
        return std::vector<double>{g[0], g[1]};
    };
}

/// Obstinately nonlinear map: most of the output mass clamps onto the grid
/// edges, interior cells are rare.
PatternProblem banana_problem() {
    return [](const ParameterVector& g, std::uint64_t) {
        return std::vector<double>{g[0], 10.0 * (g[1] - g[0] * g[0])};
    };
}

std::vector<GridDim> banana_grid() {
    return {{0.0, 1.0, 20}, {0.0, 0.5, 20}};
}

std::set<std::vector<std::size_t>> cells_of(const PatternGrid& grid) {
    std::set<std::vector<std::size_t>> out;
    for (const auto& [cell, entry] : grid.cells()) out.insert(cell);
    return out;
}

} // namespace

TEST_CASE("discretize boundaries and clamping") {
    PatternGrid grid({{0.0, 1.0, 10}, {0.0, 1.0, 10}});
    CHECK(grid.discretize({0.0, 0.0}) == std::vector<std::size_t>{0, 0});
    CHECK(grid.discretize({1.0, 1.0}) == std::vector<std::size_t>{9, 9});
    CHECK(grid.discretize({0.35, 0.5})[0] == 3);
    CHECK(grid.discretize({-4.0, 2.0}) == std::vector<std::size_t>{0, 9});
    CHECK(grid.out_of_range({-4.0, 2.0}));
    CHECK_FALSE(grid.out_of_range({0.2, 0.3}));
    CHECK_THROWS_AS(grid.discretize({0.5}), std::invalid_argument);
    CHECK_THROWS_AS(grid.discretize({0.5, std::nan("")}), std::invalid_argument);
}

TEST_CASE("coverage counts non-empty cells") {
    PatternGrid grid({{0.0, 1.0, 4}});
    CHECK(coverage(grid) == 0);
    grid.record(ParameterVector{{0.1}}, {0.1});
    CHECK(coverage(grid) == 1);
    grid.record(ParameterVector{{0.15}}, {0.15}); // same cell
    CHECK(coverage(grid) == 1);
    grid.record(ParameterVector{{0.9}}, {0.9});
    CHECK(coverage(grid) == 2);
}

TEST_CASE("first genome reaching a cell stays its exemplar") {
    PatternGrid grid({{0.0, 1.0, 2}});
    grid.record(ParameterVector{{0.1}}, {0.1});
    grid.record(ParameterVector{{0.2}}, {0.2});
    const auto& cell = grid.cells().begin()->second;
    CHECK(cell.hit_count == 2);
    CHECK(cell.exemplar_genome[0] == 0.1);
    CHECK(cell.exemplar_pattern[0] == 0.1);
}

TEST_CASE("identity problem fills nearly the whole grid") {
    PseConfig config;
    config.budget = 3000;
    config.batch = 30;
    config.seed = 4;
    config.workers = 4;
    const auto grid = pse_run(identity_problem(), unit_square(),
                              {{0.0, 1.0, 10}, {0.0, 1.0, 10}}, config);
    CHECK(grid.coverage() >= 95);
}

TEST_CASE("a constant problem discovers exactly one cell") {
    PseConfig config;
    config.budget = 500;
    config.batch = 25;
    config.seed = 8;
    const PatternProblem constant = [](const ParameterVector&, std::uint64_t) {
        return std::vector<double>{0.25, 0.25};
    };
    const auto grid = pse_run(constant, unit_square(),
                              {{0.0, 1.0, 10}, {0.0, 1.0, 10}}, config);
    CHECK(grid.coverage() == 1);
    CHECK(grid.cells().begin()->second.hit_count == 500);
}

TEST_CASE("discovered cells are monotone in budget for a fixed seed") {
    PseConfig small;
    small.budget = 600;
    small.batch = 20;
    small.seed = 15;
    PseConfig large = small;
    large.budget = 2400;
    const auto grid_small = pse_run(banana_problem(), unit_square(), banana_grid(), small);
    const auto grid_large = pse_run(banana_problem(), unit_square(), banana_grid(), large);
    const auto cells_small = cells_of(grid_small);
    const auto cells_large = cells_of(grid_large);
    for (const auto& cell : cells_small) CHECK(cells_large.count(cell) == 1);
    CHECK(grid_large.coverage() >= grid_small.coverage());
}

TEST_CASE("exemplars re-evaluate into their recorded cell") {
    PseConfig config;
    config.budget = 1500;
    config.batch = 25;
    config.seed = 16;
    const auto problem = banana_problem();
    const auto grid = pse_run(problem, unit_square(), banana_grid(), config);
    for (const auto& [cell, entry] : grid.cells()) {
        const auto pattern = problem(entry.exemplar_genome, 0);
        CHECK(grid.discretize(pattern) == cell);
    }
}

TEST_CASE("rarity selection weights cells by 1/(1+hits)") {
    PatternGrid grid({{0.0, 1.0, 4}});
    const std::vector<std::pair<double, std::size_t>> spec = {
        {0.1, 1}, {0.35, 2}, {0.6, 5}, {0.85, 10}};
    for (const auto& [position, hits] : spec)
        for (std::size_t h = 0; h < hits; ++h)
            grid.record(ParameterVector{{position}}, {position});

    double total_weight = 0.0;
    for (const auto& [position, hits] : spec)
        total_weight += 1.0 / (1.0 + static_cast<double>(hits));

    auto rng = make_engine(77);
    const int draws = 200000;
    std::map<double, int> counts;
    for (int t = 0; t < draws; ++t) {
        const PatternCell* cell = select_rare_parent(grid, rng);
        REQUIRE(cell != nullptr);
        ++counts[cell->exemplar_pattern[0]];
    }
    for (const auto& [position, hits] : spec) {
        const double p = (1.0 / (1.0 + static_cast<double>(hits))) / total_weight;
        const double sigma = std::sqrt(p * (1.0 - p) / draws);
        const double observed = static_cast<double>(counts[position]) / draws;
        CHECK(std::abs(observed - p) <= 3.0 * sigma);
    }
}

TEST_CASE("pse beats an equal-budget latin hypercube on the banana map") {
    const std::size_t budget = 1000;
    PseConfig config;
    config.budget = budget;
    config.batch = 25;
    config.seed = 19;
    config.workers = 4;
    const auto problem = banana_problem();
    const auto pse_grid_result = pse_run(problem, unit_square(), banana_grid(), config);

    PatternGrid lhs_grid(banana_grid());
    for (const auto& point : lhs(unit_square(), budget, 19))
        lhs_grid.record(point, problem(point, 0));

    CHECK(pse_run(problem, unit_square(), banana_grid(), config).coverage() ==
          pse_grid_result.coverage()); // deterministic
    CHECK(pse_grid_result.coverage() >= lhs_grid.coverage());
}

TEST_CASE("failed evaluations are discarded but the budget is consumed") {
    int logged = 0;
    PseConfig config;
    config.budget = 400;
    config.batch = 20;
    config.seed = 3;
    config.log = [&](const std::string&) { ++logged; };
    const PatternProblem flaky = [](const ParameterVector& g, std::uint64_t) {
        if (g[0] > 0.5) throw std::runtime_error("of range");
        return std::vector<double>{g[0], g[1]};
    };
    const auto grid = pse_run(flaky, unit_square(), {{0.0, 1.0, 10}, {0.0, 1.0, 10}},
                              config);
    CHECK(logged > 0);
    for (const auto& [cell, entry] : grid.cells())
        CHECK(entry.exemplar_genome[0] <= 0.5);
}

TEST_CASE("argument validation") {
    PseConfig config;
    config.budget = 10;
    config.batch = 20;
    CHECK_THROWS_AS(pse_run(identity_problem(), unit_square(),
                            {{0.0, 1.0, 4}, {0.0, 1.0, 4}}, config),
                    std::invalid_argument);
    CHECK_THROWS_AS(PatternGrid(std::vector<GridDim>{{1.0, 0.0, 4}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PatternGrid(std::vector<GridDim>{{0.0, 1.0, 0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PatternGrid(std::vector<GridDim>{}), std::invalid_argument);
}
