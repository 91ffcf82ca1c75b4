#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "molelab/nsga2.hpp"
#include "molelab/rng.hpp"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace molelab;

namespace {

ParameterSpace unit_cube(std::size_t d) {
    std::vector<ParameterSpec> specs;
    for (std::size_t k = 0; k < d; ++k)
        specs.push_back({"x" + std::to_string(k), 0.0, 1.0, Scale::linear});
    return ParameterSpace(std::move(specs));
}

std::vector<Individual> population_from(const std::vector<ObjectiveVector>& objectives) {
    std::vector<Individual> population(objectives.size());
    for (std::size_t i = 0; i < objectives.size(); ++i)
        population[i].objectives = objectives[i];
    return population;
}

EvolutionConfig analytic_config(std::uint64_t seed, std::size_t pop,
                                std::size_t budget) {
    EvolutionConfig config;
    config.population_size = pop;
    config.max_evaluations = budget;
    config.n_objectives = 2;
    config.seed = seed;
    config.workers = 4;
    return config;
}

MultiObjectiveProblem analytic_problem() {
    return [](const ParameterVector& genome, std::uint64_t) {
        return oracles::two_parabola_objectives(genome);
    };
}

std::vector<std::vector<double>> archive_points(const ParetoArchive& archive) {
    std::vector<std::vector<double>> points;
    for (const auto& ind : archive.individuals) points.push_back(ind.objectives);
    return points;
}

} // namespace

TEST_CASE("dominates basics") {
    CHECK(dominates({0.1, 0.2, 0.3}, {0.2, 0.2, 0.4}));
    CHECK_FALSE(dominates({0.1, 0.2}, {0.1, 0.2}));
    CHECK_FALSE(dominates({0.1, 0.5}, {0.5, 0.1}));
    CHECK_FALSE(dominates({0.5, 0.1}, {0.1, 0.5}));
    CHECK_THROWS_AS(dominates({0.1}, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("dominates is a strict partial order") {
    auto rng = make_engine(404);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 3000; ++trial) {
        ObjectiveVector a(3), b(3), c(3);
        for (int k = 0; k < 3; ++k) {
            a[k] = uniform(rng);
            // ties common enough to matter
            b[k] = coin(rng) ? a[k] : uniform(rng);
            c[k] = coin(rng) ? b[k] : uniform(rng);
        }
        CHECK_FALSE(dominates(a, a));                              // irreflexive
        if (dominates(a, b)) CHECK_FALSE(dominates(b, a));         // antisymmetric
        if (dominates(a, b) && dominates(b, c)) CHECK(dominates(a, c)); // transitive
    }
}

TEST_CASE("non_dominated_sort on hand cases") {
    const auto single = non_dominated_sort(population_from({{1.0, 1.0}}));
    REQUIRE(single.size() == 1);
    CHECK(single[0] == std::vector<std::size_t>{0});

    const auto mixed = non_dominated_sort(
        population_from({{1.0, 2.0}, {2.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}}));
    REQUIRE(mixed.size() == 3);
    CHECK(mixed[0] == std::vector<std::size_t>{0, 1});
    CHECK(mixed[1] == std::vector<std::size_t>{2});
    CHECK(mixed[2] == std::vector<std::size_t>{3});

    const auto chain = non_dominated_sort(
        population_from({{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}}));
    REQUIRE(chain.size() == 3);
    for (std::size_t f = 0; f < 3; ++f) CHECK(chain[f].size() == 1);

    std::vector<Individual> unevaluated(2);
    unevaluated[0].objectives = {1.0, 2.0};
    CHECK_THROWS_AS(non_dominated_sort(unevaluated), std::invalid_argument);
}

TEST_CASE("non_dominated_sort agrees with the brute-force oracle") {
    auto rng = make_engine(808);
    std::uniform_int_distribution<std::size_t> size(1, 50);
    std::uniform_int_distribution<std::size_t> arity(2, 3);
    std::uniform_int_distribution<int> levels(0, 4); // discrete grid forces ties
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = size(rng);
        const std::size_t m = arity(rng);
        std::vector<ObjectiveVector> objectives(n, ObjectiveVector(m));
        for (auto& vec : objectives)
            for (auto& v : vec) v = 0.25 * levels(rng);
        const auto population = population_from(objectives);
        const auto fast = non_dominated_sort(population);
        const auto slow = oracles::non_dominated_sort_bruteforce(population);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t f = 0; f < fast.size(); ++f) {
            auto a = fast[f];
            auto b = slow[f];
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
        // every individual appears exactly once
        std::size_t total = 0;
        for (const auto& front : fast) total += front.size();
        CHECK(total == n);
    }
}

TEST_CASE("crowding_distance conventions") {
    const double inf = std::numeric_limits<double>::infinity();

    const auto pair = crowding_distance(population_from({{1.0, 2.0}, {2.0, 1.0}}));
    CHECK(pair == std::vector<double>{inf, inf});

    // three collinear points in one objective: ends infinite, middle finite
    const auto tri =
        crowding_distance(population_from({{0.0, 2.0}, {1.0, 1.0}, {2.0, 0.0}}));
    CHECK(tri[0] == inf);
    CHECK(tri[2] == inf);
    CHECK(tri[1] == doctest::Approx(2.0)); // (2-0)/2 per objective

    // duplicated vectors straddled by the boundary points
    const auto dup = crowding_distance(
        population_from({{0.0, 2.0}, {1.0, 1.0}, {1.0, 1.0}, {2.0, 0.0}}));
    CHECK(dup[0] == inf);
    CHECK(dup[3] == inf);
    CHECK(dup[1] == doctest::Approx(1.0)); // 0.5 + 0.5
    CHECK(dup[2] == doctest::Approx(1.0));

    // middle member of a triple duplicate collects zero gap
    const auto triple = crowding_distance(population_from(
        {{0.0, 4.0}, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {4.0, 0.0}}));
    CHECK(triple[0] == inf);
    CHECK(triple[4] == inf);
    CHECK(triple[1] == doctest::Approx(0.5));
    CHECK(triple[2] == doctest::Approx(0.0));
    CHECK(triple[3] == doctest::Approx(1.5));
}

TEST_CASE("vary honours rates, bounds and determinism") {
    const auto space = unit_cube(3);
    EvolutionConfig config;
    config.crossover_rate = 0.0;
    config.mutation_rate = 0.0;

    auto rng = make_engine(1);
    const ParameterVector a{{0.1, 0.5, 0.9}};
    const ParameterVector b{{0.3, 0.2, 0.7}};
    const auto identical = vary(a, b, space, config, rng);
    CHECK(identical.first == a);
    CHECK(identical.second == b);

    config.crossover_rate = 0.9;
    config.mutation_rate = -1.0;
    for (int trial = 0; trial < 100000 / 100; ++trial) {
        // amortized: 100 pair-draws per trial keeps the count at 1e5 children
        for (int inner = 0; inner < 50; ++inner) {
            const auto [ca, cb] = vary(a, b, space, config, rng);
            CHECK(space.contains(ca));
            CHECK(space.contains(cb));
        }
    }

    auto rng1 = make_engine(9);
    auto rng2 = make_engine(9);
    CHECK(vary(a, b, space, config, rng1) == vary(a, b, space, config, rng2));
}

TEST_CASE("pareto archive keeps mutual non-domination") {
    ParetoArchive archive;
    Individual ind;
    ind.genome = ParameterVector{{0.0}};
    ind.objectives = {1.0, 1.0};
    archive.add(ind);
    ind.objectives = {2.0, 2.0}; // dominated, rejected
    archive.add(ind);
    CHECK(archive.size() == 1);
    ind.objectives = {0.5, 2.0}; // incomparable, kept
    archive.add(ind);
    CHECK(archive.size() == 2);
    ind.objectives = {0.5, 0.5}; // dominates everything
    archive.add(ind);
    CHECK(archive.size() == 1);
    CHECK(archive.individuals[0].objectives == ObjectiveVector{0.5, 0.5});
    archive.add(ind); // exact duplicate dropped
    CHECK(archive.size() == 1);
    CHECK(oracles::archive_mutually_non_dominated(archive));
}

TEST_CASE("budget equal to the population returns its non-dominated subset") {
    const auto space = unit_cube(3);
    auto config = analytic_config(21, 16, 16);
    const auto archive = nsga2_run(analytic_problem(), space, config);
    CHECK(archive.size() >= 1);
    CHECK(archive.size() <= 16);
    CHECK(oracles::archive_mutually_non_dominated(archive));
    for (const auto& ind : archive.individuals)
        CHECK(ind.objectives == oracles::two_parabola_objectives(ind.genome));
}

TEST_CASE("nsga2_run is deterministic and worker-count invariant") {
    const auto space = unit_cube(3);
    auto config = analytic_config(5, 20, 200);
    config.workers = 1;
    const auto a = nsga2_run(analytic_problem(), space, config);
    config.workers = 8;
    const auto b = nsga2_run(analytic_problem(), space, config);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.individuals[i].genome == b.individuals[i].genome);
        CHECK(a.individuals[i].objectives == b.individuals[i].objectives);
    }
}

TEST_CASE("per-objective bests never regress under a deterministic evaluator") {
    const auto space = unit_cube(3);
    auto config = analytic_config(33, 24, 24 * 20);
    std::vector<double> best{1e18, 1e18};
    bool violated = false;
    config.on_generation = [&](std::size_t, const std::vector<Individual>& population) {
        double g0 = 1e18, g1 = 1e18;
        for (const auto& ind : population) {
            g0 = std::min(g0, ind.objectives[0]);
            g1 = std::min(g1, ind.objectives[1]);
        }
        if (g0 > best[0] + 1e-15 || g1 > best[1] + 1e-15) violated = true;
        best = {g0, g1};
    };
    nsga2_run(analytic_problem(), space, config);
    CHECK_FALSE(violated);
}

TEST_CASE("noisy problems carry the configured replication count") {
    const auto space = unit_cube(2);
    auto config = analytic_config(3, 8, 80);
    config.replications = 9;
    const MultiObjectiveProblem noisy = [](const ParameterVector& genome,
                                           std::uint64_t eval_seed) {
        auto rng = make_engine(eval_seed);
        std::uniform_real_distribution<double> jitter(0.0, 0.01);
        auto objectives = oracles::two_parabola_objectives(genome);
        objectives[0] += jitter(rng);
        objectives[1] += jitter(rng);
        return objectives;
    };
    const auto archive = nsga2_run(noisy, space, config);
    REQUIRE(archive.size() >= 1);
    for (const auto& ind : archive.individuals) CHECK(ind.replications == 9);
}

TEST_CASE("evaluator failures score worst case and the run continues") {
    const auto space = unit_cube(2);
    auto config = analytic_config(17, 12, 240);
    int failures = 0;
    config.log = [&](const std::string&) { ++failures; };
    const MultiObjectiveProblem flaky = [](const ParameterVector& genome,
                                           std::uint64_t) {
        if (genome[1] > 0.8) throw std::runtime_error("unstable region");
        return oracles::two_parabola_objectives(genome);
    };
    const auto archive = nsga2_run(flaky, space, config);
    CHECK(failures > 0);
    CHECK(archive.size() >= 1);
    for (const auto& ind : archive.individuals) {
        CHECK(ind.objectives[0] < 1e29); // no failed individual survives
        CHECK(ind.genome[1] <= 0.8);
    }
}

TEST_CASE("single island, single epoch reduces to nsga2_run") {
    const auto space = unit_cube(3);
    auto config = analytic_config(77, 16, 16 * 11); // 10 offspring generations
    const auto reference = nsga2_run(analytic_problem(), space, config);

    IslandConfig islands;
    islands.n_islands = 1;
    islands.island_generations = 10;
    islands.epochs = 1;
    const auto merged = island_run(analytic_problem(), space, config, islands);

    // same set of (genome, objectives)
    auto key = [](const Individual& ind) {
        return std::make_pair(ind.genome.values, ind.objectives);
    };
    std::vector<std::pair<std::vector<double>, ObjectiveVector>> a, b;
    for (const auto& ind : reference.individuals) a.push_back(key(ind));
    for (const auto& ind : merged.individuals) b.push_back(key(ind));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
}

TEST_CASE("island merges stay mutually non-dominated and reach the front") {
    const auto space = unit_cube(3);
    auto config = analytic_config(99, 16, 0);
    IslandConfig islands;
    islands.n_islands = 4;
    islands.island_generations = 6;
    islands.epochs = 3;
    const auto archive = island_run(analytic_problem(), space, config, islands);
    CHECK(oracles::archive_mutually_non_dominated(archive));
    CHECK(archive.size() >= 8);
}

TEST_CASE("resuming an island run reproduces the uninterrupted one") {
    const auto space = unit_cube(3);
    auto config = analytic_config(123, 12, 0);

    IslandConfig three_epochs;
    three_epochs.n_islands = 2;
    three_epochs.island_generations = 4;
    three_epochs.epochs = 3;
    const auto full = island_run(analytic_problem(), space, config, three_epochs);

    IslandConfig first_two = three_epochs;
    first_two.epochs = 2;
    ParetoArchive snapshot;
    first_two.on_epoch = [&](std::size_t epoch, const ParetoArchive& archive) {
        if (epoch == 1) snapshot = archive;
    };
    island_run(analytic_problem(), space, config, first_two);

    IslandConfig last_one = three_epochs;
    last_one.epochs = 1;
    const auto resumed =
        island_run(analytic_problem(), space, config, last_one, snapshot, 2);

    REQUIRE(resumed.size() == full.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
        CHECK(resumed.individuals[i].genome == full.individuals[i].genome);
        CHECK(resumed.individuals[i].objectives == full.individuals[i].objectives);
    }
}

TEST_CASE("config validation") {
    const auto space = unit_cube(2);
    EvolutionConfig config;
    config.population_size = 5; // odd
    CHECK_THROWS_AS(nsga2_run(analytic_problem(), space, config), std::invalid_argument);
    config.population_size = 2; // too small
    CHECK_THROWS_AS(nsga2_run(analytic_problem(), space, config), std::invalid_argument);
    config.population_size = 8;
    config.max_evaluations = 4; // below the population
    CHECK_THROWS_AS(nsga2_run(analytic_problem(), space, config), std::invalid_argument);
}
