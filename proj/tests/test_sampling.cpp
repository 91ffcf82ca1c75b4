#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "molelab/rng.hpp"
#include "molelab/sampling.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace molelab;

namespace {

ParameterSpace make_space(std::size_t d, std::uint64_t seed) {
    auto rng = make_engine(seed);
    std::uniform_real_distribution<double> uniform(0.1, 10.0);
    std::vector<ParameterSpec> specs;
    for (std::size_t k = 0; k < d; ++k) {
        ParameterSpec spec;
        spec.name = "p" + std::to_string(k);
        const double a = uniform(rng);
        const double b = uniform(rng) + a + 0.5;
        spec.lower = a;
        spec.upper = b;
        spec.scale = (seed + k) % 2 == 0 ? Scale::linear : Scale::logarithmic;
        specs.push_back(spec);
    }
    return ParameterSpace(std::move(specs));
}

} // namespace

TEST_CASE("lhs stratification holds for every dimension") {
    // sorted unit coordinates of an n-point design occupy one stratum each
    for (std::uint64_t trial = 0; trial < 40; ++trial) {
        const std::size_t d = 1 + trial % 5;
        const std::size_t n = 1 + (trial * 7) % 50;
        const auto space = make_space(d, 100 + trial);
        const auto design = lhs(space, n, trial);
        REQUIRE(design.size() == n);
        for (std::size_t k = 0; k < d; ++k) {
            std::vector<double> u;
            for (const auto& point : design)
                u.push_back(space.to_unit(point)[k]);
            std::sort(u.begin(), u.end());
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(u[i] >= static_cast<double>(i) / n - 1e-9);
                CHECK(u[i] <= static_cast<double>(i + 1) / n + 1e-9);
            }
        }
    }
}

TEST_CASE("lhs basics") {
    const auto space = make_space(2, 1);
    const auto one = lhs(space, 1, 9);
    REQUIRE(one.size() == 1);
    CHECK(space.contains(one[0]));

    CHECK(lhs(space, 8, 42) == lhs(space, 8, 42)); // deterministic
    CHECK(lhs(space, 8, 42) != lhs(space, 8, 43));

    LhsOptions centered;
    centered.centered = true;
    const auto design = lhs(space, 5, 4, centered);
    for (const auto& point : design) {
        const auto u = space.to_unit(point);
        for (std::size_t k = 0; k < 2; ++k) {
            const double scaled = u[k] * 5.0; // stratum index + 0.5
            CHECK(std::abs(scaled - std::floor(scaled) - 0.5) < 1e-9);
        }
    }

    CHECK_THROWS_AS(lhs(space, 0, 1), std::invalid_argument);
}

TEST_CASE("grid shapes and levels") {
    const ParameterSpace space({{"a", 0.0, 10.0, Scale::linear},
                                {"b", 1.0, 2.0, Scale::linear}});
    CHECK(grid(space, {3, 2}).size() == 6);

    const ParameterSpace line({{"a", 0.0, 10.0, Scale::linear}});
    const auto single = grid(line, {1});
    REQUIRE(single.size() == 1);
    CHECK(single[0][0] == doctest::Approx(5.0)); // midpoint convention

    const auto three = grid(line, {3});
    REQUIRE(three.size() == 3);
    CHECK(three[0][0] == 0.0);
    CHECK(three[1][0] == doctest::Approx(5.0));
    CHECK(three[2][0] == 10.0);

    CHECK_THROWS_AS(grid(space, {0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(grid(space, {3}), std::invalid_argument);
}

TEST_CASE("grid order is lexicographic, first dimension most significant") {
    const ParameterSpace space({{"a", 0.0, 1.0, Scale::linear},
                                {"b", 0.0, 1.0, Scale::linear}});
    const auto points = grid(space, {2, 3});
    REQUIRE(points.size() == 6);
    CHECK(points[0][0] == 0.0);
    CHECK(points[0][1] == 0.0);
    CHECK(points[1][0] == 0.0);
    CHECK(points[1][1] == doctest::Approx(0.5));
    CHECK(points[2][1] == 1.0);
    CHECK(points[3][0] == 1.0);
    CHECK(points[3][1] == 0.0);
}

TEST_CASE("grid points stay in bounds and are pairwise distinct") {
    const auto space = make_space(3, 77);
    const auto points = grid(space, {3, 4, 2});
    REQUIRE(points.size() == 24);
    std::set<std::vector<double>> unique;
    for (const auto& point : points) {
        CHECK(space.contains(point));
        unique.insert(point.values);
    }
    CHECK(unique.size() == points.size());
}
