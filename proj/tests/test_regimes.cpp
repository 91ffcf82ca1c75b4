#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "molelab/pse.hpp"
#include "molelab/regimes.hpp"
#include "molelab/rng.hpp"
#include "molelab/sampling.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>

using namespace molelab;

namespace {

std::vector<double> random_walk(std::size_t length, std::uint64_t seed) {
    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> series(length);
    double level = 0.0;
    for (auto& v : series) {
        level += gauss(rng);
        v = level;
    }
    return series;
}

/// y_t = x_{t-shift}; the variations of y echo those of x `shift` steps later.
std::vector<double> shifted_copy(const std::vector<double>& x, int shift) {
    std::vector<double> y(x.size(), x[0]);
    for (std::size_t t = static_cast<std::size_t>(shift); t < x.size(); ++t)
        y[t] = x[t - static_cast<std::size_t>(shift)];
    return y;
}

/// Direct-formula Pearson correlation of (dx_t, dy_{t+tau}).
double pearson_at_lag(const std::vector<double>& x, const std::vector<double>& y,
                      int tau) {
    std::vector<double> dx(x.size() - 1), dy(y.size() - 1);
    for (std::size_t t = 0; t + 1 < x.size(); ++t) {
        dx[t] = x[t + 1] - x[t];
        dy[t] = y[t + 1] - y[t];
    }
    std::vector<double> a, b;
    const int n = static_cast<int>(dx.size());
    for (int t = 0; t < n; ++t) {
        const int s = t + tau;
        if (s < 0 || s >= n) continue;
        a.push_back(dx[static_cast<std::size_t>(t)]);
        b.push_back(dy[static_cast<std::size_t>(s)]);
    }
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(a.size());
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST_CASE("a shift by two peaks exactly at lag two") {
    const auto x = random_walk(300, 51);
    const auto y = shifted_copy(x, 2);
    const auto correlation = lagged_correlation(x, y, 5);
    CHECK(correlation.at(2) == doctest::Approx(1.0).epsilon(1e-9));
    for (int tau = -5; tau <= 5; ++tau) {
        if (tau == 2) continue;
        CHECK(std::abs(correlation.at(tau)) < std::abs(correlation.at(2)));
        // direct-formula oracle
        CHECK(correlation.at(tau) ==
              doctest::Approx(pearson_at_lag(x, y, tau)).epsilon(1e-12));
    }
}

TEST_CASE("a mirrored series correlates to -1 at lag zero") {
    const auto x = random_walk(200, 3);
    std::vector<double> y(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) y[t] = -x[t];
    const auto correlation = lagged_correlation(x, y, 4);
    CHECK(correlation.at(0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("white-noise pairs stay below 0.3 almost always") {
    const int trials = 1000;
    int calm = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const auto x = random_walk(201, derive_seed(1000, static_cast<std::uint64_t>(trial)));
        const auto y = random_walk(201, derive_seed(2000, static_cast<std::uint64_t>(trial)));
        const auto correlation = lagged_correlation(x, y, 5);
        bool quiet = true;
        for (int tau = -5; tau <= 5; ++tau)
            if (std::abs(correlation.at(tau)) >= 0.3) quiet = false;
        if (quiet) ++calm;
    }
    CHECK(static_cast<double>(calm) / trials >= 0.99);
}

TEST_CASE("lagged_correlation rejects degenerate input") {
    const std::vector<double> constant(40, 1.0);
    const auto x = random_walk(40, 9);
    CHECK_THROWS_AS(lagged_correlation(x, constant, 3), std::invalid_argument);
    CHECK_THROWS_AS(lagged_correlation(x, random_walk(39, 2), 3), std::invalid_argument);
    CHECK_THROWS_AS(lagged_correlation({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, 3),
                    std::invalid_argument);
}

TEST_CASE("classify_pair reads the dominant positive lag") {
    LaggedCorrelation c;
    c.tau_max = 3;
    c.rho = {0.9, 0.8, 0.7, 0.0, 0.1, 0.9, 0.2}; // strong negative lags ignored
    CHECK(classify_pair(c, 0.5) == PairSign::positive);
    c.rho = {0.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.3};
    CHECK(classify_pair(c, 0.5) == PairSign::none);
    c.rho = {0.0, 0.0, 0.0, 0.0, 0.1, 0.2, -0.8};
    CHECK(classify_pair(c, 0.5) == PairSign::negative);
}

TEST_CASE("classify_pair is invariant under positive affine transforms") {
    const auto x = random_walk(240, 77);
    const auto y = shifted_copy(x, 3);
    std::vector<double> x_scaled(x.size()), y_scaled(y.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        x_scaled[t] = 4.5 * x[t] + 100.0;
        y_scaled[t] = 0.02 * y[t] - 7.0;
    }
    const auto plain = lagged_correlation(x, y, 5);
    const auto scaled = lagged_correlation(x_scaled, y_scaled, 5);
    for (int tau = -5; tau <= 5; ++tau)
        CHECK(plain.at(tau) == doctest::Approx(scaled.at(tau)).epsilon(1e-9));
    CHECK(classify_pair(plain, 0.5) == classify_pair(scaled, 0.5));
}

TEST_CASE("forward shifts classify asymmetrically at every lag") {
    const auto x = random_walk(400, 13);
    for (int shift = 1; shift <= 5; ++shift) {
        const auto y = shifted_copy(x, shift);
        const auto forward = lagged_correlation(x, y, 5);
        const auto backward = lagged_correlation(y, x, 5);
        CHECK(classify_pair(forward, 0.5) == PairSign::positive);
        CHECK(classify_pair(backward, 0.5) == PairSign::none);
    }
}

TEST_CASE("classify_regime on constructed series") {
    const auto pop = random_walk(300, 99);
    VariableSet vars;
    vars.population = pop;
    vars.closeness = shifted_copy(pop, 2);
    vars.accessibility = random_walk(300, 12345);
    const auto code = classify_regime(vars, 5, 0.5);
    CHECK(code.signs[0] == PairSign::positive); // population -> closeness
    CHECK(code.signs[1] == PairSign::none);     // closeness -> population
    CHECK(code.signs[2] == PairSign::none);
    CHECK(code.signs[3] == PairSign::none);
    CHECK(code.signs[4] == PairSign::none);
    CHECK(code.signs[5] == PairSign::none);
    CHECK_FALSE(is_coevolution(code));

    VariableSet constant;
    constant.population.assign(100, 5.0);
    constant.closeness.assign(100, 5.0);
    constant.accessibility.assign(100, 5.0);
    CHECK_THROWS_AS(classify_regime(constant, 5, 0.5), std::invalid_argument);
}

TEST_CASE("reciprocal construction classifies as co-evolution") {
    // closeness echoes population and population echoes closeness: build
    // them from one walk shifted in both directions
    const auto base = random_walk(400, 7);
    VariableSet vars;
    vars.population = shifted_copy(base, 2);
    vars.closeness = base;
    vars.accessibility = random_walk(400, 999);
    // population -> closeness: closeness_t = pop_{t+2}? No: population is the
    // delayed copy, so closeness leads population.
    const auto code = classify_regime(vars, 5, 0.5);
    CHECK(code.signs[1] == PairSign::positive); // closeness -> population
    CHECK(code.signs[0] == PairSign::none);
}

TEST_CASE("regime space enumerates exactly 729 distinct codes") {
    const auto codes = enumerate_regimes();
    CHECK(codes.size() == kRegimeSpaceSize);
    CHECK(codes.size() == 729);
    std::set<std::string> unique;
    for (const auto& code : codes) {
        unique.insert(code.to_string());
        CHECK(RegimeCode::from_string(code.to_string()) == code);
    }
    CHECK(unique.size() == 729);
}

TEST_CASE("regime code strings") {
    RegimeCode code;
    code.signs = {PairSign::positive, PairSign::none, PairSign::negative,
                  PairSign::none, PairSign::positive, PairSign::negative};
    CHECK(code.to_string() == "+0-0+-");
    CHECK(RegimeCode::from_string("+0-0+-") == code);
    CHECK_THROWS_AS(RegimeCode::from_string("+0-0+"), std::invalid_argument);
    CHECK_THROWS_AS(RegimeCode::from_string("+0-0+x"), std::invalid_argument);
}

TEST_CASE("is_coevolution follows the reciprocity definition") {
    auto code = [](const char* text) { return RegimeCode::from_string(text); };
    CHECK(is_coevolution(code("++0000")));
    CHECK_FALSE(is_coevolution(code("000000")));
    CHECK_FALSE(is_coevolution(code("0000++"))); // network-network only
    CHECK_FALSE(is_coevolution(code("+00000")));
    CHECK(is_coevolution(code("+-0000")));
    CHECK(is_coevolution(code("00++00")));

    // adding nonzero signs never turns a co-evolution off
    auto rng = make_engine(31);
    std::uniform_int_distribution<int> sign(0, 2);
    std::uniform_int_distribution<std::size_t> position(0, 5);
    for (int trial = 0; trial < 500; ++trial) {
        RegimeCode base;
        for (auto& s : base.signs)
            s = static_cast<PairSign>(sign(rng) - 1);
        RegimeCode stronger = base;
        const std::size_t at = position(rng);
        if (stronger.signs[at] == PairSign::none)
            stronger.signs[at] = PairSign::positive;
        if (is_coevolution(base)) CHECK(is_coevolution(stronger));
    }
}

TEST_CASE("census counts codes and skips degenerate runs") {
    const auto pop = random_walk(200, 5);
    VariableSet vars;
    vars.population = pop;
    vars.closeness = shifted_copy(pop, 1);
    vars.accessibility = random_walk(200, 6);

    VariableSet degenerate;
    degenerate.population.assign(200, 1.0);
    degenerate.closeness.assign(200, 1.0);
    degenerate.accessibility.assign(200, 1.0);

    int logged = 0;
    const auto census = regime_census({vars, vars, vars, degenerate}, 5, 0.5,
                                      [&](const std::string&) { ++logged; });
    CHECK(census.distinct() == 1);
    CHECK(census.counts.begin()->second == 3);
    CHECK(census.skipped == 1);
    CHECK(logged == 1);
    CHECK(census.distinct() <= kRegimeSpaceSize);

    CHECK_THROWS_AS(regime_census({}, 5, 0.5), std::invalid_argument);
}

TEST_CASE("null threshold calibration behaves sensibly") {
    const double q95 = null_threshold(200, 5, 0.95, 400, 1);
    const double q99 = null_threshold(200, 5, 0.99, 400, 1);
    CHECK(q95 > 0.0);
    CHECK(q95 < 0.5);
    CHECK(q99 >= q95);
    // longer series concentrate the null
    const double longer = null_threshold(800, 5, 0.95, 400, 1);
    CHECK(longer < q95);
}

TEST_CASE("external series files load into a variable set") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "molelab_series_test.csv";
    {
        std::ofstream out(path);
        out << "population,closeness,accessibility\n";
        for (int t = 0; t < 30; ++t)
            out << 100 + t << ',' << 0.5 + 0.01 * t << ',' << 2.0 - 0.01 * t << '\n';
    }
    const auto vars = load_variable_set_csv(path.string());
    REQUIRE(vars.population.size() == 30);
    CHECK(vars.population[0] == 100.0);
    CHECK(vars.closeness[29] == doctest::Approx(0.79));
    CHECK(vars.accessibility[1] == doctest::Approx(1.99));
    vars.validate(5);
    fs::remove(path);

    CHECK_THROWS_AS(load_variable_set_csv("/nonexistent/series.csv"),
                    std::runtime_error);
}

TEST_CASE("trajectory aggregation produces the three named series") {
    cityinter::SystemTrajectory trajectory;
    trajectory.n_cities = 2;
    trajectory.population = {{1.0, 3.0}, {2.0, 4.0}};
    trajectory.closeness = {{0.5, 1.5}, {0.6, 1.4}};
    trajectory.accessibility = {{10.0, 30.0}, {20.0, 40.0}};
    const auto vars = to_variable_set(trajectory);
    CHECK(vars.population == std::vector<double>{4.0, 6.0});
    CHECK(vars.closeness == std::vector<double>{1.0, 1.0});
    CHECK(vars.accessibility == std::vector<double>{20.0, 30.0});
}

TEST_CASE("diversity search discovers at least as many regimes as direct sampling") {
    // small co-evolution system; identical evaluation budgets
    const auto system = cityinter::make_synthetic_system(12, 4242, 3);
    const int steps = 60;
    const int tau_max = 5;
    const double threshold = 0.4;

    const ParameterSpace space({{"r0", -0.02, 0.05, Scale::linear},
                                {"w_gravity", 0.0, 2.0, Scale::linear},
                                {"d_gravity", 0.05, 2.0, Scale::linear},
                                {"w_network", 0.0, 2.0, Scale::linear},
                                {"capacity_rate", 0.0, 2.0, Scale::linear}});

    auto classify = [&](const ParameterVector& genome) -> std::optional<RegimeCode> {
        cityinter::InteractionParams params;
        params.r0 = genome[0];
        params.w_gravity = genome[1];
        params.d_gravity = genome[2];
        params.w_network = genome[3];
        params.capacity_rate = genome[4];
        params.steps = steps;
        try {
            return classify_regime(to_variable_set(cityinter::simulate(system, params)),
                                   tau_max, threshold);
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };

    const std::size_t budget = 300;
    std::set<std::string> lhs_codes;
    for (const auto& point : lhs(space, budget, 99))
        if (const auto code = classify(point)) lhs_codes.insert(code->to_string());

    const PatternProblem pattern = [&](const ParameterVector& genome, std::uint64_t) {
        const auto code = classify(genome);
        if (!code) throw std::runtime_error("degenerate dynamics");
        std::vector<double> signs(6);
        for (std::size_t k = 0; k < 6; ++k)
            signs[k] = static_cast<double>(static_cast<int>(code->signs[k]));
        return signs;
    };
    PseConfig config;
    config.budget = budget;
    config.batch = 25;
    config.seed = 99;
    config.workers = 4;
    const auto grid =
        pse_run(pattern, space, std::vector<GridDim>(6, GridDim{-1.5, 1.5, 3}), config);

    CHECK(grid.coverage() >= lhs_codes.size());
}
