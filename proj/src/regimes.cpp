#include "molelab/regimes.hpp"

#include "molelab/csv.hpp"
#include "molelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace molelab {

void VariableSet::validate(int tau_max) const {
    if (closeness.size() != population.size() ||
        accessibility.size() != population.size())
        throw std::invalid_argument("VariableSet: series lengths differ");
    if (tau_max < 1) throw std::invalid_argument("VariableSet: tau_max must be >= 1");
    const std::size_t need = 2 * static_cast<std::size_t>(tau_max) + 8;
    if (population.size() < need)
        throw std::invalid_argument("VariableSet: series too short for lag " +
                                    std::to_string(tau_max));
}

std::string RegimeCode::to_string() const {
    std::string out(6, '0');
    for (std::size_t k = 0; k < 6; ++k) {
        out[k] = signs[k] == PairSign::positive
                     ? '+'
                     : (signs[k] == PairSign::negative ? '-' : '0');
    }
    return out;
}

RegimeCode RegimeCode::from_string(const std::string& text) {
    if (text.size() != 6)
        throw std::invalid_argument("RegimeCode: expected 6 characters");
    RegimeCode code;
    for (std::size_t k = 0; k < 6; ++k) {
        switch (text[k]) {
        case '+': code.signs[k] = PairSign::positive; break;
        case '-': code.signs[k] = PairSign::negative; break;
        case '0': code.signs[k] = PairSign::none; break;
        default:
            throw std::invalid_argument("RegimeCode: character outside {+,0,-}");
        }
    }
    return code;
}

std::vector<RegimeCode> enumerate_regimes() {
    static constexpr std::array<PairSign, 3> kSigns = {
        PairSign::negative, PairSign::none, PairSign::positive};
    std::vector<RegimeCode> codes;
    codes.reserve(kRegimeSpaceSize);
    for (std::size_t v = 0; v < kRegimeSpaceSize; ++v) {
        RegimeCode code;
        std::size_t rest = v;
        for (std::size_t k = 6; k-- > 0;) {
            code.signs[k] = kSigns[rest % 3];
            rest /= 3;
        }
        codes.push_back(code);
    }
    return codes;
}

namespace {

std::vector<double> first_differences(const std::vector<double>& series) {
    std::vector<double> d(series.size() - 1);
    for (std::size_t t = 0; t + 1 < series.size(); ++t)
        d[t] = series[t + 1] - series[t];
    return d;
}

} // namespace

LaggedCorrelation lagged_correlation(const std::vector<double>& x,
                                     const std::vector<double>& y, int tau_max,
                                     bool use_differences) {
    if (tau_max < 1)
        throw std::invalid_argument("lagged_correlation: tau_max must be >= 1");
    if (x.size() != y.size())
        throw std::invalid_argument("lagged_correlation: series lengths differ");
    if (x.size() < 2)
        throw std::invalid_argument("lagged_correlation: series too short");
    const std::vector<double> dx = use_differences ? first_differences(x) : x;
    const std::vector<double> dy = use_differences ? first_differences(y) : y;
    const int n = static_cast<int>(dx.size());
    if (n - tau_max < 4)
        throw std::invalid_argument("lagged_correlation: series too short for lag " +
                                    std::to_string(tau_max));

    LaggedCorrelation out;
    out.tau_max = tau_max;
    out.rho.resize(2 * static_cast<std::size_t>(tau_max) + 1);
    for (int tau = -tau_max; tau <= tau_max; ++tau) {
        const int begin = std::max(0, -tau);
        const int end = n - std::max(0, tau);
        const int len = end - begin;
        double mean_x = 0.0, mean_y = 0.0;
        for (int t = begin; t < end; ++t) {
            mean_x += dx[static_cast<std::size_t>(t)];
            mean_y += dy[static_cast<std::size_t>(t + tau)];
        }
        mean_x /= len;
        mean_y /= len;
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (int t = begin; t < end; ++t) {
            const double a = dx[static_cast<std::size_t>(t)] - mean_x;
            const double b = dy[static_cast<std::size_t>(t + tau)] - mean_y;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
        if (sxx == 0.0 || syy == 0.0)
            throw std::invalid_argument("lagged_correlation: zero-variance window at lag " +
                                        std::to_string(tau));
        double rho = sxy / std::sqrt(sxx * syy);
        rho = rho < -1.0 ? -1.0 : (rho > 1.0 ? 1.0 : rho);
        out.rho[static_cast<std::size_t>(tau + tau_max)] = rho;
    }
    return out;
}

PairSign classify_pair(const LaggedCorrelation& correlation, double threshold) {
    double best = 0.0;
    double best_abs = -1.0;
    for (int tau = 1; tau <= correlation.tau_max; ++tau) {
        const double rho = correlation.at(tau);
        if (std::abs(rho) > best_abs) {
            best_abs = std::abs(rho);
            best = rho;
        }
    }
    if (best_abs >= threshold)
        return best > 0.0 ? PairSign::positive : PairSign::negative;
    return PairSign::none;
}

RegimeCode classify_regime(const VariableSet& vars, int tau_max, double threshold,
                           bool use_differences) {
    vars.validate(tau_max);
    const std::array<std::pair<const std::vector<double>*, const std::vector<double>*>, 6>
        pairs = {{{&vars.population, &vars.closeness},
                  {&vars.closeness, &vars.population},
                  {&vars.population, &vars.accessibility},
                  {&vars.accessibility, &vars.population},
                  {&vars.closeness, &vars.accessibility},
                  {&vars.accessibility, &vars.closeness}}};
    RegimeCode code;
    for (std::size_t k = 0; k < 6; ++k) {
        const auto correlation =
            lagged_correlation(*pairs[k].first, *pairs[k].second, tau_max, use_differences);
        code.signs[k] = classify_pair(correlation, threshold);
    }
    return code;
}

bool is_coevolution(const RegimeCode& code) {
    const bool closeness_pair =
        code.signs[0] != PairSign::none && code.signs[1] != PairSign::none;
    const bool accessibility_pair =
        code.signs[2] != PairSign::none && code.signs[3] != PairSign::none;
    return closeness_pair || accessibility_pair;
}

std::size_t RegimeCensus::distinct_coevolution() const {
    std::size_t count = 0;
    for (const auto& [code, hits] : counts)
        if (is_coevolution(code)) ++count;
    return count;
}

double RegimeCensus::coevolution_fraction() const {
    return static_cast<double>(distinct_coevolution()) /
           static_cast<double>(kRegimeSpaceSize);
}

RegimeCensus regime_census(const std::vector<VariableSet>& runs, int tau_max,
                           double threshold, const LogFn& log) {
    if (runs.empty()) throw std::invalid_argument("regime_census: no runs");
    RegimeCensus census;
    for (const VariableSet& vars : runs) {
        try {
            ++census.counts[classify_regime(vars, tau_max, threshold)];
        } catch (const std::exception& e) {
            ++census.skipped;
            if (log) log(std::string("regime_census: run skipped: ") + e.what());
        }
    }
    return census;
}

double null_threshold(int series_length, int tau_max, double quantile,
                      std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("null_threshold: trials must be >= 1");
    if (quantile <= 0.0 || quantile >= 1.0)
        throw std::invalid_argument("null_threshold: quantile must be in (0,1)");
    auto rng = make_engine(derive_seed(seed, 0x41011));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> maxima;
    maxima.reserve(trials);
    std::vector<double> x(static_cast<std::size_t>(series_length));
    std::vector<double> y(static_cast<std::size_t>(series_length));
    for (std::size_t trial = 0; trial < trials; ++trial) {
        for (double& v : x) v = gauss(rng);
        for (double& v : y) v = gauss(rng);
        const auto correlation = lagged_correlation(x, y, tau_max);
        double peak = 0.0;
        for (int tau = 1; tau <= tau_max; ++tau)
            peak = std::max(peak, std::abs(correlation.at(tau)));
        maxima.push_back(peak);
    }
    std::sort(maxima.begin(), maxima.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(quantile * static_cast<double>(trials)));
    return maxima[std::min(rank == 0 ? 0 : rank - 1, trials - 1)];
}

VariableSet load_variable_set_csv(const std::string& path) {
    const auto rows = read_csv_file(path);
    if (rows.empty() ||
        rows[0] != std::vector<std::string>{"population", "closeness", "accessibility"})
        throw std::runtime_error(
            "load_variable_set_csv: expected header population,closeness,accessibility in '" +
            path + "'");
    VariableSet vars;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 3)
            throw std::runtime_error("load_variable_set_csv: bad row in '" + path + "'");
        vars.population.push_back(std::stod(rows[r][0]));
        vars.closeness.push_back(std::stod(rows[r][1]));
        vars.accessibility.push_back(std::stod(rows[r][2]));
    }
    return vars;
}

VariableSet to_variable_set(const cityinter::SystemTrajectory& trajectory) {
    VariableSet vars;
    const std::size_t steps = trajectory.population.size();
    vars.population.reserve(steps);
    vars.closeness.reserve(steps);
    vars.accessibility.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        double pop_total = 0.0, closeness_sum = 0.0, access_sum = 0.0;
        for (std::size_t i = 0; i < trajectory.n_cities; ++i) {
            pop_total += trajectory.population[t][i];
            closeness_sum += trajectory.closeness[t][i];
            access_sum += trajectory.accessibility[t][i];
        }
        const double n = static_cast<double>(trajectory.n_cities);
        vars.population.push_back(pop_total);
        vars.closeness.push_back(closeness_sum / n);
        vars.accessibility.push_back(access_sum / n);
    }
    return vars;
}

} // namespace molelab
