#include "molelab/objectives.hpp"

#include "molelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace molelab {

namespace {

double standard_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

} // namespace

double ks_lognormal(const std::vector<double>& populations) {
    const std::size_t n = populations.size();
    if (n < 2) throw std::invalid_argument("ks_lognormal: need at least 2 values");

    std::vector<double> logs(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(populations[i] > 0.0))
            throw std::invalid_argument("ks_lognormal: values must be positive");
        logs[i] = std::log(populations[i]);
    }
    double mu = 0.0;
    for (const double v : logs) mu += v;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (const double v : logs) var += (v - mu) * (v - mu);
    var /= static_cast<double>(n);
    if (var == 0.0)
        throw std::invalid_argument("ks_lognormal: degenerate sample (all values equal)");
    const double sigma = std::sqrt(var);

    std::sort(logs.begin(), logs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = standard_normal_cdf((logs[i] - mu) / sigma);
        const double above = static_cast<double>(i + 1) / static_cast<double>(n) - f;
        const double below = f - static_cast<double>(i) / static_cast<double>(n);
        d = std::max(d, std::max(above, below));
    }
    return d;
}

double largest_city_error(const std::vector<double>& populations) {
    if (populations.empty())
        throw std::invalid_argument("largest_city_error: empty population list");
    const double largest = *std::max_element(populations.begin(), populations.end());
    return std::abs((largest - 10000.0) / 10000.0);
}

double duration_error(int duration) {
    if (duration < 0)
        throw std::invalid_argument("duration_error: duration must be >= 0");
    return std::abs((static_cast<double>(duration) - 4000.0) / 4000.0);
}

double aggregate_scalar(const ObjectiveVector& objectives) {
    if (objectives.empty())
        throw std::invalid_argument("aggregate_scalar: empty objective vector");
    return *std::max_element(objectives.begin(), objectives.end());
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

simpoplocal::Params apply_genome(const simpoplocal::Params& context,
                                 const ParameterVector& genome) {
    if (genome.size() != 5)
        throw std::invalid_argument(
            "apply_genome: genome must hold (p_creation, p_diffusion, "
            "distance_decay, innovation_impact, r_max)");
    simpoplocal::Params params = context;
    params.p_creation = genome[0];
    params.p_diffusion = genome[1];
    params.distance_decay = genome[2];
    params.innovation_impact = genome[3];
    params.r_max = genome[4];
    return params;
}

EvaluationRecord evaluate_simpoplocal(const simpoplocal::Params& context,
                                      const ParameterVector& genome,
                                      int replications, std::uint64_t base_seed) {
    if (replications < 1)
        throw std::invalid_argument("evaluate_simpoplocal: replications must be >= 1");
    const simpoplocal::Params params = apply_genome(context, genome);

    std::vector<double> ks(static_cast<std::size_t>(replications));
    std::vector<double> largest(static_cast<std::size_t>(replications));
    std::vector<double> duration(static_cast<std::size_t>(replications));
    int failed = 0;
    for (int k = 0; k < replications; ++k) {
        const std::size_t at = static_cast<std::size_t>(k);
        try {
            const simpoplocal::Outcome outcome =
                simpoplocal::run(params, derive_seed(base_seed, static_cast<std::uint64_t>(k)));
            std::vector<double> populations;
            populations.reserve(outcome.final_places.size());
            for (const auto& place : outcome.final_places)
                populations.push_back(place.population);
            try {
                ks[at] = ks_lognormal(populations);
            } catch (const std::exception&) {
                ks[at] = 1.0; // degenerate size distribution
            }
            try {
                largest[at] = largest_city_error(populations);
            } catch (const std::exception&) {
                largest[at] = 1.0;
            }
            duration[at] = duration_error(outcome.duration);
        } catch (const std::exception&) {
            ks[at] = largest[at] = duration[at] = 1.0;
            ++failed;
        }
    }

    EvaluationRecord record;
    record.genome = genome;
    record.objectives = {median(ks), median(largest), median(duration)};
    record.replications = replications;
    record.base_seed = base_seed;
    record.failed_replications = failed;
    return record;
}

} // namespace molelab
