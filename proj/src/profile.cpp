#include "molelab/profile.hpp"

#include "molelab/rng.hpp"
#include "molelab/worker_pool.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace molelab {

namespace {

constexpr std::array<double, 4> kMutationScales = {0.25, 0.05, 0.01, 0.002};

struct BinElite {
    bool filled = false;
    double error = std::numeric_limits<double>::infinity();
    ParameterVector genome;   // raw coordinates as evaluated
    std::vector<double> unit; // matching unit coordinates
};

std::size_t bin_of(double unit_coord, std::size_t n_bins) {
    const auto idx = static_cast<std::size_t>(unit_coord * static_cast<double>(n_bins));
    return idx >= n_bins ? n_bins - 1 : idx;
}

} // namespace

ProfileCurve profile_run(const ScalarProblem& problem, const ParameterSpace& space,
                         std::size_t param_index, const ProfileConfig& config) {
    if (param_index >= space.dimension())
        throw std::invalid_argument("profile_run: param_index out of range");
    if (config.n_bins < 2)
        throw std::invalid_argument("profile_run: n_bins must be >= 2");
    if (config.budget < config.n_bins)
        throw std::invalid_argument("profile_run: budget must cover one child per bin");
    if (config.batch < 1)
        throw std::invalid_argument("profile_run: batch must be >= 1");

    const std::size_t d = space.dimension();
    const std::size_t n_bins = config.n_bins;
    auto rng = make_engine(config.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> scale_pick(0, kMutationScales.size() - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<BinElite> elites(n_bins);
    std::vector<std::size_t> populated; // indices of filled bins, ascending

    auto refresh_populated = [&] {
        populated.clear();
        for (std::size_t b = 0; b < n_bins; ++b)
            if (elites[b].filled) populated.push_back(b);
    };

    std::size_t seeded = 0; // bins that received their seeding child
    std::uint64_t evals = 0;
    std::vector<std::vector<double>> batch_units;
    std::vector<ParameterVector> batch_genomes;
    std::vector<double> batch_errors;

    while (evals < config.budget) {
        const std::size_t batch_n = static_cast<std::size_t>(
            std::min<std::uint64_t>(config.batch, config.budget - evals));
        batch_units.clear();
        batch_genomes.clear();

        for (std::size_t s = 0; s < batch_n; ++s) {
            std::vector<double> unit(d);
            if (seeded < n_bins) {
                // seeding pass: one uniform child per bin, in order
                for (double& c : unit) c = uniform(rng);
                unit[param_index] =
                    (static_cast<double>(seeded) + uniform(rng)) /
                    static_cast<double>(n_bins);
                ++seeded;
            } else if (populated.empty()) {
                // no elite yet (seeding landed in this batch or all failed)
                for (double& c : unit) c = uniform(rng);
            } else {
                std::vector<std::size_t> empties;
                for (std::size_t b = 0; b < n_bins; ++b)
                    if (!elites[b].filled) empties.push_back(b);
                const BinElite& parent = [&]() -> const BinElite& {
                    std::uniform_int_distribution<std::size_t> pick(
                        0, populated.size() - 1);
                    return elites[populated[pick(rng)]];
                }();
                const double sigma = kMutationScales[scale_pick(rng)];
                for (std::size_t k = 0; k < d; ++k) {
                    double c = parent.unit[k] + sigma * gauss(rng);
                    unit[k] = c < 0.0 ? 0.0 : (c > 1.0 ? 1.0 : c);
                }
                if (!empties.empty() && uniform(rng) < config.empty_bin_pressure) {
                    std::uniform_int_distribution<std::size_t> pick(0, empties.size() - 1);
                    unit[param_index] =
                        (static_cast<double>(empties[pick(rng)]) + uniform(rng)) /
                        static_cast<double>(n_bins);
                }
            }
            batch_genomes.push_back(space.from_unit(unit));
            batch_units.push_back(std::move(unit));
        }

        batch_errors.assign(batch_n, std::numeric_limits<double>::infinity());
        std::vector<std::uint64_t> seeds(batch_n);
        for (std::size_t s = 0; s < batch_n; ++s)
            seeds[s] = derive_seed(config.seed, evals + s);
        auto errors = parallel_for_indexed(batch_n, config.workers, [&](std::size_t s) {
            batch_errors[s] = problem(batch_genomes[s], seeds[s]);
        });
        evals += batch_n;

        // elite updates in submission order
        for (std::size_t s = 0; s < batch_n; ++s) {
            if (errors[s]) {
                if (config.log) config.log("profile evaluation failed, child discarded");
                continue;
            }
            if (!std::isfinite(batch_errors[s])) continue;
            const std::size_t b = bin_of(batch_units[s][param_index], n_bins);
            BinElite& elite = elites[b];
            if (!elite.filled || batch_errors[s] < elite.error) {
                elite.filled = true;
                elite.error = batch_errors[s];
                elite.genome = batch_genomes[s];
                elite.unit = batch_units[s];
            }
        }
        refresh_populated();
        if (populated.empty() && seeded >= n_bins) {
            // every child so far failed; keep seeding until something lands
            seeded = 0;
        }
    }

    ProfileCurve curve;
    curve.param_index = param_index;
    curve.param_name = space.spec(param_index).name;
    curve.bins.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        ProfileBin& bin = curve.bins[b];
        bin.lower = space.value_at(param_index,
                                   static_cast<double>(b) / static_cast<double>(n_bins));
        bin.upper = space.value_at(
            param_index, static_cast<double>(b + 1) / static_cast<double>(n_bins));
        if (elites[b].filled) {
            bin.best_error = elites[b].error;
            bin.best_genome = elites[b].genome;
        }
    }
    return curve;
}

ProfileShape classify_profile(const ProfileCurve& curve, double flatness_tol) {
    if (curve.bins.empty())
        throw std::invalid_argument("classify_profile: empty curve");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const ProfileBin& bin : curve.bins) {
        if (!bin.best_error)
            throw std::invalid_argument("classify_profile: unpopulated bin present");
        lo = std::min(lo, *bin.best_error);
        hi = std::max(hi, *bin.best_error);
    }
    const double spread = hi - lo;
    return spread <= flatness_tol * std::max(1.0, hi) ? ProfileShape::flat
                                                      : ProfileShape::informative;
}

} // namespace molelab
