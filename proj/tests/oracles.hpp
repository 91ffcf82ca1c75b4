#pragma once
// Independent oracles used by the unit and acceptance suites. These stay
// deliberately naive (counting, pairwise scans) so they share no code path
// with the implementations they check.

#include "molelab/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

namespace oracles {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Exact two-sided KS statistic against the lognormal fitted to the
/// log-space moments of the sample, via explicit counting of the empirical
/// CDF on both sides of every sample point. O(n^2).
inline double ks_lognormal_bruteforce(const std::vector<double>& sample) {
    const std::size_t n = sample.size();
    std::vector<double> logs(n);
    for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(sample[i]);
    double mu = 0.0;
    for (const double v : logs) mu += v;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (const double v : logs) var += (v - mu) * (v - mu);
    var /= static_cast<double>(n);
    const double sigma = std::sqrt(var);

    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t less = 0, less_equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (logs[j] < logs[i]) ++less;
            if (logs[j] <= logs[i]) ++less_equal;
        }
        const double f = normal_cdf((logs[i] - mu) / sigma);
        d = std::max(d, std::abs(static_cast<double>(less_equal) /
                                     static_cast<double>(n) -
                                 f));
        d = std::max(d, std::abs(static_cast<double>(less) / static_cast<double>(n) - f));
    }
    return d;
}

/// Repeatedly peels the pairwise non-dominated set.
inline std::vector<std::vector<std::size_t>>
non_dominated_sort_bruteforce(const std::vector<molelab::Individual>& population) {
    std::vector<std::size_t> remaining(population.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
    std::vector<std::vector<std::size_t>> fronts;
    while (!remaining.empty()) {
        std::vector<std::size_t> front, rest;
        for (const std::size_t i : remaining) {
            bool dominated = false;
            for (const std::size_t j : remaining) {
                if (i == j) continue;
                if (molelab::dominates(population[j].objectives,
                                       population[i].objectives)) {
                    dominated = true;
                    break;
                }
            }
            (dominated ? rest : front).push_back(i);
        }
        fronts.push_back(std::move(front));
        remaining = std::move(rest);
    }
    return fronts;
}

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(sum);
}

inline double hausdorff(const std::vector<std::vector<double>>& a,
                        const std::vector<std::vector<double>>& b) {
    auto one_sided = [](const std::vector<std::vector<double>>& from,
                        const std::vector<std::vector<double>>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, euclidean(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

/// Bi-objective benchmark with a known front: f1 = x^2, f2 = (1-x)^2 on the
/// first coordinate, remaining coordinates inert.
inline molelab::ObjectiveVector two_parabola_objectives(const molelab::ParameterVector& g) {
    const double x = g[0];
    return {x * x, (1.0 - x) * (1.0 - x)};
}

inline std::vector<std::vector<double>> two_parabola_true_front(std::size_t samples) {
    std::vector<std::vector<double>> front;
    front.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        front.push_back({t * t, (1.0 - t) * (1.0 - t)});
    }
    return front;
}

inline bool archive_mutually_non_dominated(const molelab::ParetoArchive& archive) {
    for (std::size_t i = 0; i < archive.size(); ++i)
        for (std::size_t j = 0; j < archive.size(); ++j)
            if (i != j && molelab::dominates(archive.individuals[i].objectives,
                                             archive.individuals[j].objectives))
                return false;
    return true;
}

} // namespace oracles
