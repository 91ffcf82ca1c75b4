#pragma once
// Calibration objectives (normalized errors, zero is perfect) and
// replication-aware evaluation for the settlement model.

#include "molelab/param_space.hpp"
#include "molelab/simpoplocal.hpp"

#include <cstdint>
#include <vector>

namespace molelab {

/// Ordered list of normalized errors; fixed arity per problem.
using ObjectiveVector = std::vector<double>;

struct EvaluationRecord {
    ParameterVector genome;
    ObjectiveVector objectives; ///< per-objective median over the replications
    int replications = 1;
    std::uint64_t base_seed = 0;
    int failed_replications = 0; ///< replications scored worst-case after a model error
};

/// Two-sided Kolmogorov–Smirnov distance between the empirical distribution
/// of the sample and a lognormal whose parameters are the mean and standard
/// deviation of the log values (maximum-likelihood moments, denominator n).
/// The supremum is evaluated on both sides of every sample step, so the
/// result is the exact KS statistic, in [0, 1]. Throws for n < 2 or a
/// degenerate sample (all values equal).
double ks_lognormal(const std::vector<double>& populations);

/// |max(populations) - 10000| / 10000. Throws on an empty list.
double largest_city_error(const std::vector<double>& populations);

/// |duration - 4000| / 4000. Throws on a negative duration.
double duration_error(int duration);

/// Chebyshev aggregation: the worst (largest) component.
double aggregate_scalar(const ObjectiveVector& objectives);

/// Median of a sample (mean of the central pair for even sizes).
double median(std::vector<double> values);

/// Applies a genome in the canonical order
/// (p_creation, p_diffusion, distance_decay, innovation_impact, r_max)
/// on top of a fixed context. Throws unless the genome has 5 entries.
simpoplocal::Params apply_genome(const simpoplocal::Params& context,
                                 const ParameterVector& genome);

/// Runs `replications` seeded model runs (seed_k = derive_seed(base_seed, k))
/// and aggregates each objective as the median across replications. Objective
/// order: (ks_lognormal, largest_city_error, duration_error). A replication
/// whose run fails scores 1.0 on all three objectives; an objective that
/// cannot be computed on an otherwise valid run scores 1.0 for that
/// replication only.
EvaluationRecord evaluate_simpoplocal(const simpoplocal::Params& context,
                                      const ParameterVector& genome,
                                      int replications, std::uint64_t base_seed);

} // namespace molelab
