#pragma once
// Calibration profile: the lowest attainable error as a function of one
// parameter, all others free. Implemented as bin-elite niching — the
// profiled parameter's range is split into bins (uniform in scaled space),
// one elite genome is kept per bin, children are mutated copies of random
// elites and compete only inside the bin their profiled coordinate lands in.
// A flat profile marks a parameter without effect.

#include "molelab/nsga2.hpp"
#include "molelab/param_space.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace molelab {

/// Scalar calibration error; multi-objective problems profile through
/// aggregate_scalar.
using ScalarProblem =
    std::function<double(const ParameterVector&, std::uint64_t eval_seed)>;

struct ProfileBin {
    double lower = 0.0; ///< profiled-parameter interval, contiguous across bins
    double upper = 0.0;
    std::optional<double> best_error;
    std::optional<ParameterVector> best_genome; ///< witness; profiled coordinate lies in the bin
};

struct ProfileCurve {
    std::size_t param_index = 0;
    std::string param_name;
    std::vector<ProfileBin> bins;
};

enum class ProfileShape { informative, flat };

struct ProfileConfig {
    std::size_t n_bins = 32;
    std::size_t budget = 10000;
    std::size_t batch = 32;
    /// Chance that a child is aimed at a not-yet-populated bin.
    double empty_bin_pressure = 0.5;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    LogFn log;
};

/// Runs the niching search: one seeding child per bin, then mutated copies
/// of random elites (all coordinates move, including the profiled one) that
/// replace a bin's elite when strictly better. Every bin's recorded error
/// upper-bounds the true envelope and is non-increasing in budget for a
/// fixed seed. Deterministic in the seed for any worker count. Throws when
/// param_index is out of range, n_bins < 2 or budget < n_bins. Evaluation
/// failures are logged and the budget is consumed.
ProfileCurve profile_run(const ScalarProblem& problem, const ParameterSpace& space,
                         std::size_t param_index, const ProfileConfig& config);

/// flat iff (max - min) <= flatness_tol * max(1, max). Throws when any bin
/// is unpopulated.
ProfileShape classify_profile(const ProfileCurve& curve, double flatness_tol);

} // namespace molelab
