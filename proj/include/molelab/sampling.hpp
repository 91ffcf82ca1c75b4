#pragma once
// Direct exploration designs over a ParameterSpace.

#include "molelab/param_space.hpp"

#include <cstdint>

namespace molelab {

struct LhsOptions {
    bool centered = false; ///< stratum centers instead of jittered positions
};

/// Latin hypercube design: for each dimension the n samples occupy each of
/// the n strata [k/n, (k+1)/n) exactly once, with independent per-dimension
/// stratum permutations and uniform jitter inside each stratum. Unit points
/// are mapped through ParameterSpace::from_unit, so logarithmic dimensions
/// are stratified geometrically. Deterministic in `seed`.
std::vector<ParameterVector> lhs(const ParameterSpace& space, std::size_t n,
                                 std::uint64_t seed, const LhsOptions& options = {});

/// Full factorial of evenly spaced levels per dimension (in scaled space).
/// A single level sits at the midpoint; otherwise levels include both
/// endpoints. Points are produced in lexicographic index order, first
/// dimension most significant.
std::vector<ParameterVector> grid(const ParameterSpace& space,
                                  const std::vector<std::size_t>& levels_per_dim);

} // namespace molelab
