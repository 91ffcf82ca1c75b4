#pragma once
// Pattern Space Exploration: evolutionary diversity search over a
// discretized output-pattern grid. Parents are drawn from the archive with
// weight 1/(1 + hit_count), so rarely-hit behaviours breed more, plus a
// fresh-random fraction; the first genome reaching a cell becomes its
// exemplar. Coverage — the number of distinct cells discovered — is the
// figure of merit.

#include "molelab/nsga2.hpp"
#include "molelab/param_space.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace molelab {

struct GridDim {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t n_bins = 10;
};

struct PatternCell {
    std::size_t hit_count = 0;
    ParameterVector exemplar_genome;
    std::vector<double> exemplar_pattern;
    bool overflow = false; ///< some pattern landing here was clamped into range
};

class PatternGrid {
public:
    PatternGrid() = default;
    explicit PatternGrid(std::vector<GridDim> dims);

    const std::vector<GridDim>& dims() const { return dims_; }

    /// Per-dimension index floor((x - lower)/width), clamped to
    /// [0, n_bins - 1] so out-of-range patterns land in boundary cells.
    /// Throws on arity mismatch or a non-finite component.
    std::vector<std::size_t> discretize(const std::vector<double>& pattern) const;

    bool out_of_range(const std::vector<double>& pattern) const;

    /// Counts a hit; the first genome reaching a cell becomes its exemplar.
    void record(const ParameterVector& genome, const std::vector<double>& pattern);

    std::size_t coverage() const { return cells_.size(); }
    const std::map<std::vector<std::size_t>, PatternCell>& cells() const {
        return cells_;
    }

private:
    std::vector<GridDim> dims_;
    std::map<std::vector<std::size_t>, PatternCell> cells_;
};

/// Maps a genome to an output-pattern vector. Throwing marks the evaluation
/// failed; the individual is discarded and the budget is still consumed.
using PatternProblem =
    std::function<std::vector<double>(const ParameterVector&, std::uint64_t eval_seed)>;

struct PseConfig {
    std::size_t budget = 2000;
    std::size_t batch = 32; ///< budget >= batch >= 1
    double fresh_fraction = 0.1;
    std::vector<double> mutation_sigmas = {0.3, 0.1, 0.03, 0.01};
    std::uint64_t seed = 0;
    unsigned workers = 1;
    LogFn log;
};

/// Runs the diversity search; deterministic in the seed for deterministic
/// problems and any worker count (archive updates apply in submission order).
PatternGrid pse_run(const PatternProblem& problem, const ParameterSpace& space,
                    std::vector<GridDim> grid_dims, const PseConfig& config);

/// Number of non-empty cells.
std::size_t coverage(const PatternGrid& grid);

/// Rarity-weighted parent pick (weight 1/(1 + hit_count)); nullptr when the
/// archive is empty. Exposed as the selection policy seam.
const PatternCell* select_rare_parent(const PatternGrid& grid, std::mt19937_64& rng);

} // namespace molelab
