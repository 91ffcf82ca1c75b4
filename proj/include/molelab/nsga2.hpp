#pragma once
// =============================================================================
// nsga2.hpp — Multi-objective evolutionary calibration.
//
// Canonical NSGA-II (fast non-dominated sort, crowding distance, binary
// tournament on (rank, crowding), simulated-binary crossover and polynomial
// mutation in unit space) plus an island scheme: sub-populations evolve
// independently for an epoch, a coordinator merges them into a global
// non-dominated archive and reseeds each island from the archive plus fresh
// random genomes.
//
// Determinism contract: all genetic operations draw from a single coordinator
// stream per (island, epoch); evaluations fan out to a worker pool but their
// seeds are assigned from a monotone evaluation counter before dispatch and
// results are merged by index, so outcomes are identical for any worker
// count. Noisy problems handle their own replication fan-in (see
// evaluate_simpoplocal); the engine records the replication count on every
// individual.
// =============================================================================

#include "molelab/objectives.hpp"
#include "molelab/param_space.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace molelab {

using LogFn = std::function<void(const std::string&)>;

/// Objective evaluator; `eval_seed` feeds the problem's own stochasticity
/// and is ignored by deterministic problems.
using MultiObjectiveProblem =
    std::function<ObjectiveVector(const ParameterVector&, std::uint64_t eval_seed)>;

struct Individual {
    ParameterVector genome;
    ObjectiveVector objectives;
    int rank = 0;
    double crowding = 0.0;
    int replications = 1;
};

/// Mutually non-dominated set; add() preserves the invariant.
struct ParetoArchive {
    std::vector<Individual> individuals;

    /// Inserts unless dominated; evicts members the candidate dominates.
    /// Exact duplicates (same genome and objectives) are dropped.
    void add(Individual candidate);
    bool empty() const { return individuals.empty(); }
    std::size_t size() const { return individuals.size(); }
};

struct EvolutionConfig {
    std::size_t population_size = 200; ///< >= 4 and even
    std::size_t max_evaluations = 20000;
    std::size_t n_objectives = 2;
    double crossover_rate = 0.9;
    double mutation_rate = -1.0;  ///< negative selects 1/dimension
    double crossover_index = 2.0; ///< SBX distribution index
    double mutation_index = 20.0; ///< polynomial-mutation distribution index
    int replications = 1;         ///< recorded on individuals; the evaluator owns the fan-out
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double failure_objective = 1e30; ///< assigned on evaluator exceptions
    LogFn log;
    /// Called after every environmental selection with the new population.
    std::function<void(std::size_t generation, const std::vector<Individual>&)> on_generation;
};

struct IslandConfig {
    std::size_t n_islands = 1;
    std::size_t island_generations = 10; ///< offspring generations per epoch
    std::size_t epochs = 1;
    /// Share of each reseeded island population sampled from the archive;
    /// the remainder is fresh random genomes. Merging is always the
    /// non-dominated union, in island-index order.
    double reseed_archive_fraction = 0.5;
    /// Called after each epoch's merge with the global archive (checkpointing).
    std::function<void(std::size_t epoch, const ParetoArchive&)> on_epoch;
};

/// Strict Pareto dominance for minimization: a <= b everywhere and a < b
/// somewhere. Throws on arity mismatch.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Partition into fronts F1, F2, ...: F1 is the non-dominated set, Fk is
/// non-dominated once F1..F(k-1) are removed. Returns indices into the
/// population, each front in ascending index order. Throws when an
/// individual has no objectives.
std::vector<std::vector<std::size_t>>
non_dominated_sort(const std::vector<Individual>& population);

/// Crowding distances for one front: boundary individuals per objective get
/// +infinity, interior ones accumulate normalized neighbour gaps.
std::vector<double> crowding_distance(const std::vector<Individual>& front);

/// SBX crossover + polynomial mutation in unit space, clamped to bounds.
/// With both rates zero the parents come back unchanged.
std::pair<ParameterVector, ParameterVector>
vary(const ParameterVector& parent_a, const ParameterVector& parent_b,
     const ParameterSpace& space, const EvolutionConfig& config,
     std::mt19937_64& rng);

/// Generational NSGA-II; returns the first front of the final population.
/// Evaluator exceptions score failure_objective on every component (logged)
/// and the run continues.
ParetoArchive nsga2_run(const MultiObjectiveProblem& problem,
                        const ParameterSpace& space, const EvolutionConfig& config);

/// Island scheme. Equivalent to nsga2_run for a single island and epoch with
/// the same seed and budget. Pass a previous epoch's archive and
/// `first_epoch` to resume: seeds are derived from absolute epoch numbers,
/// so a resumed run reproduces the uninterrupted one. A failing island is
/// logged and skipped for the epoch.
ParetoArchive island_run(const MultiObjectiveProblem& problem,
                         const ParameterSpace& space, const EvolutionConfig& config,
                         const IslandConfig& islands,
                         const ParetoArchive& initial_archive = {},
                         std::size_t first_epoch = 0);

} // namespace molelab
