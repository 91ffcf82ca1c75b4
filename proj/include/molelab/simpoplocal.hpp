#pragma once
// =============================================================================
// simpoplocal.hpp — Stochastic settlement-system model.
//
// About a hundred fixed places, each with a population, a local resource
// (carrying capacity, in inhabitant units) and a set of acquired innovations.
// Each step applies, synchronously per phase and in this order:
//
//   1. logistic population growth against the local resource,
//   2. innovation diffusion between places (per ordered pair, per innovation
//      the source holds and the target lacks, with a probability driven by
//      the product of populations and damped by (1 + distance)^decay),
//   3. endogenous innovation creation (probability driven by the number of
//      within-place person pairs),
//   4. resource impact of every innovation acquired this step (a saturating
//      multiplicative gain capped at r_max).
//
// The loop stops after max_steps or once the total number of innovations
// reaches max_innovations. A run is single-threaded and deterministic in
// (params, seed); replications are independent runs under derived seeds.
// =============================================================================

#include <cstdint>
#include <string>
#include <vector>

namespace molelab::simpoplocal {

struct Place {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double population = 0.0; ///< inhabitants, >= 0
    double resource = 0.0;   ///< carrying capacity, inhabitant units, > 0
    std::vector<std::uint32_t> innovations; ///< acquired innovation ids, ascending
};

/// Defaults for the generated initial state: one slightly larger place and
/// uniform small villages, equal resources. Illustrative, not canonical.
struct InitConfig {
    double largest_population = 100.0;
    double population_min = 10.0;
    double population_max = 60.0;
    double resource = 250.0;
};

struct Params {
    // calibrated parameters
    double p_creation = 1e-6;        ///< per same-place person pair per step, in [0,1]
    double p_diffusion = 1e-6;       ///< per cross-place effective pair per step, in [0,1]
    double distance_decay = 1.0;     ///< >= 0
    double innovation_impact = 0.1;  ///< >= 0, resource gain per acquired innovation
    double r_max = 1e5;              ///< > 0, must cover every initial resource

    // fixed context
    int n_places = 100;
    double growth_rate = 2e-4;       ///< per step
    int max_steps = 4000;
    int max_innovations = 10000;
    int knn = 0;                     ///< 0 = diffusion over all pairs, k > 0 = symmetric k-nearest-neighbour network
    InitConfig init;
    std::vector<Place> initial_places; ///< when non-empty, used verbatim instead of the generated state
};

enum class Termination { max_steps, max_innovations };

struct Outcome {
    std::vector<Place> final_places;
    int duration = 0;        ///< steps executed, <= max_steps
    int n_innovations = 0;   ///< distinct innovations created over the run
    Termination termination = Termination::max_steps;
};

struct TrajectoryRow {
    int step = 0;
    int place_id = 0;
    double population = 0.0;
    double resource = 0.0;
    int n_innovations = 0; ///< innovations acquired by this place so far
};

// --- mechanism primitives ----------------------------------------------------
// Each is isolated so alternative functional forms can be swapped in.

/// P + growth_rate * P * (1 - P/resource), floored at zero.
double growth_step(double population, double resource, double growth_rate);

/// 1 - (1 - p_creation)^(P(P-1)/2), zero below two inhabitants.
double creation_probability(double population, double p_creation);

/// Effective pairs m = pop_i * pop_j / (1 + distance)^decay,
/// probability 1 - (1 - p_diffusion)^m.
double diffusion_probability(double pop_i, double pop_j, double distance,
                             double p_diffusion, double decay);

/// resource * (1 + innovation_impact * (1 - resource/r_max)), capped at r_max.
double apply_innovation(double resource, double innovation_impact, double r_max);

// --- runs ---------------------------------------------------------------------

/// Initial state: seeded-random positions in the unit square, configured
/// initial populations (place 0 carries init.largest_population) and
/// resources. Deterministic in seed. Throws when n_places < 2.
std::vector<Place> init_state(const Params& params, std::uint64_t seed);

/// Full run from init_state(params, seed). When `trajectory` is given, one
/// row per place is appended for the initial state (step 0) and after every
/// executed step.
Outcome run(const Params& params, std::uint64_t seed,
            std::vector<TrajectoryRow>* trajectory = nullptr);

/// OLS slope of log(population) against log(rank), ranks 1..n by descending
/// population. Throws for fewer than two values or non-positive values.
double rank_size_slope(const std::vector<double>& populations);

/// Reads an initial-state file with header id,x,y,population,resource.
std::vector<Place> load_places_csv(const std::string& path);

} // namespace molelab::simpoplocal
