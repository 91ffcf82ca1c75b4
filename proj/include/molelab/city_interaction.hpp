#pragma once
// =============================================================================
// city_interaction.hpp — Macroscopic city-system model on a transport network.
//
// Deterministic dynamics; per step:
//   rate_i = r0                                             (endogenous growth)
//          + w_gravity * sum_{j!=i} F_ij / P_i              (gravity interactions)
//          + w_network * through_flow_i / total_flow        (flow feedback)
//   with F_ij = (P_i P_j / P_total^2) * exp(-d_ij / d_gravity), d_ij the
//   network shortest-path distance by link length, and pairwise flows
//   assigned along those paths (through_flow counts flow crossing a city as
//   an intermediate node). Populations update P_i <- P_i (1 + rate_i); link
//   capacities are reinforced when their flow share exceeds the mean share;
//   closeness and accessibility are recomputed each step on capacity-adjusted
//   effective lengths (length / capacity), so capacity evolution feeds back
//   into the network observables.
//
// The trajectory emitted (populations as the territorial variable, closeness
// and accessibility as network variables) is the input of the causality-
// regime analysis.
// =============================================================================

#include <cstdint>
#include <string>
#include <vector>

namespace molelab::cityinter {

struct City {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double population = 1.0; ///< > 0
};

struct Link {
    int a = 0;
    int b = 0;
    double capacity = 1.0; ///< > 0
    double length = 1.0;   ///< > 0
};

struct CitySystem {
    std::vector<City> cities;
    std::vector<Link> links;

    /// Throws unless the network is connected, endpoints are valid and all
    /// populations, capacities and lengths are positive.
    void validate() const;
};

struct InteractionParams {
    double r0 = 0.0;          ///< per-step endogenous growth rate
    double w_gravity = 0.0;   ///< interaction weight
    double d_gravity = 1.0;   ///< decay length, > 0
    double w_network = 0.0;   ///< flow-feedback weight
    double capacity_rate = 0.0; ///< capacity evolution rate, >= 0
    int steps = 1;            ///< >= 1
};

/// Row t holds the state after update t + 1 (steps x n_cities matrices).
struct SystemTrajectory {
    std::size_t n_cities = 0;
    std::vector<std::vector<double>> population;
    std::vector<std::vector<double>> closeness;
    std::vector<std::vector<double>> accessibility;
};

/// Pairwise gravity flows assigned along shortest paths (by raw length).
struct FlowSummary {
    std::vector<double> through_flow; ///< flow crossing each city as an intermediate node
    std::vector<double> link_flow;    ///< flow carried by each link
    double total_flow = 0.0;          ///< sum of pairwise gravity flows
};

FlowSummary gravity_flows(const CitySystem& state, double d_gravity);

/// Closeness centrality and gravity-potential accessibility on effective
/// lengths (length / capacity).
struct NetworkIndicators {
    std::vector<double> closeness;
    std::vector<double> accessibility;
};

NetworkIndicators network_indicators(const CitySystem& state, double d_gravity);

/// Per-city growth rates for the current state.
std::vector<double> growth_rates(const CitySystem& state,
                                 const InteractionParams& params);

/// Full deterministic trajectory. Aborts with a diagnostic when a population
/// leaves (0, 1e12 x initial total) or turns non-finite.
SystemTrajectory simulate(CitySystem state, const InteractionParams& params);

/// Mean over steps and cities of (sim - obs)^2; dimensions must match.
double mse_population(const std::vector<std::vector<double>>& simulated,
                      const std::vector<std::vector<double>>& observed);

/// Mean of (ln sim - ln obs)^2; all values must be positive.
double mse_log_population(const std::vector<std::vector<double>>& simulated,
                          const std::vector<std::vector<double>>& observed);

/// Seeded synthetic system: positions uniform in the unit square, lognormal
/// populations, Euclidean minimum spanning tree plus `extra_links`
/// nearest-neighbour shortcuts, unit capacities.
CitySystem make_synthetic_system(std::size_t n_cities, std::uint64_t seed,
                                 std::size_t extra_links = 0);

/// City file: header city_id,x,y,pop_t0[,pop_t1,...]; network file: header
/// i,j,length,capacity. Populations of the system are the pop_t0 column;
/// `observed` holds every time column (rows = time points).
struct ObservedSystem {
    CitySystem system;
    std::vector<std::vector<double>> observed; ///< time points x cities
};

ObservedSystem load_system_csv(const std::string& cities_path,
                               const std::string& network_path);

} // namespace molelab::cityinter
