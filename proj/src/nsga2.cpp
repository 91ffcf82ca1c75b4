#include "molelab/nsga2.hpp"

#include "molelab/rng.hpp"
#include "molelab/worker_pool.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace molelab {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("dominates: objective arity mismatch");
    bool strictly_better = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] > b[k]) return false;
        if (a[k] < b[k]) strictly_better = true;
    }
    return strictly_better;
}

std::vector<std::vector<std::size_t>>
non_dominated_sort(const std::vector<Individual>& population) {
    const std::size_t n = population.size();
    for (const Individual& ind : population)
        if (ind.objectives.empty())
            throw std::invalid_argument("non_dominated_sort: unevaluated individual");

    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dominator_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(population[i].objectives, population[j].objectives)) {
                dominated[i].push_back(j);
                ++dominator_count[j];
            } else if (dominates(population[j].objectives, population[i].objectives)) {
                dominated[j].push_back(i);
                ++dominator_count[i];
            }
        }
    }

    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dominator_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (const std::size_t p : current)
            for (const std::size_t q : dominated[p])
                if (--dominator_count[q] == 0) next.push_back(q);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<Individual>& front) {
    const std::size_t n = front.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> distance(n, 0.0);
    if (n == 0) return distance;
    if (n <= 2) {
        std::fill(distance.begin(), distance.end(), inf);
        return distance;
    }
    const std::size_t m = front[0].objectives.size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return front[a].objectives[k] < front[b].objectives[k];
                         });
        distance[order.front()] = inf;
        distance[order.back()] = inf;
        const double span =
            front[order.back()].objectives[k] - front[order.front()].objectives[k];
        if (span <= 0.0) continue;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (distance[order[i]] == inf) continue;
            distance[order[i]] += (front[order[i + 1]].objectives[k] -
                                   front[order[i - 1]].objectives[k]) /
                                  span;
        }
    }
    return distance;
}

namespace {

double polynomial_delta(double x, double u, double eta) {
    // bounded polynomial mutation on [0, 1]
    if (u < 0.5) {
        const double d1 = x;
        const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
        return std::pow(val, 1.0 / (eta + 1.0)) - 1.0;
    }
    const double d2 = 1.0 - x;
    const double val =
        2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
    return 1.0 - std::pow(val, 1.0 / (eta + 1.0));
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

} // namespace

std::pair<ParameterVector, ParameterVector>
vary(const ParameterVector& parent_a, const ParameterVector& parent_b,
     const ParameterSpace& space, const EvolutionConfig& config,
     std::mt19937_64& rng) {
    const std::size_t d = space.dimension();
    std::vector<double> ua = space.to_unit(parent_a);
    std::vector<double> ub = space.to_unit(parent_b);
    std::vector<bool> touched_a(d, false), touched_b(d, false);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double pm =
        config.mutation_rate < 0.0 ? 1.0 / static_cast<double>(d) : config.mutation_rate;

    if (config.crossover_rate > 0.0 && uniform(rng) < config.crossover_rate) {
        for (std::size_t k = 0; k < d; ++k) {
            if (uniform(rng) >= 0.5) continue;
            const double u = uniform(rng);
            const double eta = config.crossover_index;
            const double beta =
                u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                         : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
            const double x1 = ua[k];
            const double x2 = ub[k];
            ua[k] = clamp01(0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2));
            ub[k] = clamp01(0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2));
            touched_a[k] = touched_b[k] = true;
        }
    }
    for (std::size_t k = 0; k < d; ++k) {
        if (pm > 0.0 && uniform(rng) < pm) {
            ua[k] = clamp01(ua[k] + polynomial_delta(ua[k], uniform(rng),
                                                     config.mutation_index));
            touched_a[k] = true;
        }
        if (pm > 0.0 && uniform(rng) < pm) {
            ub[k] = clamp01(ub[k] + polynomial_delta(ub[k], uniform(rng),
                                                     config.mutation_index));
            touched_b[k] = true;
        }
    }

    // untouched coordinates keep the parents' raw values exactly
    ParameterVector child_a = space.from_unit(ua);
    ParameterVector child_b = space.from_unit(ub);
    for (std::size_t k = 0; k < d; ++k) {
        if (!touched_a[k]) child_a[k] = parent_a[k];
        if (!touched_b[k]) child_b[k] = parent_b[k];
    }
    return {std::move(child_a), std::move(child_b)};
}

void ParetoArchive::add(Individual candidate) {
    for (const Individual& member : individuals) {
        if (dominates(member.objectives, candidate.objectives)) return;
        if (member.objectives == candidate.objectives &&
            member.genome == candidate.genome)
            return;
    }
    std::erase_if(individuals, [&](const Individual& member) {
        return dominates(candidate.objectives, member.objectives);
    });
    individuals.push_back(std::move(candidate));
}

namespace {

struct Engine {
    const MultiObjectiveProblem& problem;
    const ParameterSpace& space;
    const EvolutionConfig& config;
    std::uint64_t stream_seed; ///< genetic-operation stream for this run
    std::uint64_t eval_seed_base;
    std::uint64_t eval_counter = 0;
    unsigned workers;

    void evaluate(std::vector<Individual>& batch) {
        const std::size_t n = batch.size();
        std::vector<std::uint64_t> seeds(n);
        for (std::size_t i = 0; i < n; ++i)
            seeds[i] = derive_seed(eval_seed_base, eval_counter + i);
        eval_counter += n;
        auto errors = parallel_for_indexed(n, workers, [&](std::size_t i) {
            batch[i].objectives = problem(batch[i].genome, seeds[i]);
            if (batch[i].objectives.size() != config.n_objectives)
                throw std::runtime_error("evaluator returned wrong objective arity");
            batch[i].replications = config.replications;
        });
        for (std::size_t i = 0; i < n; ++i) {
            if (!errors[i]) continue;
            batch[i].objectives.assign(config.n_objectives, config.failure_objective);
            batch[i].replications = config.replications;
            if (config.log) {
                try {
                    std::rethrow_exception(errors[i]);
                } catch (const std::exception& e) {
                    config.log(std::string("evaluation failed, scoring worst case: ") + e.what());
                } catch (...) {
                    config.log("evaluation failed, scoring worst case");
                }
            }
        }
    }

    /// Ranks, crowds and truncates parents+offspring down to N.
    std::vector<Individual> select(std::vector<Individual> merged) {
        const std::size_t target = config.population_size;
        const auto fronts = non_dominated_sort(merged);
        std::vector<Individual> next;
        next.reserve(target);
        for (std::size_t f = 0; f < fronts.size() && next.size() < target; ++f) {
            std::vector<Individual> members;
            members.reserve(fronts[f].size());
            for (const std::size_t idx : fronts[f]) members.push_back(merged[idx]);
            const auto crowd = crowding_distance(members);
            for (std::size_t i = 0; i < members.size(); ++i) {
                members[i].rank = static_cast<int>(f);
                members[i].crowding = crowd[i];
            }
            if (next.size() + members.size() <= target) {
                for (auto& m : members) next.push_back(std::move(m));
            } else {
                std::vector<std::size_t> order(members.size());
                for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                std::stable_sort(order.begin(), order.end(),
                                 [&](std::size_t a, std::size_t b) {
                                     return members[a].crowding > members[b].crowding;
                                 });
                for (std::size_t i = 0; next.size() < target; ++i)
                    next.push_back(std::move(members[order[i]]));
            }
        }
        return next;
    }

    std::size_t tournament(const std::vector<Individual>& pop, std::mt19937_64& rng) {
        std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
        const std::size_t a = pick(rng);
        const std::size_t b = pick(rng);
        if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank ? a : b;
        if (pop[a].crowding != pop[b].crowding)
            return pop[a].crowding > pop[b].crowding ? a : b;
        return a;
    }

    std::vector<Individual> run(std::size_t generations,
                                std::vector<ParameterVector> initial_genomes) {
        auto rng = make_engine(stream_seed);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        const std::size_t pop_size = config.population_size;

        std::vector<Individual> population(pop_size);
        if (initial_genomes.empty()) {
            std::vector<double> u(space.dimension());
            for (std::size_t i = 0; i < pop_size; ++i) {
                for (double& c : u) c = uniform(rng);
                population[i].genome = space.from_unit(u);
            }
        } else {
            if (initial_genomes.size() != pop_size)
                throw std::invalid_argument("nsga2: initial population size mismatch");
            for (std::size_t i = 0; i < pop_size; ++i)
                population[i].genome = std::move(initial_genomes[i]);
        }
        evaluate(population);
        population = select(std::move(population)); // assigns rank and crowding
        if (config.on_generation) config.on_generation(0, population);

        for (std::size_t gen = 1; gen <= generations; ++gen) {
            std::vector<Individual> offspring;
            offspring.reserve(pop_size);
            while (offspring.size() < pop_size) {
                const std::size_t a = tournament(population, rng);
                const std::size_t b = tournament(population, rng);
                auto [ca, cb] = vary(population[a].genome, population[b].genome,
                                     space, config, rng);
                Individual ia, ib;
                ia.genome = std::move(ca);
                ib.genome = std::move(cb);
                offspring.push_back(std::move(ia));
                if (offspring.size() < pop_size) offspring.push_back(std::move(ib));
            }
            evaluate(offspring);
            std::vector<Individual> merged = std::move(population);
            merged.reserve(merged.size() + offspring.size());
            for (auto& child : offspring) merged.push_back(std::move(child));
            population = select(std::move(merged));
            if (config.on_generation) config.on_generation(gen, population);
        }
        return population;
    }
};

void validate_config(const ParameterSpace& space, const EvolutionConfig& config) {
    if (space.dimension() == 0)
        throw std::invalid_argument("nsga2: empty parameter space");
    if (config.population_size < 4 || config.population_size % 2 != 0)
        throw std::invalid_argument("nsga2: population_size must be >= 4 and even");
    if (config.n_objectives == 0)
        throw std::invalid_argument("nsga2: n_objectives must be >= 1");
}

ParetoArchive first_front_archive(const std::vector<Individual>& population) {
    ParetoArchive archive;
    const auto fronts = non_dominated_sort(population);
    if (!fronts.empty())
        for (const std::size_t idx : fronts[0]) archive.add(population[idx]);
    return archive;
}

} // namespace

ParetoArchive nsga2_run(const MultiObjectiveProblem& problem,
                        const ParameterSpace& space, const EvolutionConfig& config) {
    validate_config(space, config);
    if (config.max_evaluations < config.population_size)
        throw std::invalid_argument("nsga2_run: budget below population_size");
    const std::size_t generations =
        (config.max_evaluations - config.population_size) / config.population_size;
    Engine engine{problem, space, config, config.seed,
                  derive_seed(config.seed, 0xE7A1), 0, config.workers};
    const auto population = engine.run(generations, {});
    return first_front_archive(population);
}

ParetoArchive island_run(const MultiObjectiveProblem& problem,
                         const ParameterSpace& space, const EvolutionConfig& config,
                         const IslandConfig& islands,
                         const ParetoArchive& initial_archive,
                         std::size_t first_epoch) {
    validate_config(space, config);
    if (islands.n_islands < 1)
        throw std::invalid_argument("island_run: need at least one island");
    if (islands.reseed_archive_fraction < 0.0 || islands.reseed_archive_fraction > 1.0)
        throw std::invalid_argument("island_run: reseed_archive_fraction outside [0,1]");

    const std::size_t pop_size = config.population_size;
    ParetoArchive archive = initial_archive;

    for (std::size_t epoch = first_epoch; epoch < first_epoch + islands.epochs; ++epoch) {
        // deterministic reseeding drawn before any island starts
        std::vector<std::vector<ParameterVector>> initial(islands.n_islands);
        if (!archive.empty()) {
            auto reseed_rng = make_engine(derive_seed(config.seed, 0x12E5EED, epoch));
            std::uniform_real_distribution<double> uniform(0.0, 1.0);
            std::uniform_int_distribution<std::size_t> pick(0, archive.size() - 1);
            const std::size_t from_archive = std::min(
                pop_size, static_cast<std::size_t>(std::llround(
                              islands.reseed_archive_fraction *
                              static_cast<double>(pop_size))));
            std::vector<double> u(space.dimension());
            for (std::size_t isl = 0; isl < islands.n_islands; ++isl) {
                initial[isl].reserve(pop_size);
                for (std::size_t i = 0; i < from_archive; ++i)
                    initial[isl].push_back(archive.individuals[pick(reseed_rng)].genome);
                for (std::size_t i = from_archive; i < pop_size; ++i) {
                    for (double& c : u) c = uniform(reseed_rng);
                    initial[isl].push_back(space.from_unit(u));
                }
            }
        }

        std::vector<std::vector<Individual>> results(islands.n_islands);
        const unsigned island_workers =
            islands.n_islands > 1 ? 1 : config.workers;
        const unsigned outer_workers = islands.n_islands > 1
                                           ? std::min<unsigned>(config.workers,
                                                                static_cast<unsigned>(islands.n_islands))
                                           : 1;
        auto errors = parallel_for_indexed(
            islands.n_islands, outer_workers, [&](std::size_t isl) {
                const std::uint64_t island_seed =
                    (epoch == 0 && isl == 0)
                        ? config.seed
                        : derive_seed(config.seed, 0x15A + epoch, isl);
                Engine engine{problem, space, config, island_seed,
                              derive_seed(island_seed, 0xE7A1), 0, island_workers};
                results[isl] = engine.run(islands.island_generations,
                                          std::move(initial[isl]));
            });
        for (std::size_t isl = 0; isl < islands.n_islands; ++isl) {
            if (!errors[isl]) continue;
            results[isl].clear();
            if (config.log) {
                try {
                    std::rethrow_exception(errors[isl]);
                } catch (const std::exception& e) {
                    config.log("island " + std::to_string(isl) + " failed in epoch " +
                               std::to_string(epoch) + ": " + e.what());
                } catch (...) {
                    config.log("island " + std::to_string(isl) + " failed in epoch " +
                               std::to_string(epoch));
                }
            }
        }

        // merge in island-index order
        for (std::size_t isl = 0; isl < islands.n_islands; ++isl)
            for (Individual& individual : results[isl])
                archive.add(std::move(individual));

        if (islands.on_epoch) islands.on_epoch(epoch, archive);
    }
    return archive;
}

} // namespace molelab
