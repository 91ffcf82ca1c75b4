#include "molelab/pse.hpp"

#include "molelab/rng.hpp"
#include "molelab/worker_pool.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace molelab {

PatternGrid::PatternGrid(std::vector<GridDim> dims) : dims_(std::move(dims)) {
    if (dims_.empty())
        throw std::invalid_argument("PatternGrid: need at least one dimension");
    for (const GridDim& d : dims_) {
        if (!(d.lower < d.upper))
            throw std::invalid_argument("PatternGrid: dimension needs lower < upper");
        if (d.n_bins < 1)
            throw std::invalid_argument("PatternGrid: dimension needs n_bins >= 1");
    }
}

std::vector<std::size_t>
PatternGrid::discretize(const std::vector<double>& pattern) const {
    if (pattern.size() != dims_.size())
        throw std::invalid_argument("PatternGrid::discretize: pattern arity mismatch");
    std::vector<std::size_t> cell(dims_.size());
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (!std::isfinite(pattern[k]))
            throw std::invalid_argument("PatternGrid::discretize: non-finite pattern component");
        const GridDim& d = dims_[k];
        const double width = (d.upper - d.lower) / static_cast<double>(d.n_bins);
        const double offset = std::floor((pattern[k] - d.lower) / width);
        if (offset < 0.0) {
            cell[k] = 0;
        } else if (offset >= static_cast<double>(d.n_bins)) {
            cell[k] = d.n_bins - 1;
        } else {
            cell[k] = static_cast<std::size_t>(offset);
        }
    }
    return cell;
}

bool PatternGrid::out_of_range(const std::vector<double>& pattern) const {
    for (std::size_t k = 0; k < dims_.size(); ++k)
        if (pattern[k] < dims_[k].lower || pattern[k] > dims_[k].upper) return true;
    return false;
}

void PatternGrid::record(const ParameterVector& genome,
                         const std::vector<double>& pattern) {
    const auto cell = discretize(pattern);
    const bool clamped = out_of_range(pattern);
    auto [it, inserted] = cells_.try_emplace(cell);
    PatternCell& entry = it->second;
    ++entry.hit_count;
    entry.overflow = entry.overflow || clamped;
    if (inserted) {
        entry.exemplar_genome = genome;
        entry.exemplar_pattern = pattern;
    }
}

std::size_t coverage(const PatternGrid& grid) { return grid.coverage(); }

const PatternCell* select_rare_parent(const PatternGrid& grid, std::mt19937_64& rng) {
    const auto& cells = grid.cells();
    if (cells.empty()) return nullptr;
    double total = 0.0;
    for (const auto& [cell, entry] : cells)
        total += 1.0 / (1.0 + static_cast<double>(entry.hit_count));
    std::uniform_real_distribution<double> uniform(0.0, total);
    double target = uniform(rng);
    const PatternCell* last = nullptr;
    for (const auto& [cell, entry] : cells) {
        last = &entry;
        target -= 1.0 / (1.0 + static_cast<double>(entry.hit_count));
        if (target <= 0.0) return last;
    }
    return last; // round-off fell past the end
}

PatternGrid pse_run(const PatternProblem& problem, const ParameterSpace& space,
                    std::vector<GridDim> grid_dims, const PseConfig& config) {
    if (config.batch < 1 || config.budget < config.batch)
        throw std::invalid_argument("pse_run: need budget >= batch >= 1");
    if (config.mutation_sigmas.empty())
        throw std::invalid_argument("pse_run: need at least one mutation sigma");

    PatternGrid grid(std::move(grid_dims));
    const std::size_t d = space.dimension();
    auto rng = make_engine(config.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> sigma_pick(
        0, config.mutation_sigmas.size() - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::uint64_t evals = 0;
    std::vector<ParameterVector> batch_genomes;
    std::vector<std::vector<double>> batch_patterns;

    while (evals < config.budget) {
        const std::size_t batch_n = static_cast<std::size_t>(
            std::min<std::uint64_t>(config.batch, config.budget - evals));
        batch_genomes.clear();

        std::vector<double> unit(d);
        for (std::size_t s = 0; s < batch_n; ++s) {
            const PatternCell* parent = nullptr;
            if (grid.coverage() > 0 && uniform(rng) >= config.fresh_fraction)
                parent = select_rare_parent(grid, rng);
            if (parent == nullptr) {
                for (double& c : unit) c = uniform(rng);
            } else {
                const auto parent_unit = space.to_unit(parent->exemplar_genome);
                const double sigma = config.mutation_sigmas[sigma_pick(rng)];
                for (std::size_t k = 0; k < d; ++k) {
                    const double c = parent_unit[k] + sigma * gauss(rng);
                    unit[k] = c < 0.0 ? 0.0 : (c > 1.0 ? 1.0 : c);
                }
            }
            batch_genomes.push_back(space.from_unit(unit));
        }

        batch_patterns.assign(batch_n, {});
        std::vector<std::uint64_t> seeds(batch_n);
        for (std::size_t s = 0; s < batch_n; ++s)
            seeds[s] = derive_seed(config.seed, evals + s);
        auto errors = parallel_for_indexed(batch_n, config.workers, [&](std::size_t s) {
            batch_patterns[s] = problem(batch_genomes[s], seeds[s]);
        });
        evals += batch_n;

        // archive updates in submission order
        for (std::size_t s = 0; s < batch_n; ++s) {
            if (errors[s]) {
                if (config.log) config.log("pse evaluation failed, individual discarded");
                continue;
            }
            try {
                grid.record(batch_genomes[s], batch_patterns[s]);
            } catch (const std::exception& e) {
                if (config.log)
                    config.log(std::string("pse pattern rejected: ") + e.what());
            }
        }
    }
    return grid;
}

} // namespace molelab
