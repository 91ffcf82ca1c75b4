#include "molelab/simpoplocal.hpp"

#include "molelab/csv.hpp"
#include "molelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace molelab::simpoplocal {

double growth_step(double population, double resource, double growth_rate) {
    if (!(resource > 0.0))
        throw std::invalid_argument("growth_step: resource must be positive");
    if (population < 0.0)
        throw std::invalid_argument("growth_step: population must be >= 0");
    const double next =
        population + growth_rate * population * (1.0 - population / resource);
    return next < 0.0 ? 0.0 : next;
}

double creation_probability(double population, double p_creation) {
    if (p_creation < 0.0 || p_creation > 1.0)
        throw std::invalid_argument("creation_probability: p_creation outside [0,1]");
    if (population < 0.0)
        throw std::invalid_argument("creation_probability: population must be >= 0");
    if (population < 2.0 || p_creation == 0.0) return 0.0;
    if (p_creation == 1.0) return 1.0;
    const double pairs = population * (population - 1.0) / 2.0;
    const double prob = -std::expm1(pairs * std::log1p(-p_creation));
    return prob < 0.0 ? 0.0 : (prob > 1.0 ? 1.0 : prob);
}

double diffusion_probability(double pop_i, double pop_j, double distance,
                             double p_diffusion, double decay) {
    if (p_diffusion < 0.0 || p_diffusion > 1.0)
        throw std::invalid_argument("diffusion_probability: p_diffusion outside [0,1]");
    if (decay < 0.0)
        throw std::invalid_argument("diffusion_probability: decay must be >= 0");
    if (distance < 0.0)
        throw std::invalid_argument("diffusion_probability: distance must be >= 0");
    if (pop_i < 0.0 || pop_j < 0.0)
        throw std::invalid_argument("diffusion_probability: populations must be >= 0");
    const double effective_pairs =
        pop_i * pop_j / std::pow(1.0 + distance, decay);
    if (effective_pairs <= 0.0 || p_diffusion == 0.0) return 0.0;
    if (p_diffusion == 1.0) return 1.0;
    const double prob = -std::expm1(effective_pairs * std::log1p(-p_diffusion));
    return prob < 0.0 ? 0.0 : (prob > 1.0 ? 1.0 : prob);
}

double apply_innovation(double resource, double innovation_impact, double r_max) {
    if (!(resource > 0.0))
        throw std::invalid_argument("apply_innovation: resource must be positive");
    if (resource > r_max)
        throw std::invalid_argument("apply_innovation: resource exceeds r_max");
    if (innovation_impact < 0.0)
        throw std::invalid_argument("apply_innovation: impact must be >= 0");
    const double next =
        resource * (1.0 + innovation_impact * (1.0 - resource / r_max));
    return next > r_max ? r_max : next;
}

std::vector<Place> init_state(const Params& params, std::uint64_t seed) {
    if (!params.initial_places.empty()) {
        if (params.initial_places.size() < 2)
            throw std::invalid_argument("init_state: need at least 2 places");
        for (const Place& p : params.initial_places) {
            if (!(p.resource > 0.0))
                throw std::invalid_argument("init_state: place resource must be positive");
            if (p.population < 0.0)
                throw std::invalid_argument("init_state: place population must be >= 0");
        }
        return params.initial_places;
    }
    if (params.n_places < 2)
        throw std::invalid_argument("init_state: need at least 2 places");
    auto rng = make_engine(derive_seed(seed, 0x1417));
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::uniform_real_distribution<double> pop(params.init.population_min,
                                               params.init.population_max);
    std::vector<Place> places(static_cast<std::size_t>(params.n_places));
    for (int i = 0; i < params.n_places; ++i) {
        Place& p = places[static_cast<std::size_t>(i)];
        p.id = i;
        p.x = coord(rng);
        p.y = coord(rng);
        p.population = i == 0 ? params.init.largest_population : pop(rng);
        p.resource = params.init.resource;
    }
    return places;
}

namespace {

// Innovation sets as flat bitsets sized for the innovation cap; only the
// words holding already-created ids are scanned.
class InnovationSets {
public:
    InnovationSets(std::size_t n_places, std::size_t capacity)
        : words_per_place_((capacity + 63) / 64 + 1),
          bits_(n_places * words_per_place_, 0),
          counts_(n_places, 0) {}

    void insert(std::size_t place, std::uint32_t id) {
        std::uint64_t& w = bits_[place * words_per_place_ + id / 64];
        const std::uint64_t mask = std::uint64_t{1} << (id % 64);
        if (!(w & mask)) {
            w |= mask;
            ++counts_[place];
        }
    }

    int count(std::size_t place) const { return counts_[place]; }

    /// Appends ids held by `src` and missing from `dst` (ascending).
    void transferable(std::size_t src, std::size_t dst, std::size_t active_words,
                      std::vector<std::uint32_t>& out) const {
        out.clear();
        const std::uint64_t* a = &bits_[src * words_per_place_];
        const std::uint64_t* b = &bits_[dst * words_per_place_];
        for (std::size_t w = 0; w < active_words; ++w) {
            std::uint64_t diff = a[w] & ~b[w];
            while (diff) {
                const int bit = std::countr_zero(diff);
                out.push_back(static_cast<std::uint32_t>(w * 64 + bit));
                diff &= diff - 1;
            }
        }
    }

    std::vector<std::uint32_t> to_sorted_ids(std::size_t place) const {
        std::vector<std::uint32_t> ids;
        ids.reserve(static_cast<std::size_t>(counts_[place]));
        const std::uint64_t* a = &bits_[place * words_per_place_];
        for (std::size_t w = 0; w < words_per_place_; ++w) {
            std::uint64_t word = a[w];
            while (word) {
                const int bit = std::countr_zero(word);
                ids.push_back(static_cast<std::uint32_t>(w * 64 + bit));
                word &= word - 1;
            }
        }
        return ids;
    }

private:
    std::size_t words_per_place_;
    std::vector<std::uint64_t> bits_;
    std::vector<int> counts_;
};

void record_trajectory(std::vector<TrajectoryRow>* trajectory, int step,
                       const std::vector<Place>& places,
                       const InnovationSets* sets) {
    if (!trajectory) return;
    for (std::size_t i = 0; i < places.size(); ++i) {
        trajectory->push_back({step, places[i].id, places[i].population,
                               places[i].resource,
                               sets ? sets->count(i) : 0});
    }
}

} // namespace

Outcome run(const Params& params, std::uint64_t seed,
            std::vector<TrajectoryRow>* trajectory) {
    if (params.p_creation < 0.0 || params.p_creation > 1.0)
        throw std::invalid_argument("run: p_creation outside [0,1]");
    if (params.p_diffusion < 0.0 || params.p_diffusion > 1.0)
        throw std::invalid_argument("run: p_diffusion outside [0,1]");
    if (params.distance_decay < 0.0)
        throw std::invalid_argument("run: distance_decay must be >= 0");
    if (params.innovation_impact < 0.0)
        throw std::invalid_argument("run: innovation_impact must be >= 0");
    if (!(params.r_max > 0.0))
        throw std::invalid_argument("run: r_max must be positive");
    if (params.max_steps < 1)
        throw std::invalid_argument("run: max_steps must be >= 1");
    if (params.max_innovations < 1)
        throw std::invalid_argument("run: max_innovations must be >= 1");

    std::vector<Place> places = init_state(params, seed);
    const std::size_t n = places.size();
    for (const Place& p : places) {
        if (p.resource > params.r_max)
            throw std::invalid_argument("run: r_max must cover every initial resource");
    }

    // pairwise deterrence denominators, fixed for the whole run
    std::vector<double> deterrence(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = places[i].x - places[j].x;
            const double dy = places[i].y - places[j].y;
            const double d = std::sqrt(dx * dx + dy * dy);
            const double w = std::pow(1.0 + d, params.distance_decay);
            deterrence[i * n + j] = w;
            deterrence[j * n + i] = w;
        }
    }

    // optional k-nearest-neighbour interaction network (symmetric closure)
    std::vector<char> linked;
    if (params.knn > 0) {
        linked.assign(n * n, 0);
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t i = 0; i < n; ++i) {
            order.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double dx = places[i].x - places[j].x;
                const double dy = places[i].y - places[j].y;
                order.emplace_back(dx * dx + dy * dy, j);
            }
            std::sort(order.begin(), order.end());
            const std::size_t k =
                std::min<std::size_t>(static_cast<std::size_t>(params.knn), order.size());
            for (std::size_t r = 0; r < k; ++r) {
                linked[i * n + order[r].second] = 1;
                linked[order[r].second * n + i] = 1;
            }
        }
    }

    auto rng = make_engine(derive_seed(seed, 0x5EED));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    InnovationSets sets(n, static_cast<std::size_t>(params.max_innovations));
    std::uint32_t created_total = 0;
    const double log1m_diff =
        params.p_diffusion < 1.0 ? std::log1p(-params.p_diffusion) : 0.0;

    record_trajectory(trajectory, 0, places, &sets);

    // per-step scratch
    std::vector<std::uint32_t> transferable;
    std::vector<std::vector<std::uint32_t>> acquired(n);

    int step = 0;
    Termination termination = Termination::max_steps;
    while (step < params.max_steps) {
        ++step;

        // 1. growth, synchronous over places
        for (Place& p : places)
            p.population = growth_step(p.population, p.resource, params.growth_rate);

        for (auto& a : acquired) a.clear();

        // 2. diffusion over ordered pairs, against start-of-phase sets.
        // Per transferable innovation the transfer is Bernoulli(prob) with
        // prob = 1 - (1 - p)^m. Drawing that per innovation is wasteful, so
        // each pair runs a coupled three-stage draw over k_up >= k
        // exchangeable slots (k_up bounds the transferable count from the
        // O(1) per-place counters): one gate draw decides whether any slot
        // succeeds, a conditional binomial picks how many, a hypergeometric
        // thinning maps them onto the k real innovations. The resulting
        // transfer set is distributed exactly as the per-innovation draws.
        if (created_total > 0 && params.p_diffusion > 0.0) {
            const std::size_t active_words = created_total / 64 + 1;
            const int all = static_cast<int>(created_total);
            for (std::size_t i = 0; i < n; ++i) {
                const int count_i = sets.count(i);
                if (count_i == 0) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const int count_j = sets.count(j);
                    if (count_j == all) continue; // target already holds everything
                    if (params.knn > 0 && !linked[i * n + j]) continue;
                    const double effective_pairs =
                        places[i].population * places[j].population /
                        deterrence[i * n + j];
                    if (effective_pairs <= 0.0) continue;
                    const int k_up = std::min(count_i, all - count_j);
                    double p_any = 1.0;
                    double prob = 1.0;
                    if (params.p_diffusion < 1.0) {
                        p_any = -std::expm1(static_cast<double>(k_up) *
                                            effective_pairs * log1m_diff);
                        if (!(p_any > 0.0)) continue;
                    }
                    if (uniform(rng) >= p_any) continue;
                    // rare path: something succeeded among the k_up slots
                    sets.transferable(i, j, active_words, transferable);
                    const auto k = static_cast<int>(transferable.size());
                    if (params.p_diffusion < 1.0)
                        prob = -std::expm1(effective_pairs * log1m_diff);
                    int c_up = k_up;
                    if (prob < 1.0) {
                        // inverse-CDF walk of Binomial(k_up, prob | >= 1)
                        c_up = 1;
                        double pmf = static_cast<double>(k_up) * prob *
                                     std::exp(static_cast<double>(k_up - 1) *
                                              std::log1p(-prob)) /
                                     p_any;
                        double u = uniform(rng);
                        while (u > pmf && c_up < k_up) {
                            u -= pmf;
                            pmf *= (static_cast<double>(k_up - c_up) /
                                    static_cast<double>(c_up + 1)) *
                                   (prob / (1.0 - prob));
                            ++c_up;
                        }
                    }
                    // how many successes fall on real innovations (the first
                    // k of the k_up exchangeable slots)
                    int hits = 0;
                    if (k == k_up) {
                        hits = c_up;
                    } else {
                        int real_left = k;
                        for (int t = 0; t < c_up && real_left > 0; ++t) {
                            std::uniform_int_distribution<int> slot(0, k_up - 1 - t);
                            if (slot(rng) < real_left) {
                                ++hits;
                                --real_left;
                            }
                        }
                    }
                    if (hits <= 0) continue;
                    if (hits >= k) {
                        for (const std::uint32_t id : transferable)
                            acquired[j].push_back(id);
                    } else {
                        for (int t = 0; t < hits; ++t) {
                            std::uniform_int_distribution<int> pick(t, k - 1);
                            std::swap(transferable[static_cast<std::size_t>(t)],
                                      transferable[static_cast<std::size_t>(pick(rng))]);
                            acquired[j].push_back(
                                transferable[static_cast<std::size_t>(t)]);
                        }
                    }
                }
            }
        }

        // 3. creation, one innovation event per place at most
        if (params.p_creation > 0.0 &&
            created_total < static_cast<std::uint32_t>(params.max_innovations)) {
            for (std::size_t i = 0; i < n; ++i) {
                if (created_total >= static_cast<std::uint32_t>(params.max_innovations))
                    break;
                const double prob =
                    creation_probability(places[i].population, params.p_creation);
                if (prob <= 0.0) continue;
                if (uniform(rng) < prob)
                    acquired[i].push_back(created_total++);
            }
        }

        // 4. resource impact of everything acquired this step
        for (std::size_t i = 0; i < n; ++i) {
            auto& got = acquired[i];
            if (got.empty()) continue;
            std::sort(got.begin(), got.end());
            got.erase(std::unique(got.begin(), got.end()), got.end());
            for (const std::uint32_t id : got) {
                sets.insert(i, id);
                places[i].resource = apply_innovation(
                    places[i].resource, params.innovation_impact, params.r_max);
            }
        }

        record_trajectory(trajectory, step, places, &sets);

        if (created_total >= static_cast<std::uint32_t>(params.max_innovations)) {
            termination = Termination::max_innovations;
            break;
        }
    }

    Outcome outcome;
    outcome.duration = step;
    outcome.n_innovations = static_cast<int>(created_total);
    outcome.termination = termination;
    outcome.final_places = std::move(places);
    for (std::size_t i = 0; i < n; ++i)
        outcome.final_places[i].innovations = sets.to_sorted_ids(i);
    return outcome;
}

double rank_size_slope(const std::vector<double>& populations) {
    if (populations.size() < 2)
        throw std::invalid_argument("rank_size_slope: need at least 2 values");
    for (const double p : populations)
        if (!(p > 0.0))
            throw std::invalid_argument("rank_size_slope: values must be positive");

    std::vector<double> sorted(populations);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    const std::size_t n = sorted.size();
    double mean_x = 0.0, mean_y = 0.0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::log(static_cast<double>(i + 1));
        ys[i] = std::log(sorted[i]);
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    }
    return sxy / sxx;
}

std::vector<Place> load_places_csv(const std::string& path) {
    const auto rows = read_csv_file(path);
    if (rows.empty())
        throw std::runtime_error("load_places_csv: empty file '" + path + "'");
    const std::vector<std::string> header = {"id", "x", "y", "population", "resource"};
    if (rows[0] != header)
        throw std::runtime_error("load_places_csv: expected header id,x,y,population,resource in '" + path + "'");
    std::vector<Place> places;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw std::runtime_error("load_places_csv: bad row in '" + path + "'");
        Place p;
        p.id = std::stoi(rows[r][0]);
        p.x = std::stod(rows[r][1]);
        p.y = std::stod(rows[r][2]);
        p.population = std::stod(rows[r][3]);
        p.resource = std::stod(rows[r][4]);
        places.push_back(p);
    }
    return places;
}

} // namespace molelab::simpoplocal
