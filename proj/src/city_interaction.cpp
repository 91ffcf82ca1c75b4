#include "molelab/city_interaction.hpp"

#include "molelab/csv.hpp"
#include "molelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

namespace molelab::cityinter {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Adjacency {
    // per city: (neighbour, link index)
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges;

    Adjacency(const CitySystem& state) : edges(state.cities.size()) {
        for (std::size_t l = 0; l < state.links.size(); ++l) {
            const Link& link = state.links[l];
            edges[static_cast<std::size_t>(link.a)].emplace_back(
                static_cast<std::size_t>(link.b), l);
            edges[static_cast<std::size_t>(link.b)].emplace_back(
                static_cast<std::size_t>(link.a), l);
        }
    }
};

/// Dijkstra with deterministic tie-breaking: on equal distance the
/// predecessor with the smaller index wins.
void shortest_paths(const CitySystem& state, const Adjacency& adj,
                    const std::vector<double>& weights, std::size_t source,
                    std::vector<double>& dist, std::vector<std::size_t>& pred,
                    std::vector<std::size_t>& pred_link) {
    const std::size_t n = state.cities.size();
    dist.assign(n, kInf);
    pred.assign(n, n);
    pred_link.assign(n, state.links.size());
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, l] : adj.edges[u]) {
            const double cand = d + weights[l];
            if (cand < dist[v] || (cand == dist[v] && u < pred[v])) {
                dist[v] = cand;
                pred[v] = u;
                pred_link[v] = l;
                queue.emplace(cand, v);
            }
        }
    }
}

std::vector<double> link_lengths(const CitySystem& state) {
    std::vector<double> w(state.links.size());
    for (std::size_t l = 0; l < state.links.size(); ++l) w[l] = state.links[l].length;
    return w;
}

std::vector<double> effective_lengths(const CitySystem& state) {
    std::vector<double> w(state.links.size());
    for (std::size_t l = 0; l < state.links.size(); ++l)
        w[l] = state.links[l].length / state.links[l].capacity;
    return w;
}

} // namespace

void CitySystem::validate() const {
    const std::size_t n = cities.size();
    if (n < 2) throw std::invalid_argument("CitySystem: need at least 2 cities");
    for (const City& c : cities)
        if (!(c.population > 0.0))
            throw std::invalid_argument("CitySystem: populations must be positive");
    for (const Link& l : links) {
        if (l.a < 0 || l.b < 0 || static_cast<std::size_t>(l.a) >= n ||
            static_cast<std::size_t>(l.b) >= n || l.a == l.b)
            throw std::invalid_argument("CitySystem: link endpoints invalid");
        if (!(l.capacity > 0.0) || !(l.length > 0.0))
            throw std::invalid_argument("CitySystem: link capacity and length must be positive");
    }
    // connectivity
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    Adjacency adj(*this);
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (const auto& [v, l] : adj.edges[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i]) throw std::invalid_argument("CitySystem: disconnected network");
}

namespace {

struct RateInputs {
    FlowSummary flows;
    std::vector<double> gravity; ///< per city: sum of its pairwise flows
};

RateInputs compute_rate_inputs(const CitySystem& state, double d_gravity) {
    if (!(d_gravity > 0.0))
        throw std::invalid_argument("gravity_flows: d_gravity must be positive");
    const std::size_t n = state.cities.size();
    RateInputs out;
    out.flows.through_flow.assign(n, 0.0);
    out.flows.link_flow.assign(state.links.size(), 0.0);
    out.gravity.assign(n, 0.0);

    double total_population = 0.0;
    for (const City& c : state.cities) total_population += c.population;
    const double norm = total_population * total_population;

    Adjacency adj(state);
    const auto weights = link_lengths(state);
    std::vector<double> dist;
    std::vector<std::size_t> pred, pred_link;

    for (std::size_t i = 0; i < n; ++i) {
        shortest_paths(state, adj, weights, i, dist, pred, pred_link);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dist[j] == kInf)
                throw std::invalid_argument("gravity_flows: disconnected network");
            const double flow = state.cities[i].population *
                                state.cities[j].population / norm *
                                std::exp(-dist[j] / d_gravity);
            out.flows.total_flow += flow;
            out.gravity[i] += flow;
            out.gravity[j] += flow;
            // walk the path back from j to i
            std::size_t v = j;
            while (v != i) {
                out.flows.link_flow[pred_link[v]] += flow;
                const std::size_t u = pred[v];
                if (u != i) out.flows.through_flow[u] += flow;
                v = u;
            }
        }
    }
    return out;
}

std::vector<double> combine_rates(const CitySystem& state,
                                  const InteractionParams& params,
                                  const RateInputs& inputs) {
    const std::size_t n = state.cities.size();
    std::vector<double> rates(n, params.r0);
    for (std::size_t i = 0; i < n; ++i) {
        if (params.w_gravity != 0.0)
            rates[i] += params.w_gravity * inputs.gravity[i] / state.cities[i].population;
        if (params.w_network != 0.0 && inputs.flows.total_flow > 0.0)
            rates[i] += params.w_network * inputs.flows.through_flow[i] /
                        inputs.flows.total_flow;
    }
    return rates;
}

} // namespace

FlowSummary gravity_flows(const CitySystem& state, double d_gravity) {
    return compute_rate_inputs(state, d_gravity).flows;
}

NetworkIndicators network_indicators(const CitySystem& state, double d_gravity) {
    if (!(d_gravity > 0.0))
        throw std::invalid_argument("network_indicators: d_gravity must be positive");
    const std::size_t n = state.cities.size();
    NetworkIndicators out;
    out.closeness.assign(n, 0.0);
    out.accessibility.assign(n, 0.0);

    Adjacency adj(state);
    const auto weights = effective_lengths(state);
    std::vector<double> dist;
    std::vector<std::size_t> pred, pred_link;
    for (std::size_t i = 0; i < n; ++i) {
        shortest_paths(state, adj, weights, i, dist, pred, pred_link);
        double sum_dist = 0.0;
        double access = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (dist[j] == kInf)
                throw std::invalid_argument("network_indicators: disconnected network");
            if (j != i) sum_dist += dist[j];
            access += state.cities[j].population * std::exp(-dist[j] / d_gravity);
        }
        out.closeness[i] =
            sum_dist > 0.0 ? static_cast<double>(n - 1) / sum_dist : 0.0;
        out.accessibility[i] = access;
    }
    return out;
}

std::vector<double> growth_rates(const CitySystem& state,
                                 const InteractionParams& params) {
    state.validate();
    if (!(params.d_gravity > 0.0))
        throw std::invalid_argument("growth_rates: d_gravity must be positive");
    const RateInputs inputs = compute_rate_inputs(state, params.d_gravity);
    return combine_rates(state, params, inputs);
}

SystemTrajectory simulate(CitySystem state, const InteractionParams& params) {
    state.validate();
    if (params.steps < 1)
        throw std::invalid_argument("simulate: steps must be >= 1");
    if (params.capacity_rate < 0.0)
        throw std::invalid_argument("simulate: capacity_rate must be >= 0");

    const std::size_t n = state.cities.size();
    double initial_total = 0.0;
    for (const City& c : state.cities) initial_total += c.population;
    const double guard = 1e12 * initial_total;

    SystemTrajectory trajectory;
    trajectory.n_cities = n;
    trajectory.population.reserve(static_cast<std::size_t>(params.steps));
    trajectory.closeness.reserve(static_cast<std::size_t>(params.steps));
    trajectory.accessibility.reserve(static_cast<std::size_t>(params.steps));

    const double mean_share =
        state.links.empty() ? 0.0 : 1.0 / static_cast<double>(state.links.size());

    for (int step = 0; step < params.steps; ++step) {
        const RateInputs inputs = compute_rate_inputs(state, params.d_gravity);
        const FlowSummary& flows = inputs.flows;
        const auto rates = combine_rates(state, params, inputs);

        std::vector<double> row(n);
        for (std::size_t i = 0; i < n; ++i) {
            double p = state.cities[i].population * (1.0 + rates[i]);
            if (!std::isfinite(p) || p <= 0.0 || p > guard)
                throw std::runtime_error(
                    "simulate: population of city " +
                    std::to_string(state.cities[i].id) + " left (0, 1e12 x initial total) at step " +
                    std::to_string(step + 1));
            state.cities[i].population = p;
            row[i] = p;
        }

        if (params.capacity_rate > 0.0 && flows.total_flow > 0.0) {
            for (std::size_t l = 0; l < state.links.size(); ++l) {
                const double share = flows.link_flow[l] / flows.total_flow;
                double c = state.links[l].capacity *
                           (1.0 + params.capacity_rate * (share - mean_share));
                state.links[l].capacity = std::max(c, 1e-9);
            }
        }

        const NetworkIndicators indicators =
            network_indicators(state, params.d_gravity);
        trajectory.population.push_back(std::move(row));
        trajectory.closeness.push_back(indicators.closeness);
        trajectory.accessibility.push_back(indicators.accessibility);
    }
    return trajectory;
}

namespace {

void check_dimensions(const std::vector<std::vector<double>>& a,
                      const std::vector<std::vector<double>>& b,
                      const char* where) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
    for (std::size_t t = 0; t < a.size(); ++t)
        if (a[t].size() != b[t].size() || a[t].empty())
            throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

} // namespace

double mse_population(const std::vector<std::vector<double>>& simulated,
                      const std::vector<std::vector<double>>& observed) {
    check_dimensions(simulated, observed, "mse_population");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < simulated.size(); ++t) {
        for (std::size_t i = 0; i < simulated[t].size(); ++i) {
            const double err = simulated[t][i] - observed[t][i];
            sum += err * err;
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

double mse_log_population(const std::vector<std::vector<double>>& simulated,
                          const std::vector<std::vector<double>>& observed) {
    check_dimensions(simulated, observed, "mse_log_population");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < simulated.size(); ++t) {
        for (std::size_t i = 0; i < simulated[t].size(); ++i) {
            if (!(simulated[t][i] > 0.0) || !(observed[t][i] > 0.0))
                throw std::invalid_argument("mse_log_population: values must be positive");
            const double err = std::log(simulated[t][i]) - std::log(observed[t][i]);
            sum += err * err;
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

CitySystem make_synthetic_system(std::size_t n_cities, std::uint64_t seed,
                                 std::size_t extra_links) {
    if (n_cities < 2)
        throw std::invalid_argument("make_synthetic_system: need at least 2 cities");
    auto rng = make_engine(derive_seed(seed, 0xC17135));
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::normal_distribution<double> log_pop(std::log(100.0), 1.0);

    CitySystem system;
    system.cities.resize(n_cities);
    for (std::size_t i = 0; i < n_cities; ++i) {
        City& c = system.cities[i];
        c.id = static_cast<int>(i);
        c.x = coord(rng);
        c.y = coord(rng);
        c.population = std::exp(log_pop(rng));
    }

    auto distance = [&](std::size_t i, std::size_t j) {
        const double dx = system.cities[i].x - system.cities[j].x;
        const double dy = system.cities[i].y - system.cities[j].y;
        return std::sqrt(dx * dx + dy * dy);
    };

    // Euclidean minimum spanning tree (Prim)
    std::vector<char> in_tree(n_cities, 0);
    std::vector<double> best(n_cities, kInf);
    std::vector<std::size_t> best_from(n_cities, 0);
    in_tree[0] = 1;
    for (std::size_t j = 1; j < n_cities; ++j) {
        best[j] = distance(0, j);
        best_from[j] = 0;
    }
    std::vector<std::pair<std::size_t, std::size_t>> tree_edges;
    for (std::size_t added = 1; added < n_cities; ++added) {
        std::size_t pick = n_cities;
        for (std::size_t j = 0; j < n_cities; ++j)
            if (!in_tree[j] && (pick == n_cities || best[j] < best[pick])) pick = j;
        in_tree[pick] = 1;
        tree_edges.emplace_back(best_from[pick], pick);
        for (std::size_t j = 0; j < n_cities; ++j) {
            if (in_tree[j]) continue;
            const double d = distance(pick, j);
            if (d < best[j]) {
                best[j] = d;
                best_from[j] = pick;
            }
        }
    }
    auto add_link = [&](std::size_t i, std::size_t j) {
        for (const Link& l : system.links) {
            const auto a = static_cast<std::size_t>(l.a);
            const auto b = static_cast<std::size_t>(l.b);
            if ((a == i && b == j) || (a == j && b == i)) return false;
        }
        Link link;
        link.a = static_cast<int>(std::min(i, j));
        link.b = static_cast<int>(std::max(i, j));
        link.length = std::max(distance(i, j), 1e-9);
        link.capacity = 1.0;
        system.links.push_back(link);
        return true;
    };
    for (const auto& [i, j] : tree_edges) add_link(i, j);

    // extra nearest-neighbour shortcuts, deterministic order
    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t i = 0; i < n_cities; ++i)
        for (std::size_t j = i + 1; j < n_cities; ++j)
            candidates.emplace_back(distance(i, j), i, j);
    std::sort(candidates.begin(), candidates.end());
    std::size_t added = 0;
    for (const auto& [d, i, j] : candidates) {
        if (added >= extra_links) break;
        if (add_link(i, j)) ++added;
    }

    system.validate();
    return system;
}

ObservedSystem load_system_csv(const std::string& cities_path,
                               const std::string& network_path) {
    const auto city_rows = read_csv_file(cities_path);
    if (city_rows.size() < 2)
        throw std::runtime_error("load_system_csv: no city rows in '" + cities_path + "'");
    const auto& header = city_rows[0];
    if (header.size() < 4 || header[0] != "city_id" || header[1] != "x" ||
        header[2] != "y" || header[3] != "pop_t0")
        throw std::runtime_error(
            "load_system_csv: expected header city_id,x,y,pop_t0[,pop_t1,...] in '" +
            cities_path + "'");
    const std::size_t n_times = header.size() - 3;

    ObservedSystem out;
    out.observed.assign(n_times, {});
    for (std::size_t r = 1; r < city_rows.size(); ++r) {
        const auto& row = city_rows[r];
        if (row.size() != header.size())
            throw std::runtime_error("load_system_csv: bad city row in '" + cities_path + "'");
        City c;
        c.id = std::stoi(row[0]);
        c.x = std::stod(row[1]);
        c.y = std::stod(row[2]);
        c.population = std::stod(row[3]);
        out.system.cities.push_back(c);
        for (std::size_t t = 0; t < n_times; ++t)
            out.observed[t].push_back(std::stod(row[3 + t]));
    }

    const auto net_rows = read_csv_file(network_path);
    if (net_rows.empty() ||
        net_rows[0] != std::vector<std::string>{"i", "j", "length", "capacity"})
        throw std::runtime_error(
            "load_system_csv: expected header i,j,length,capacity in '" + network_path + "'");
    for (std::size_t r = 1; r < net_rows.size(); ++r) {
        const auto& row = net_rows[r];
        if (row.size() != 4)
            throw std::runtime_error("load_system_csv: bad network row in '" + network_path + "'");
        Link l;
        l.a = std::stoi(row[0]);
        l.b = std::stoi(row[1]);
        l.length = std::stod(row[2]);
        l.capacity = std::stod(row[3]);
        out.system.links.push_back(l);
    }
    out.system.validate();
    return out;
}

} // namespace molelab::cityinter
