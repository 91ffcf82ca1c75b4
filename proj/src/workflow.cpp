#include "molelab/workflow.hpp"

#include "molelab/csv.hpp"
#include "molelab/objectives.hpp"
#include "molelab/profile.hpp"
#include "molelab/regimes.hpp"
#include "molelab/rng.hpp"
#include "molelab/sampling.hpp"
#include "molelab/version.hpp"
#include "molelab/worker_pool.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace molelab {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(ModelKind model) {
    switch (model) {
    case ModelKind::simpoplocal: return "simpoplocal";
    case ModelKind::city_interaction: return "city_interaction";
    }
    return "?";
}

const char* to_string(MethodKind method) {
    switch (method) {
    case MethodKind::sample_lhs: return "sample_lhs";
    case MethodKind::sample_grid: return "sample_grid";
    case MethodKind::calibrate: return "calibrate";
    case MethodKind::profile: return "profile";
    case MethodKind::pse: return "pse";
    case MethodKind::regimes: return "regimes";
    }
    return "?";
}

namespace {

constexpr const char* kMethodNames =
    "sample_lhs, sample_grid, calibrate, profile, pse, regimes";

// canonical genome layouts
const std::vector<std::string> kSimpopLocalGenome = {
    "p_creation", "p_diffusion", "distance_decay", "innovation_impact", "r_max"};
const std::vector<std::string> kCityGenome = {
    "r0", "w_gravity", "d_gravity", "w_network", "capacity_rate"};

// --- strict JSON access -------------------------------------------------------

std::string join_key(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void check_allowed(const json& obj, const std::string& path,
                   std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) known = true;
        if (!known) throw ConfigError(join_key(path, item.key()), "unknown key");
    }
}

const json* find(const json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    const json* j = find(obj, key);
    if (!j) {
        if (fallback) return *fallback;
        throw ConfigError(join_key(path, key), "required");
    }
    if (!j->is_number()) throw ConfigError(join_key(path, key), "expected a number");
    return j->get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& path,
                         const std::string& key,
                         std::optional<std::int64_t> fallback = std::nullopt) {
    const json* j = find(obj, key);
    if (!j) {
        if (fallback) return *fallback;
        throw ConfigError(join_key(path, key), "required");
    }
    if (!j->is_number_integer())
        throw ConfigError(join_key(path, key), "expected an integer");
    return j->get<std::int64_t>();
}

std::string get_string(const json& obj, const std::string& path,
                       const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
    const json* j = find(obj, key);
    if (!j) {
        if (fallback) return *fallback;
        throw ConfigError(join_key(path, key), "required");
    }
    if (!j->is_string()) throw ConfigError(join_key(path, key), "expected a string");
    return j->get<std::string>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key,
              bool fallback) {
    const json* j = find(obj, key);
    if (!j) return fallback;
    if (!j->is_boolean()) throw ConfigError(join_key(path, key), "expected a boolean");
    return j->get<bool>();
}

// --- section parsers ----------------------------------------------------------

ParameterSpace parse_parameters(const json& root) {
    const json* params = find(root, "parameters");
    if (!params) throw ConfigError("parameters", "required");
    if (!params->is_array() || params->empty())
        throw ConfigError("parameters", "expected a non-empty array");
    std::vector<ParameterSpec> specs;
    for (std::size_t i = 0; i < params->size(); ++i) {
        const std::string path = "parameters[" + std::to_string(i) + "]";
        const json& p = (*params)[i];
        require_object(p, path);
        check_allowed(p, path, {"name", "lower", "upper", "scale"});
        ParameterSpec spec;
        spec.name = get_string(p, path, "name");
        spec.lower = get_number(p, path, "lower");
        spec.upper = get_number(p, path, "upper");
        const std::string scale = get_string(p, path, "scale", std::string("linear"));
        if (scale == "linear") {
            spec.scale = Scale::linear;
        } else if (scale == "log" || scale == "logarithmic") {
            spec.scale = Scale::logarithmic;
        } else {
            throw ConfigError(path + ".scale", "expected 'linear' or 'log', got '" + scale + "'");
        }
        if (!(spec.lower < spec.upper))
            throw ConfigError(path, "parameter '" + spec.name + "' needs lower < upper");
        if (spec.scale == Scale::logarithmic && !(spec.lower > 0.0))
            throw ConfigError(path, "logarithmic parameter '" + spec.name + "' needs lower > 0");
        specs.push_back(std::move(spec));
    }
    try {
        return ParameterSpace(std::move(specs));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("parameters", e.what());
    }
}

void require_genome_layout(const ParameterSpace& space,
                           const std::vector<std::string>& expected) {
    const auto names = space.names();
    if (names != expected) {
        std::string want;
        for (const auto& n : expected) {
            if (!want.empty()) want += ", ";
            want += n;
        }
        throw ConfigError("parameters", "expected the genome layout (" + want + ") in order");
    }
}

SimpopLocalSettings parse_simpoplocal_settings(const json* section) {
    SimpopLocalSettings out;
    if (!section) return out;
    const std::string path = "model_settings";
    require_object(*section, path);
    check_allowed(*section, path,
                  {"n_places", "growth_rate", "max_steps", "max_innovations", "knn",
                   "init", "initial_state_csv"});
    simpoplocal::Params& c = out.context;
    c.n_places = static_cast<int>(get_integer(*section, path, "n_places", c.n_places));
    c.growth_rate = get_number(*section, path, "growth_rate", c.growth_rate);
    c.max_steps = static_cast<int>(get_integer(*section, path, "max_steps", c.max_steps));
    c.max_innovations =
        static_cast<int>(get_integer(*section, path, "max_innovations", c.max_innovations));
    c.knn = static_cast<int>(get_integer(*section, path, "knn", c.knn));
    if (const json* init = find(*section, "init")) {
        const std::string init_path = path + ".init";
        require_object(*init, init_path);
        check_allowed(*init, init_path,
                      {"largest_population", "population_min", "population_max", "resource"});
        c.init.largest_population =
            get_number(*init, init_path, "largest_population", c.init.largest_population);
        c.init.population_min =
            get_number(*init, init_path, "population_min", c.init.population_min);
        c.init.population_max =
            get_number(*init, init_path, "population_max", c.init.population_max);
        c.init.resource = get_number(*init, init_path, "resource", c.init.resource);
    }
    out.initial_state_csv = get_string(*section, path, "initial_state_csv", std::string());
    if (c.n_places < 2) throw ConfigError(path + ".n_places", "must be >= 2");
    if (c.max_steps < 1) throw ConfigError(path + ".max_steps", "must be >= 1");
    if (c.max_innovations < 1) throw ConfigError(path + ".max_innovations", "must be >= 1");
    if (c.knn < 0) throw ConfigError(path + ".knn", "must be >= 0");
    return out;
}

CityModelSettings parse_city_settings(const json* section) {
    CityModelSettings out;
    if (!section) return out;
    const std::string path = "model_settings";
    require_object(*section, path);
    check_allowed(*section, path,
                  {"steps", "synthetic_cities", "extra_links", "cities_csv", "network_csv"});
    out.steps = static_cast<int>(get_integer(*section, path, "steps", out.steps));
    out.synthetic_cities = static_cast<std::size_t>(get_integer(
        *section, path, "synthetic_cities", static_cast<std::int64_t>(out.synthetic_cities)));
    out.extra_links = static_cast<std::size_t>(get_integer(
        *section, path, "extra_links", static_cast<std::int64_t>(out.extra_links)));
    out.cities_csv = get_string(*section, path, "cities_csv", std::string());
    out.network_csv = get_string(*section, path, "network_csv", std::string());
    if (out.steps < 1) throw ConfigError(path + ".steps", "must be >= 1");
    return out;
}

std::vector<GridDim> parse_grid(const json& obj, const std::string& path) {
    if (!obj.is_array() || obj.empty())
        throw ConfigError(path, "expected a non-empty array of grid dimensions");
    std::vector<GridDim> dims;
    for (std::size_t i = 0; i < obj.size(); ++i) {
        const std::string dim_path = path + "[" + std::to_string(i) + "]";
        const json& d = obj[i];
        require_object(d, dim_path);
        check_allowed(d, dim_path, {"lower", "upper", "bins"});
        GridDim dim;
        dim.lower = get_number(d, dim_path, "lower");
        dim.upper = get_number(d, dim_path, "upper");
        dim.n_bins = static_cast<std::size_t>(get_integer(d, dim_path, "bins"));
        if (!(dim.lower < dim.upper)) throw ConfigError(dim_path, "needs lower < upper");
        if (dim.n_bins < 1) throw ConfigError(dim_path + ".bins", "must be >= 1");
        dims.push_back(dim);
    }
    return dims;
}

} // namespace

WorkflowConfig parse_workflow_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    require_object(root, "");
    check_allowed(root, "",
                  {"model", "method", "seed", "replications", "workers", "output_dir",
                   "parameters", "model_settings", "method_settings"});

    WorkflowConfig config;

    const std::string model = get_string(root, "", "model");
    if (model == "simpoplocal") {
        config.model = ModelKind::simpoplocal;
    } else if (model == "city_interaction") {
        config.model = ModelKind::city_interaction;
    } else {
        throw ConfigError("model",
                          "unknown value '" + model +
                              "' (valid: simpoplocal, city_interaction)");
    }

    const std::string method = get_string(root, "", "method");
    if (method == "sample_lhs") {
        config.method = MethodKind::sample_lhs;
    } else if (method == "sample_grid") {
        config.method = MethodKind::sample_grid;
    } else if (method == "calibrate") {
        config.method = MethodKind::calibrate;
    } else if (method == "profile") {
        config.method = MethodKind::profile;
    } else if (method == "pse") {
        config.method = MethodKind::pse;
    } else if (method == "regimes") {
        config.method = MethodKind::regimes;
    } else {
        throw ConfigError("method", "unknown value '" + method + "' (valid: " +
                                        kMethodNames + ")");
    }

    {
        const json* seed = find(root, "seed");
        if (!seed) throw ConfigError("seed", "required (runs must be reproducible)");
        if (!seed->is_number_integer() || seed->get<std::int64_t>() < 0)
            throw ConfigError("seed", "expected a non-negative integer");
        config.seed = seed->get<std::uint64_t>();
    }

    const std::int64_t replications = get_integer(root, "", "replications", 100);
    if (replications < 1) throw ConfigError("replications", "must be >= 1");
    config.replications = static_cast<int>(replications);

    const std::int64_t workers = get_integer(root, "", "workers", 0);
    if (workers < 0) throw ConfigError("workers", "must be >= 0 (0 = machine parallelism)");
    config.workers = static_cast<unsigned>(workers);

    config.output_dir = get_string(root, "", "output_dir", std::string("molelab_out"));
    config.space = parse_parameters(root);

    // model settings + genome layout
    const json* model_section = find(root, "model_settings");
    if (config.model == ModelKind::simpoplocal) {
        require_genome_layout(config.space, kSimpopLocalGenome);
        auto settings = parse_simpoplocal_settings(model_section);
        const ParameterSpec& p_creation = config.space.spec(0);
        const ParameterSpec& p_diffusion = config.space.spec(1);
        if (p_creation.lower < 0.0 || p_creation.upper > 1.0)
            throw ConfigError("parameters[0]", "p_creation bounds must lie in [0,1]");
        if (p_diffusion.lower < 0.0 || p_diffusion.upper > 1.0)
            throw ConfigError("parameters[1]", "p_diffusion bounds must lie in [0,1]");
        if (config.space.spec(2).lower < 0.0)
            throw ConfigError("parameters[2]", "distance_decay must be >= 0");
        if (config.space.spec(3).lower < 0.0)
            throw ConfigError("parameters[3]", "innovation_impact must be >= 0");
        if (!(config.space.spec(4).lower > 0.0))
            throw ConfigError("parameters[4]", "r_max must be positive");
        if (settings.initial_state_csv.empty() &&
            config.space.spec(4).lower < settings.context.init.resource)
            throw ConfigError("parameters[4]",
                              "r_max lower bound must cover the initial resource (" +
                                  format_double(settings.context.init.resource) + ")");
        config.model_settings = std::move(settings);
    } else {
        require_genome_layout(config.space, kCityGenome);
        if (!(config.space.spec(2).lower > 0.0))
            throw ConfigError("parameters[2]", "d_gravity must be positive");
        if (config.space.spec(4).lower < 0.0)
            throw ConfigError("parameters[4]", "capacity_rate must be >= 0");
        auto settings = parse_city_settings(model_section);
        if (settings.synthetic_cities == 0 && settings.cities_csv.empty())
            throw ConfigError("model_settings",
                              "city_interaction needs synthetic_cities > 0 or cities_csv/network_csv");
        if (!settings.cities_csv.empty() && settings.network_csv.empty())
            throw ConfigError("model_settings.network_csv", "required together with cities_csv");
        config.model_settings = std::move(settings);
    }

    // method settings
    const json* section = find(root, "method_settings");
    const std::string path = "method_settings";
    if (section) require_object(*section, path);
    const json empty = json::object();
    const json& ms = section ? *section : empty;

    switch (config.method) {
    case MethodKind::sample_lhs: {
        check_allowed(ms, path, {"n", "centered", "dump_trajectories"});
        SampleSettings s;
        const std::int64_t n = get_integer(ms, path, "n", 100);
        if (n < 1) throw ConfigError(path + ".n", "must be >= 1");
        s.n = static_cast<std::size_t>(n);
        s.centered = get_bool(ms, path, "centered", false);
        s.dump_trajectories = get_bool(ms, path, "dump_trajectories", false);
        if (config.model == ModelKind::city_interaction &&
            std::get<CityModelSettings>(config.model_settings).cities_csv.empty())
            throw ConfigError("model_settings.cities_csv",
                              "sampling on city_interaction needs observed data");
        config.method_settings = s;
        break;
    }
    case MethodKind::sample_grid: {
        check_allowed(ms, path, {"levels", "dump_trajectories"});
        SampleSettings s;
        const json* levels = find(ms, "levels");
        if (!levels) throw ConfigError(path + ".levels", "required");
        if (!levels->is_array() || levels->size() != config.space.dimension())
            throw ConfigError(path + ".levels", "expected one level count per parameter");
        for (const auto& l : *levels) {
            if (!l.is_number_integer() || l.get<std::int64_t>() < 1)
                throw ConfigError(path + ".levels", "level counts must be integers >= 1");
            s.levels.push_back(static_cast<std::size_t>(l.get<std::int64_t>()));
        }
        s.dump_trajectories = get_bool(ms, path, "dump_trajectories", false);
        if (config.model == ModelKind::city_interaction &&
            std::get<CityModelSettings>(config.model_settings).cities_csv.empty())
            throw ConfigError("model_settings.cities_csv",
                              "sampling on city_interaction needs observed data");
        config.method_settings = s;
        break;
    }
    case MethodKind::calibrate: {
        check_allowed(ms, path,
                      {"population_size", "max_evaluations", "crossover_rate",
                       "mutation_rate", "islands", "resume_checkpoint", "window_length",
                       "window_stride"});
        CalibrateSettings s;
        const std::int64_t pop = get_integer(ms, path, "population_size", 100);
        if (pop < 4 || pop % 2 != 0)
            throw ConfigError(path + ".population_size", "must be >= 4 and even");
        s.population_size = static_cast<std::size_t>(pop);
        const std::int64_t budget = get_integer(ms, path, "max_evaluations", 5000);
        if (budget < pop)
            throw ConfigError(path + ".max_evaluations", "must be >= population_size");
        s.max_evaluations = static_cast<std::size_t>(budget);
        s.crossover_rate = get_number(ms, path, "crossover_rate", 0.9);
        if (s.crossover_rate < 0.0 || s.crossover_rate > 1.0)
            throw ConfigError(path + ".crossover_rate", "must lie in [0,1]");
        s.mutation_rate = get_number(ms, path, "mutation_rate", -1.0);
        if (s.mutation_rate > 1.0)
            throw ConfigError(path + ".mutation_rate", "must lie in [0,1] (or negative for 1/dimension)");
        if (const json* islands = find(ms, "islands")) {
            const std::string island_path = path + ".islands";
            require_object(*islands, island_path);
            check_allowed(*islands, island_path,
                          {"n_islands", "island_generations", "epochs"});
            IslandSettings is;
            const std::int64_t n_islands = get_integer(*islands, island_path, "n_islands", 4);
            if (n_islands < 1) throw ConfigError(island_path + ".n_islands", "must be >= 1");
            is.n_islands = static_cast<std::size_t>(n_islands);
            const std::int64_t gens =
                get_integer(*islands, island_path, "island_generations", 10);
            if (gens < 1) throw ConfigError(island_path + ".island_generations", "must be >= 1");
            is.island_generations = static_cast<std::size_t>(gens);
            const std::int64_t epochs = get_integer(*islands, island_path, "epochs", 4);
            if (epochs < 1) throw ConfigError(island_path + ".epochs", "must be >= 1");
            is.epochs = static_cast<std::size_t>(epochs);
            s.islands = is;
        }
        s.resume_checkpoint = get_string(ms, path, "resume_checkpoint", std::string());
        if (!s.resume_checkpoint.empty() && !s.islands)
            throw ConfigError(path + ".resume_checkpoint", "only meaningful with islands");
        if (const json* window = find(ms, "window_length")) {
            if (!window->is_number_integer() || window->get<std::int64_t>() < 1)
                throw ConfigError(path + ".window_length", "expected an integer >= 1");
            s.window_length = static_cast<std::size_t>(window->get<std::int64_t>());
            if (config.model != ModelKind::city_interaction)
                throw ConfigError(path + ".window_length",
                                  "windowed calibration applies to city_interaction only");
        }
        const std::int64_t stride = get_integer(ms, path, "window_stride", 1);
        if (stride < 1) throw ConfigError(path + ".window_stride", "must be >= 1");
        s.window_stride = static_cast<std::size_t>(stride);
        if (config.model == ModelKind::city_interaction) {
            const auto& city = std::get<CityModelSettings>(config.model_settings);
            if (city.cities_csv.empty())
                throw ConfigError("model_settings.cities_csv",
                                  "calibrate on city_interaction needs observed data");
        }
        config.method_settings = s;
        break;
    }
    case MethodKind::profile: {
        check_allowed(ms, path, {"parameter", "bins", "budget", "batch", "flatness_tol"});
        ProfileMethodSettings s;
        s.parameter = get_string(ms, path, "parameter");
        bool known = false;
        for (const auto& name : config.space.names())
            if (name == s.parameter) known = true;
        if (!known)
            throw ConfigError(path + ".parameter", "unknown parameter '" + s.parameter + "'");
        const std::int64_t bins = get_integer(ms, path, "bins", 32);
        if (bins < 2) throw ConfigError(path + ".bins", "must be >= 2");
        s.bins = static_cast<std::size_t>(bins);
        const std::int64_t budget = get_integer(ms, path, "budget", 10000);
        if (budget < bins) throw ConfigError(path + ".budget", "must be >= bins");
        s.budget = static_cast<std::size_t>(budget);
        const std::int64_t batch = get_integer(ms, path, "batch", 32);
        if (batch < 1) throw ConfigError(path + ".batch", "must be >= 1");
        s.batch = static_cast<std::size_t>(batch);
        s.flatness_tol = get_number(ms, path, "flatness_tol", 0.05);
        if (s.flatness_tol < 0.0) throw ConfigError(path + ".flatness_tol", "must be >= 0");
        if (config.model == ModelKind::city_interaction) {
            const auto& city = std::get<CityModelSettings>(config.model_settings);
            if (city.cities_csv.empty())
                throw ConfigError("model_settings.cities_csv",
                                  "profile on city_interaction needs observed data");
        }
        config.method_settings = s;
        break;
    }
    case MethodKind::pse: {
        if (config.model != ModelKind::simpoplocal)
            throw ConfigError("method",
                              "pse applies to simpoplocal; for city_interaction use "
                              "method 'regimes' with design 'pse'");
        check_allowed(ms, path, {"budget", "batch", "fresh_fraction", "grid"});
        PseMethodSettings s;
        const std::int64_t budget = get_integer(ms, path, "budget", 2000);
        if (budget < 1) throw ConfigError(path + ".budget", "must be >= 1");
        s.budget = static_cast<std::size_t>(budget);
        const std::int64_t batch = get_integer(ms, path, "batch", 32);
        if (batch < 1 || batch > budget)
            throw ConfigError(path + ".batch", "must satisfy budget >= batch >= 1");
        s.batch = static_cast<std::size_t>(batch);
        s.fresh_fraction = get_number(ms, path, "fresh_fraction", 0.1);
        if (s.fresh_fraction < 0.0 || s.fresh_fraction > 1.0)
            throw ConfigError(path + ".fresh_fraction", "must lie in [0,1]");
        if (const json* grid_spec = find(ms, "grid")) {
            s.grid = parse_grid(*grid_spec, path + ".grid");
            if (s.grid.size() != 3)
                throw ConfigError(path + ".grid",
                                  "simpoplocal patterns have 3 dimensions "
                                  "(rank_size_slope, log10_max_population, n_innovations)");
        }
        config.method_settings = s;
        break;
    }
    case MethodKind::regimes: {
        if (config.model != ModelKind::city_interaction)
            throw ConfigError("method", "regimes requires model city_interaction");
        check_allowed(ms, path,
                      {"design", "n", "budget", "batch", "tau_max", "threshold",
                       "use_differences"});
        RegimesSettings s;
        s.design = get_string(ms, path, "design", std::string("lhs"));
        if (s.design != "lhs" && s.design != "pse")
            throw ConfigError(path + ".design", "expected 'lhs' or 'pse'");
        const std::int64_t n = get_integer(ms, path, "n", 200);
        if (n < 1) throw ConfigError(path + ".n", "must be >= 1");
        s.n = static_cast<std::size_t>(n);
        const std::int64_t budget = get_integer(ms, path, "budget", 2000);
        if (budget < 1) throw ConfigError(path + ".budget", "must be >= 1");
        s.budget = static_cast<std::size_t>(budget);
        const std::int64_t batch = get_integer(ms, path, "batch", 32);
        if (batch < 1) throw ConfigError(path + ".batch", "must be >= 1");
        s.batch = static_cast<std::size_t>(batch);
        const std::int64_t tau = get_integer(ms, path, "tau_max", 5);
        if (tau < 1) throw ConfigError(path + ".tau_max", "must be >= 1");
        s.tau_max = static_cast<int>(tau);
        s.threshold = get_number(ms, path, "threshold", 0.5);
        if (s.threshold < 0.0 || s.threshold > 1.0)
            throw ConfigError(path + ".threshold", "must lie in [0,1]");
        s.use_differences = get_bool(ms, path, "use_differences", true);
        const auto& city = std::get<CityModelSettings>(config.model_settings);
        const std::size_t need =
            2 * static_cast<std::size_t>(s.tau_max) + 8;
        if (static_cast<std::size_t>(city.steps) < need)
            throw ConfigError("model_settings.steps",
                              "regime analysis at tau_max " + std::to_string(s.tau_max) +
                                  " needs at least " + std::to_string(need) + " steps");
        config.method_settings = s;
        break;
    }
    }
    return config;
}

WorkflowConfig parse_workflow(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_workflow_text(buffer.str());
}

// --- config echo ----------------------------------------------------------------

namespace {

json space_to_json(const ParameterSpace& space) {
    json out = json::array();
    for (const ParameterSpec& s : space.specs()) {
        out.push_back({{"name", s.name},
                       {"lower", s.lower},
                       {"upper", s.upper},
                       {"scale", s.scale == Scale::logarithmic ? "log" : "linear"}});
    }
    return out;
}

json config_to_json(const WorkflowConfig& config) {
    json out;
    out["model"] = to_string(config.model);
    out["method"] = to_string(config.method);
    out["seed"] = config.seed;
    out["replications"] = config.replications;
    out["workers"] = config.workers;
    out["output_dir"] = config.output_dir;
    out["parameters"] = space_to_json(config.space);

    if (const auto* s = std::get_if<SimpopLocalSettings>(&config.model_settings)) {
        json ms;
        ms["n_places"] = s->context.n_places;
        ms["growth_rate"] = s->context.growth_rate;
        ms["max_steps"] = s->context.max_steps;
        ms["max_innovations"] = s->context.max_innovations;
        ms["knn"] = s->context.knn;
        ms["init"] = {{"largest_population", s->context.init.largest_population},
                      {"population_min", s->context.init.population_min},
                      {"population_max", s->context.init.population_max},
                      {"resource", s->context.init.resource}};
        if (!s->initial_state_csv.empty())
            ms["initial_state_csv"] = s->initial_state_csv;
        out["model_settings"] = ms;
    } else {
        const auto& city_settings = std::get<CityModelSettings>(config.model_settings);
        json ms;
        ms["steps"] = city_settings.steps;
        if (city_settings.synthetic_cities > 0) {
            ms["synthetic_cities"] = city_settings.synthetic_cities;
            ms["extra_links"] = city_settings.extra_links;
        }
        if (!city_settings.cities_csv.empty()) ms["cities_csv"] = city_settings.cities_csv;
        if (!city_settings.network_csv.empty()) ms["network_csv"] = city_settings.network_csv;
        out["model_settings"] = ms;
    }

    json ms;
    if (const auto* s = std::get_if<SampleSettings>(&config.method_settings)) {
        if (config.method == MethodKind::sample_lhs) {
            ms["n"] = s->n;
            ms["centered"] = s->centered;
        } else {
            ms["levels"] = s->levels;
        }
        ms["dump_trajectories"] = s->dump_trajectories;
    } else if (const auto* s = std::get_if<CalibrateSettings>(&config.method_settings)) {
        ms["population_size"] = s->population_size;
        ms["max_evaluations"] = s->max_evaluations;
        ms["crossover_rate"] = s->crossover_rate;
        ms["mutation_rate"] = s->mutation_rate;
        if (s->islands) {
            ms["islands"] = {{"n_islands", s->islands->n_islands},
                             {"island_generations", s->islands->island_generations},
                             {"epochs", s->islands->epochs}};
        }
        if (!s->resume_checkpoint.empty()) ms["resume_checkpoint"] = s->resume_checkpoint;
        if (s->window_length) {
            ms["window_length"] = *s->window_length;
            ms["window_stride"] = s->window_stride;
        }
    } else if (const auto* s = std::get_if<ProfileMethodSettings>(&config.method_settings)) {
        ms["parameter"] = s->parameter;
        ms["bins"] = s->bins;
        ms["budget"] = s->budget;
        ms["batch"] = s->batch;
        ms["flatness_tol"] = s->flatness_tol;
    } else if (const auto* s = std::get_if<PseMethodSettings>(&config.method_settings)) {
        ms["budget"] = s->budget;
        ms["batch"] = s->batch;
        ms["fresh_fraction"] = s->fresh_fraction;
        if (!s->grid.empty()) {
            json dims = json::array();
            for (const GridDim& d : s->grid)
                dims.push_back({{"lower", d.lower}, {"upper", d.upper}, {"bins", d.n_bins}});
            ms["grid"] = dims;
        }
    } else if (const auto* s = std::get_if<RegimesSettings>(&config.method_settings)) {
        ms["design"] = s->design;
        if (s->design == "lhs") {
            ms["n"] = s->n;
        } else {
            ms["budget"] = s->budget;
            ms["batch"] = s->batch;
        }
        ms["tau_max"] = s->tau_max;
        ms["threshold"] = s->threshold;
        ms["use_differences"] = s->use_differences;
    }
    out["method_settings"] = ms;
    return out;
}

} // namespace

std::string describe_config(const WorkflowConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

// --- execution --------------------------------------------------------------------

namespace {

/// Writes files as <name>.partial, renaming on finalize(); an aborted run
/// leaves the partials behind. Checkpoints bypass the staging (they must
/// survive a crash to be worth anything).
class OutputWriter {
public:
    explicit OutputWriter(fs::path dir) : dir_(std::move(dir)) {}

    void write_csv(const std::string& name, const CsvSchema& schema,
                   const std::vector<CsvRow>& rows) {
        write_text(name, csv_to_string(schema, rows));
    }

    void write_text(const std::string& name, const std::string& content) {
        const fs::path partial = dir_ / (name + ".partial");
        std::ofstream out(partial, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + partial.string() + "'");
        out << content;
        out.close();
        if (!out) throw std::runtime_error("write failed for '" + partial.string() + "'");
        staged_.emplace_back(partial, dir_ / name);
        names_.push_back(name);
    }

    void write_durable(const std::string& name, const std::string& content) {
        const fs::path target = dir_ / name;
        std::ofstream out(target, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + target.string() + "'");
        out << content;
        out.close();
        if (!out) throw std::runtime_error("write failed for '" + target.string() + "'");
        names_.push_back(name);
    }

    void finalize() {
        for (const auto& [partial, target] : staged_) fs::rename(partial, target);
        staged_.clear();
    }

    const std::vector<std::string>& files() const { return names_; }

private:
    fs::path dir_;
    std::vector<std::pair<fs::path, fs::path>> staged_;
    std::vector<std::string> names_;
};

std::vector<std::string> objective_names(ModelKind model) {
    if (model == ModelKind::simpoplocal)
        return {"ks_lognormal", "largest_city_error", "duration_error"};
    return {"mse_population", "mse_log_population"};
}

cityinter::InteractionParams city_params_from_genome(const ParameterVector& genome,
                                                     int steps) {
    cityinter::InteractionParams p;
    p.r0 = genome[0];
    p.w_gravity = genome[1];
    p.d_gravity = genome[2];
    p.w_network = genome[3];
    p.capacity_rate = genome[4];
    p.steps = steps;
    return p;
}

struct PreparedModel {
    simpoplocal::Params simpop;
    cityinter::CitySystem system;
    std::vector<std::vector<double>> observed; ///< time points x cities
};

PreparedModel prepare_model(const WorkflowConfig& config) {
    PreparedModel out;
    if (const auto* s = std::get_if<SimpopLocalSettings>(&config.model_settings)) {
        out.simpop = s->context;
        if (!s->initial_state_csv.empty())
            out.simpop.initial_places = simpoplocal::load_places_csv(s->initial_state_csv);
    } else {
        const auto& city_settings = std::get<CityModelSettings>(config.model_settings);
        if (!city_settings.cities_csv.empty()) {
            auto loaded = cityinter::load_system_csv(city_settings.cities_csv,
                                                     city_settings.network_csv);
            out.system = std::move(loaded.system);
            out.observed = std::move(loaded.observed);
        } else {
            out.system = cityinter::make_synthetic_system(
                city_settings.synthetic_cities, config.seed, city_settings.extra_links);
        }
    }
    return out;
}

MultiObjectiveProblem make_objective_problem(const WorkflowConfig& config,
                                             const PreparedModel& model,
                                             std::size_t window_start,
                                             std::size_t window_length) {
    if (config.model == ModelKind::simpoplocal) {
        const simpoplocal::Params context = model.simpop;
        const int replications = config.replications;
        return [context, replications](const ParameterVector& genome,
                                       std::uint64_t eval_seed) {
            return evaluate_simpoplocal(context, genome, replications, eval_seed)
                .objectives;
        };
    }
    if (model.observed.size() < 2)
        throw std::runtime_error(
            "city_interaction objectives need observed data with at least 2 time points");
    if (window_start + window_length >= model.observed.size())
        throw std::runtime_error("observation window exceeds the observed series");
    const cityinter::CitySystem base = model.system;
    const auto observed = model.observed;
    return [base, observed, window_start, window_length](
               const ParameterVector& genome, std::uint64_t) {
        cityinter::CitySystem init = base;
        for (std::size_t i = 0; i < init.cities.size(); ++i)
            init.cities[i].population = observed[window_start][i];
        const auto params =
            city_params_from_genome(genome, static_cast<int>(window_length));
        const auto trajectory = cityinter::simulate(init, params);
        std::vector<std::vector<double>> target(
            observed.begin() + static_cast<std::ptrdiff_t>(window_start + 1),
            observed.begin() + static_cast<std::ptrdiff_t>(window_start + 1 + window_length));
        return ObjectiveVector{
            cityinter::mse_population(trajectory.population, target),
            cityinter::mse_log_population(trajectory.population, target)};
    };
}

/// Median simpoplocal behaviour pattern over the configured replications:
/// (rank_size_slope, log10 max population, innovations created).
PatternProblem make_simpop_pattern_problem(const simpoplocal::Params& context,
                                           int replications) {
    return [context, replications](const ParameterVector& genome,
                                   std::uint64_t eval_seed) {
        const auto params = apply_genome(context, genome);
        std::vector<double> slope, max_pop, innovations;
        for (int k = 0; k < replications; ++k) {
            const auto outcome = simpoplocal::run(
                params, derive_seed(eval_seed, static_cast<std::uint64_t>(k)));
            std::vector<double> populations;
            populations.reserve(outcome.final_places.size());
            for (const auto& place : outcome.final_places)
                populations.push_back(place.population);
            const double largest =
                *std::max_element(populations.begin(), populations.end());
            if (!(largest > 0.0)) continue;
            try {
                slope.push_back(simpoplocal::rank_size_slope(populations));
            } catch (const std::exception&) {
                continue; // degenerate replication
            }
            max_pop.push_back(std::log10(largest));
            innovations.push_back(static_cast<double>(outcome.n_innovations));
        }
        if (slope.empty())
            throw std::runtime_error("pattern evaluation: all replications degenerate");
        return std::vector<double>{median(slope), median(max_pop), median(innovations)};
    };
}

std::vector<GridDim> default_simpop_grid(const simpoplocal::Params& context) {
    return {{-3.0, 0.0, 15},
            {1.0, 6.0, 15},
            {0.0, static_cast<double>(context.max_innovations), 15}};
}

PatternProblem make_regime_pattern_problem(const cityinter::CitySystem& system,
                                           int steps, int tau_max, double threshold,
                                           bool use_differences) {
    return [system, steps, tau_max, threshold,
            use_differences](const ParameterVector& genome, std::uint64_t) {
        const auto params = city_params_from_genome(genome, steps);
        const auto trajectory = cityinter::simulate(system, params);
        const auto code = classify_regime(to_variable_set(trajectory), tau_max,
                                          threshold, use_differences);
        std::vector<double> pattern(6);
        for (std::size_t k = 0; k < 6; ++k)
            pattern[k] = static_cast<double>(static_cast<int>(code.signs[k]));
        return pattern;
    };
}

RegimeCode code_from_cell(const std::vector<std::size_t>& cell) {
    RegimeCode code;
    for (std::size_t k = 0; k < 6; ++k) {
        code.signs[k] = cell[k] == 0 ? PairSign::negative
                                     : (cell[k] == 1 ? PairSign::none : PairSign::positive);
    }
    return code;
}

std::string checkpoint_name(std::size_t epoch, const std::string& suffix = {}) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "checkpoint%s_epoch_%03zu.json", suffix.c_str(),
                  epoch);
    return buf;
}

json archive_to_json(const ParetoArchive& archive) {
    json members = json::array();
    for (const Individual& ind : archive.individuals) {
        members.push_back({{"genome", ind.genome.values},
                           {"objectives", ind.objectives},
                           {"replications", ind.replications}});
    }
    return members;
}

std::pair<ParetoArchive, std::size_t> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    json root;
    in >> root;
    ParetoArchive archive;
    for (const auto& member : root.at("archive")) {
        Individual ind;
        ind.genome.values = member.at("genome").get<std::vector<double>>();
        ind.objectives = member.at("objectives").get<std::vector<double>>();
        ind.replications = member.value("replications", 1);
        archive.add(std::move(ind));
    }
    return {std::move(archive), root.at("next_epoch").get<std::size_t>()};
}

std::vector<CsvRow> front_rows(const ParetoArchive& archive) {
    std::vector<CsvRow> rows;
    rows.reserve(archive.size());
    for (const Individual& ind : archive.individuals) {
        CsvRow row;
        for (const double v : ind.genome.values) row.emplace_back(v);
        for (const double v : ind.objectives) row.emplace_back(v);
        row.emplace_back(static_cast<std::int64_t>(ind.replications));
        rows.push_back(std::move(row));
    }
    return rows;
}

// --- method runners -----------------------------------------------------------

void run_samples(const WorkflowConfig& config, const PreparedModel& model,
                 unsigned workers, OutputWriter& out, json& summary) {
    const auto& settings = std::get<SampleSettings>(config.method_settings);
    std::vector<ParameterVector> points;
    if (config.method == MethodKind::sample_lhs) {
        LhsOptions options;
        options.centered = settings.centered;
        points = lhs(config.space, settings.n, derive_seed(config.seed, 0x10C5), options);
    } else {
        points = grid(config.space, settings.levels);
    }

    const auto problem = make_objective_problem(
        config, model, 0,
        config.model == ModelKind::city_interaction && model.observed.size() > 1
            ? model.observed.size() - 1
            : 1);
    const auto names = objective_names(config.model);

    std::vector<ObjectiveVector> objectives(points.size());
    auto errors = parallel_for_indexed(points.size(), workers, [&](std::size_t i) {
        objectives[i] = problem(points[i], derive_seed(config.seed, 0xBA7C4, i));
    });
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("sample evaluation " + std::to_string(i) +
                                     " failed: " + e.what());
        }
    }

    CsvSchema schema;
    schema.columns = config.space.names();
    for (const auto& name : names) schema.columns.push_back(name);
    std::vector<CsvRow> rows;
    rows.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        CsvRow row;
        for (const double v : points[i].values) row.emplace_back(v);
        for (const double v : objectives[i]) row.emplace_back(v);
        rows.push_back(std::move(row));
    }
    out.write_csv("samples.csv", schema, rows);
    summary["rows"] = points.size();

    if (settings.dump_trajectories) {
        if (config.model != ModelKind::simpoplocal)
            throw std::runtime_error("dump_trajectories applies to simpoplocal only");
        CsvSchema traj_schema;
        traj_schema.columns = {"step", "place_id", "population", "resource",
                               "n_innovations"};
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto params = apply_genome(model.simpop, points[i]);
            std::vector<simpoplocal::TrajectoryRow> trajectory;
            simpoplocal::run(params,
                             derive_seed(derive_seed(config.seed, 0xBA7C4, i), 0),
                             &trajectory);
            std::vector<CsvRow> traj_rows;
            traj_rows.reserve(trajectory.size());
            for (const auto& r : trajectory) {
                traj_rows.push_back({static_cast<std::int64_t>(r.step),
                                     static_cast<std::int64_t>(r.place_id),
                                     r.population, r.resource,
                                     static_cast<std::int64_t>(r.n_innovations)});
            }
            char name[48];
            std::snprintf(name, sizeof(name), "trajectory_%04zu.csv", i);
            out.write_csv(name, traj_schema, traj_rows);
        }
    }
}

void run_calibrate(const WorkflowConfig& config, const PreparedModel& model,
                   unsigned workers, OutputWriter& out, json& summary) {
    const auto& settings = std::get<CalibrateSettings>(config.method_settings);

    EvolutionConfig ec;
    ec.population_size = settings.population_size;
    ec.max_evaluations = settings.max_evaluations;
    ec.n_objectives = config.model == ModelKind::simpoplocal ? 3 : 2;
    ec.crossover_rate = settings.crossover_rate;
    ec.mutation_rate = settings.mutation_rate;
    ec.replications = config.model == ModelKind::simpoplocal ? config.replications : 1;
    ec.seed = config.seed;
    ec.workers = workers;
    ec.failure_objective = 1e30;
    ec.log = [](const std::string& message) { std::clog << message << '\n'; };

    CsvSchema schema;
    schema.columns = config.space.names();
    for (const auto& name : objective_names(config.model)) schema.columns.push_back(name);
    schema.columns.push_back("replications");

    // observation windows; a single synthetic window for simpoplocal
    struct Window {
        std::size_t start = 0;
        std::size_t length = 1;
        std::string suffix;
    };
    std::vector<Window> windows;
    if (config.model == ModelKind::city_interaction) {
        if (model.observed.size() < 2)
            throw std::runtime_error("calibrate needs observed data with >= 2 time points");
        const std::size_t horizon = model.observed.size() - 1;
        if (settings.window_length) {
            const std::size_t length = *settings.window_length;
            if (length > horizon)
                throw std::runtime_error("window_length exceeds the observed series");
            std::size_t index = 0;
            for (std::size_t start = 0; start + length <= horizon;
                 start += settings.window_stride) {
                char suffix[32];
                std::snprintf(suffix, sizeof(suffix), "_w%03zu", index++);
                windows.push_back({start, length, suffix});
            }
        } else {
            windows.push_back({0, horizon, ""});
        }
    } else {
        windows.push_back({0, 1, ""});
    }

    json fronts = json::array();
    for (const Window& window : windows) {
        const auto problem =
            make_objective_problem(config, model, window.start, window.length);
        EvolutionConfig window_config = ec;
        if (!window.suffix.empty())
            window_config.seed = derive_seed(config.seed, 0x817D0, window.start);

        ParetoArchive archive;
        if (settings.islands) {
            IslandConfig islands;
            islands.n_islands = settings.islands->n_islands;
            islands.island_generations = settings.islands->island_generations;
            islands.epochs = settings.islands->epochs;
            islands.on_epoch = [&](std::size_t epoch, const ParetoArchive& snapshot) {
                json checkpoint;
                checkpoint["epoch"] = epoch;
                checkpoint["next_epoch"] = epoch + 1;
                checkpoint["seed"] = window_config.seed;
                checkpoint["archive"] = archive_to_json(snapshot);
                out.write_durable(checkpoint_name(epoch, window.suffix),
                                  checkpoint.dump(2) + "\n");
            };
            ParetoArchive initial;
            std::size_t first_epoch = 0;
            if (!settings.resume_checkpoint.empty())
                std::tie(initial, first_epoch) = load_checkpoint(settings.resume_checkpoint);
            archive = island_run(problem, config.space, window_config, islands, initial,
                                 first_epoch);
        } else {
            archive = nsga2_run(problem, config.space, window_config);
        }

        out.write_csv("front" + window.suffix + ".csv", schema, front_rows(archive));
        json entry;
        entry["front"] = "front" + window.suffix + ".csv";
        entry["size"] = archive.size();
        if (config.model == ModelKind::city_interaction) {
            entry["window_start"] = window.start;
            entry["window_length"] = window.length;
        }
        fronts.push_back(entry);
    }
    summary["fronts"] = fronts;
}

void run_profile(const WorkflowConfig& config, const PreparedModel& model,
                 unsigned workers, OutputWriter& out, json& summary) {
    const auto& settings = std::get<ProfileMethodSettings>(config.method_settings);
    const auto problem = make_objective_problem(
        config, model, 0,
        config.model == ModelKind::city_interaction && model.observed.size() > 1
            ? model.observed.size() - 1
            : 1);
    const ScalarProblem scalar = [&problem](const ParameterVector& genome,
                                            std::uint64_t eval_seed) {
        return aggregate_scalar(problem(genome, eval_seed));
    };

    ProfileConfig pc;
    pc.n_bins = settings.bins;
    pc.budget = settings.budget;
    pc.batch = settings.batch;
    pc.seed = config.seed;
    pc.workers = workers;
    pc.log = [](const std::string& message) { std::clog << message << '\n'; };

    const std::size_t param_index = config.space.index_of(settings.parameter);
    const ProfileCurve curve = profile_run(scalar, config.space, param_index, pc);

    CsvSchema schema;
    schema.columns = {"bin_lower", "bin_upper", "best_error"};
    for (const auto& name : config.space.names()) schema.columns.push_back(name);
    std::vector<CsvRow> rows;
    for (const ProfileBin& bin : curve.bins) {
        CsvRow row{bin.lower, bin.upper};
        row.emplace_back(bin.best_error ? *bin.best_error : -1.0);
        if (bin.best_genome) {
            for (const double v : bin.best_genome->values) row.emplace_back(v);
        } else {
            for (std::size_t k = 0; k < config.space.dimension(); ++k)
                row.emplace_back(std::string());
        }
        rows.push_back(std::move(row));
    }
    out.write_csv("profile.csv", schema, rows);

    summary["parameter"] = settings.parameter;
    bool complete = true;
    for (const ProfileBin& bin : curve.bins)
        if (!bin.best_error) complete = false;
    if (complete) {
        summary["shape"] = classify_profile(curve, settings.flatness_tol) ==
                                   ProfileShape::flat
                               ? "flat"
                               : "informative";
    } else {
        summary["shape"] = "incomplete";
    }
}

void write_pse_grid(const PatternGrid& grid, const WorkflowConfig& config,
                    const std::vector<std::string>& pattern_names, OutputWriter& out) {
    CsvSchema schema;
    for (std::size_t k = 0; k < grid.dims().size(); ++k)
        schema.columns.push_back("cell_" + std::to_string(k));
    schema.columns.push_back("hit_count");
    for (const auto& name : config.space.names()) schema.columns.push_back(name);
    for (const auto& name : pattern_names) schema.columns.push_back(name);
    schema.columns.push_back("overflow");

    std::vector<CsvRow> rows;
    for (const auto& [cell, entry] : grid.cells()) {
        CsvRow row;
        for (const std::size_t index : cell)
            row.emplace_back(static_cast<std::int64_t>(index));
        row.emplace_back(static_cast<std::int64_t>(entry.hit_count));
        for (const double v : entry.exemplar_genome.values) row.emplace_back(v);
        for (const double v : entry.exemplar_pattern) row.emplace_back(v);
        row.emplace_back(static_cast<std::int64_t>(entry.overflow ? 1 : 0));
        rows.push_back(std::move(row));
    }
    out.write_csv("pse_grid.csv", schema, rows);
}

void run_pse(const WorkflowConfig& config, const PreparedModel& model,
             unsigned workers, OutputWriter& out, json& summary) {
    const auto& settings = std::get<PseMethodSettings>(config.method_settings);
    const auto problem = make_simpop_pattern_problem(model.simpop, config.replications);
    const auto grid_dims =
        settings.grid.empty() ? default_simpop_grid(model.simpop) : settings.grid;

    PseConfig pc;
    pc.budget = settings.budget;
    pc.batch = settings.batch;
    pc.fresh_fraction = settings.fresh_fraction;
    pc.seed = config.seed;
    pc.workers = workers;
    pc.log = [](const std::string& message) { std::clog << message << '\n'; };

    const PatternGrid grid = pse_run(problem, config.space, grid_dims, pc);
    write_pse_grid(grid, config,
                   {"rank_size_slope", "log10_max_population", "n_innovations"}, out);
    summary["coverage"] = grid.coverage();
}

void run_regimes(const WorkflowConfig& config, const PreparedModel& model,
                 unsigned workers, OutputWriter& out, json& summary) {
    const auto& settings = std::get<RegimesSettings>(config.method_settings);
    const auto& city = std::get<CityModelSettings>(config.model_settings);

    RegimeCensus census;
    if (settings.design == "lhs") {
        const auto points =
            lhs(config.space, settings.n, derive_seed(config.seed, 0x10C5));
        std::vector<VariableSet> runs(points.size());
        std::vector<char> failed(points.size(), 0);
        parallel_for_indexed(points.size(), workers, [&](std::size_t i) {
            try {
                const auto params = city_params_from_genome(points[i], city.steps);
                runs[i] = to_variable_set(cityinter::simulate(model.system, params));
            } catch (const std::exception&) {
                failed[i] = 1;
            }
        });
        std::vector<VariableSet> valid;
        std::size_t failures = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (failed[i]) {
                ++failures;
                continue;
            }
            valid.push_back(std::move(runs[i]));
        }
        if (valid.empty()) throw std::runtime_error("regimes: every sampled run failed");
        census = regime_census(valid, settings.tau_max, settings.threshold);
        census.skipped += failures;
    } else {
        const auto problem = make_regime_pattern_problem(
            model.system, city.steps, settings.tau_max, settings.threshold,
            settings.use_differences);
        PseConfig pc;
        pc.budget = settings.budget;
        pc.batch = settings.batch;
        pc.seed = config.seed;
        pc.workers = workers;
        std::vector<GridDim> dims(6, GridDim{-1.5, 1.5, 3});
        const PatternGrid grid = pse_run(problem, config.space, dims, pc);
        for (const auto& [cell, entry] : grid.cells())
            census.counts[code_from_cell(cell)] += entry.hit_count;
    }

    CsvSchema schema;
    schema.columns = {"code", "count", "is_coevolution"};
    std::vector<CsvRow> rows;
    for (const auto& [code, count] : census.counts) {
        rows.push_back({code.to_string(), static_cast<std::int64_t>(count),
                        static_cast<std::int64_t>(is_coevolution(code) ? 1 : 0)});
    }
    out.write_csv("regimes.csv", schema, rows);

    summary["distinct_codes"] = census.distinct();
    summary["distinct_coevolution"] = census.distinct_coevolution();
    summary["coevolution_fraction"] = census.coevolution_fraction();
    summary["skipped_runs"] = census.skipped;
}

} // namespace

Manifest execute(const WorkflowConfig& config, unsigned worker_override) {
    const auto start = std::chrono::steady_clock::now();
    const unsigned workers =
        worker_override > 0
            ? worker_override
            : (config.workers > 0 ? config.workers : hardware_workers());

    fs::create_directories(config.output_dir);
    OutputWriter out(config.output_dir);
    const PreparedModel model = prepare_model(config);

    json summary;
    switch (config.method) {
    case MethodKind::sample_lhs:
    case MethodKind::sample_grid:
        run_samples(config, model, workers, out, summary);
        break;
    case MethodKind::calibrate:
        run_calibrate(config, model, workers, out, summary);
        break;
    case MethodKind::profile:
        run_profile(config, model, workers, out, summary);
        break;
    case MethodKind::pse:
        run_pse(config, model, workers, out, summary);
        break;
    case MethodKind::regimes:
        run_regimes(config, model, workers, out, summary);
        break;
    }
    out.finalize();

    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();

    Manifest manifest;
    manifest.outputs = out.files();
    std::sort(manifest.outputs.begin(), manifest.outputs.end());
    manifest.wall_time_seconds = elapsed;

    json doc;
    doc["version"] = kVersion;
    doc["config"] = config_to_json(config);
    doc["workers"] = workers;
    doc["wall_time_seconds"] = elapsed;
    doc["outputs"] = manifest.outputs;
    doc["summary"] = summary;

    const fs::path manifest_path = fs::path(config.output_dir) / "manifest.json";
    std::ofstream manifest_out(manifest_path, std::ios::binary);
    if (!manifest_out)
        throw std::runtime_error("cannot write '" + manifest_path.string() + "'");
    manifest_out << doc.dump(2) << '\n';
    manifest.path = manifest_path.string();
    return manifest;
}

std::string describe_methods() {
    return
        "methods (select with \"method\" in the workflow file):\n"
        "  sample_lhs   Latin hypercube design over the parameter space;\n"
        "               evaluates every point and writes samples.csv.\n"
        "               settings: n, centered, dump_trajectories\n"
        "  sample_grid  full-factorial design; settings: levels (per parameter),\n"
        "               dump_trajectories\n"
        "  calibrate    multi-objective evolutionary calibration (NSGA-II);\n"
        "               writes front.csv (plus checkpoints with islands).\n"
        "               settings: population_size, max_evaluations, crossover_rate,\n"
        "               mutation_rate, islands{n_islands,island_generations,epochs},\n"
        "               resume_checkpoint, window_length, window_stride\n"
        "  profile      calibration profile of one parameter (bin-elite niching);\n"
        "               writes profile.csv. settings: parameter, bins, budget,\n"
        "               batch, flatness_tol\n"
        "  pse          pattern-space diversity search over model behaviours\n"
        "               (simpoplocal); writes pse_grid.csv. settings: budget,\n"
        "               batch, fresh_fraction, grid\n"
        "  regimes      causality-regime census over sampled dynamics\n"
        "               (city_interaction); writes regimes.csv. settings: design\n"
        "               (lhs|pse), n, budget, batch, tau_max, threshold,\n"
        "               use_differences\n"
        "\n"
        "models: simpoplocal (genome: p_creation, p_diffusion, distance_decay,\n"
        "        innovation_impact, r_max), city_interaction (genome: r0,\n"
        "        w_gravity, d_gravity, w_network, capacity_rate)\n"
        "\n"
        "every workflow needs an explicit seed; outputs land under output_dir\n"
        "together with manifest.json. MOLELAB_WORKERS (or --workers) overrides\n"
        "the worker count without changing any result.\n";
}

} // namespace molelab
