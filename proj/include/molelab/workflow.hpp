#pragma once
// =============================================================================
// workflow.hpp — Declarative workflow configuration and orchestration.
//
// A workflow file (JSON) names a model, a method, a parameter space, a
// mandatory seed and method/model settings; execute() dispatches to the
// selected exploration module, fans evaluations out over a bounded local
// worker pool, writes the output files under the configured directory and a
// manifest describing the run. Results are byte-identical for a fixed
// (config, seed) at any worker count: every merge is ordered and every seed
// is derived from stable indices. Files are written with a `.partial` suffix
// and renamed on success, so an aborted run leaves its partial outputs
// visible as such.
// =============================================================================

#include "molelab/city_interaction.hpp"
#include "molelab/nsga2.hpp"
#include "molelab/param_space.hpp"
#include "molelab/pse.hpp"
#include "molelab/simpoplocal.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace molelab {

/// Parse/validation failure; `key` names the offending config entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error("config error at '" + key + "': " + message),
          key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class ModelKind { simpoplocal, city_interaction };
enum class MethodKind { sample_lhs, sample_grid, calibrate, profile, pse, regimes };

struct SampleSettings {
    std::size_t n = 100;              ///< sample_lhs
    std::vector<std::size_t> levels;  ///< sample_grid
    bool centered = false;
    bool dump_trajectories = false;   ///< simpoplocal only: per-row trajectory CSVs
};

struct IslandSettings {
    std::size_t n_islands = 4;
    std::size_t island_generations = 10;
    std::size_t epochs = 4;
};

struct CalibrateSettings {
    std::size_t population_size = 100;
    std::size_t max_evaluations = 5000;
    double crossover_rate = 0.9;
    double mutation_rate = -1.0; ///< negative selects 1/dimension
    std::optional<IslandSettings> islands;
    std::string resume_checkpoint; ///< checkpoint JSON to resume an island run
    /// Non-stationary calibration: when set, each window of the observed
    /// series is calibrated independently (city model only).
    std::optional<std::size_t> window_length;
    std::size_t window_stride = 1;
};

struct ProfileMethodSettings {
    std::string parameter; ///< required
    std::size_t bins = 32;
    std::size_t budget = 10000;
    std::size_t batch = 32;
    double flatness_tol = 0.05;
};

struct PseMethodSettings {
    std::size_t budget = 2000;
    std::size_t batch = 32;
    double fresh_fraction = 0.1;
    std::vector<GridDim> grid; ///< defaulted per model when empty
};

struct RegimesSettings {
    std::string design = "lhs"; ///< "lhs" or "pse"
    std::size_t n = 200;        ///< lhs design size
    std::size_t budget = 2000;  ///< pse design budget
    std::size_t batch = 32;
    int tau_max = 5;
    double threshold = 0.5;
    bool use_differences = true;
};

struct SimpopLocalSettings {
    simpoplocal::Params context; ///< calibrated fields are overwritten per genome
    std::string initial_state_csv;
};

struct CityModelSettings {
    int steps = 50;
    std::size_t synthetic_cities = 0; ///< > 0 builds a seeded synthetic system
    std::size_t extra_links = 2;
    std::string cities_csv;
    std::string network_csv;
};

struct WorkflowConfig {
    ModelKind model = ModelKind::simpoplocal;
    MethodKind method = MethodKind::sample_lhs;
    std::uint64_t seed = 0; ///< mandatory in the file
    int replications = 100;
    unsigned workers = 0; ///< 0 = machine parallelism
    std::string output_dir = "molelab_out";
    ParameterSpace space;
    std::variant<SimpopLocalSettings, CityModelSettings> model_settings;
    std::variant<SampleSettings, CalibrateSettings, ProfileMethodSettings,
                 PseMethodSettings, RegimesSettings>
        method_settings;
};

struct Manifest {
    std::string path;                 ///< manifest.json location
    std::vector<std::string> outputs; ///< file names under output_dir
    double wall_time_seconds = 0.0;
};

/// Reads and validates a workflow file; every failure is a ConfigError
/// naming the offending key.
WorkflowConfig parse_workflow(const std::string& path);
WorkflowConfig parse_workflow_text(const std::string& text);

/// Effective configuration (defaults filled) as pretty-printed JSON.
std::string describe_config(const WorkflowConfig& config);

/// Runs the configured method and writes outputs plus manifest.json under
/// config.output_dir. `worker_override` > 0 replaces the configured worker
/// count (results are invariant to it).
Manifest execute(const WorkflowConfig& config, unsigned worker_override = 0);

std::string describe_methods();

const char* to_string(ModelKind model);
const char* to_string(MethodKind method);

} // namespace molelab
