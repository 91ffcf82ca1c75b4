// molelab — command-line front end for the exploration workflows.
//
//   molelab run <config.json> [--workers N]
//   molelab validate <config.json>
//   molelab describe-methods

#include "molelab/version.hpp"
#include "molelab/workflow.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

unsigned workers_from_env() {
    const char* env = std::getenv("MOLELAB_WORKERS");
    if (!env) return 0;
    const long value = std::strtol(env, nullptr, 10);
    return value > 0 ? static_cast<unsigned>(value) : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"molelab — model exploration workflows", "molelab"};
    app.set_version_flag("--version", std::string(molelab::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    unsigned workers = 0;

    CLI::App* run = app.add_subcommand("run", "execute a workflow file");
    run->add_option("config", config_path, "workflow JSON file")->required();
    run->add_option("--workers", workers,
                    "worker-count override (results are invariant to it)");

    std::string validate_path;
    CLI::App* validate =
        app.add_subcommand("validate", "parse a workflow file and echo the effective config");
    validate->add_option("config", validate_path, "workflow JSON file")->required();

    CLI::App* describe =
        app.add_subcommand("describe-methods", "list the available methods and settings");

    CLI11_PARSE(app, argc, argv);

    try {
        if (describe->parsed()) {
            std::cout << molelab::describe_methods();
            return 0;
        }
        if (validate->parsed()) {
            const auto config = molelab::parse_workflow(validate_path);
            std::cout << molelab::describe_config(config);
            return 0;
        }
        const auto config = molelab::parse_workflow(config_path);
        unsigned override = workers;
        if (override == 0) override = workers_from_env();
        const auto manifest = molelab::execute(config, override);
        std::cout << "wrote " << manifest.outputs.size() << " output file(s) in "
                  << config.output_dir << " (" << manifest.path << ")\n";
        return 0;
    } catch (const molelab::ConfigError& e) {
        std::cerr << "molelab: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "molelab: " << e.what() << '\n';
        return 1;
    }
}
