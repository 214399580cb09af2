// biexsim: command-line driver.
//
//   biexsim simulate     --config run.ini   time series of one pulse
//   biexsim sweep        --config run.ini   area/detuning/duration grid
//   biexsim dressed      --config run.ini   dressed energies and phonon rates along a pulse
//   biexsim kernel-cache --config run.ini   compute and store the influence kernel
//
// Exit codes: 0 success, 1 invalid configuration or usage, 2 solver failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace biexsim;

int main(int argc, char** argv) {
    CLI::App app{"Phonon-assisted biexciton preparation in a quantum dot"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::string> solver;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    bool seedless = false;

    app.add_option("--config", config_path, "INI run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--solver", solver, "pathint, unitary or rates");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "sweep worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--seedless", seedless, "assert a deterministic run (no random numbers are used anywhere)");

    auto* simulate = app.add_subcommand("simulate", "propagate one pulse and write the time series");
    auto* sweep = app.add_subcommand("sweep", "run a parameter grid and write the sweep CSV");
    auto* dressed = app.add_subcommand("dressed", "tabulate dressed states and golden-rule rates along the pulse");
    auto* kernel = app.add_subcommand("kernel-cache", "compute the influence kernel and store it in the cache file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitInvalidConfig;
    }

    RunConfig config;
    try {
        config = load_config(config_path);
        if (solver) {
            config.solver = parse_solver(*solver);
            config.sweep.solver = config.solver;
        }
        if (out_dir) config.output.directory = *out_dir;
        if (workers) config.sweep.workers = *workers;
        config.sweep.validate();
    } catch (const std::exception& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return cli::kExitInvalidConfig;
    }

    try {
        if (*simulate) return cli::cmd_simulate(config, std::cout);
        if (*sweep) return cli::cmd_sweep(config, std::cout);
        if (*dressed) return cli::cmd_dressed(config, std::cout);
        if (*kernel) return cli::cmd_kernel_cache(config, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return cli::kExitSolverFailure;
    }
    return cli::kExitInvalidConfig;
}
