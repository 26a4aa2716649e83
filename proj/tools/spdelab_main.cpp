// Experiment runner: validates a JSON experiment config and dispatches it.
// Exit codes: 0 success, 1 validation failure, 2 runtime failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spdelab/config.hpp"
#include "spdelab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spdelab - stochastic heat equation with colored noise: simulation, "
                 "estimate verifiers, and uniqueness-probe experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    std::size_t jobs_override = 0;

    const char* names[] = {"simulate", "paired", "sweep", "verify_kernels", "verify_yw",
                           "analyze"};
    const char* descs[] = {
        "integrate one trajectory and export snapshots",
        "two solves on one shared noise realization, difference series",
        "(alpha,gamma) phase sweep of paired divergence statistics",
        "numerical verifiers for the heat-kernel estimates",
        "Yamada-Watanabe mollifier property checks",
        "field analysis: Holder exponent, splitting, gradient bins"};
    for (int i = 0; i < 6; ++i) {
        auto* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_override, "override output directory");
        sub->add_option("--seed", seed_override, "override master seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--jobs", jobs_override, "worker count for replica/cell parallelism");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = spdelab::cli::load_config(config_path);
        const std::string subname = app.get_subcommands().front()->get_name();
        if (subname != spdelab::cli::command_name(cfg.command)) {
            std::cerr << "error: config declares command '"
                      << spdelab::cli::command_name(cfg.command) << "' but subcommand '"
                      << subname << "' was invoked\n";
            return 1;
        }
        if (!out_override.empty()) {
            cfg.output_dir = out_override;
            cfg.raw["output_dir"] = out_override;
        }
        if (seed_set) {
            cfg.master_seed = seed_override;
            cfg.raw["master_seed"] = seed_override;
        }
        if (jobs_override > 0) cfg.jobs = jobs_override;
        const int status = spdelab::cli::run(cfg);
        if (status != 0) std::cerr << "run failed with status " << status << "\n";
        return status;
    } catch (const spdelab::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
