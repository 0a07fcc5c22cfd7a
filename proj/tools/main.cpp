#include "scenario.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Scenario runner for path-dependent stochastic control experiments"};
    app.set_version_flag("--version", PATHCTL_VERSION);
    app.require_subcommand(1);

    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool no_timings = false;
    auto* run = app.add_subcommand("run", "Run every scenario of a YAML config");
    run->add_option("config", config, "Config file")->required();
    run->add_option("--seed", seed, "Seed override (beats PATHCTL_SEED and the config)");
    run->add_option("--out", out, "Output directory override");
    run->add_flag("--no-timings", no_timings, "Record wall_ms as 0 so the manifest is byte-stable");

    auto* list = app.add_subcommand("list-problems", "Print the bundled test problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pathctl::cli::exit_config;
    }

    if (list->parsed()) {
        pathctl::cli::print_catalog(std::cout);
        return 0;
    }
    pathctl::cli::RunOptions options;
    options.seed = seed;
    options.out = out;
    options.timings = !no_timings;
    return pathctl::cli::run_file(config, options, std::cout, std::cerr);
}
