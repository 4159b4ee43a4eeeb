#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "pss/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-spherical surface frames: solve, expand and check conservation laws"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::size_t grid_scale = 1;

    const std::pair<const char*, const char*> commands[] = {
        {"verify", "structure equations, special-frame residual and model residuals"},
        {"solve-frame", "rotate the frame to a special one and emit theta_1"},
        {"hierarchy", "order-by-order angle hierarchy for eta-dependent frames"},
        {"conserve", "conserved quantities and flux residuals of theta"},
        {"converge", "rerun a command on nested grids and report observed orders"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "INI run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides [output] dir)");
        sub->add_option("--grid-scale", grid_scale, "refine every axis by this factor")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    std::optional<std::filesystem::path> out_dir;
    if (!out.empty()) out_dir = out;
    return pss::cli::run(command, config, out_dir, grid_scale, std::cout, std::cerr);
}
