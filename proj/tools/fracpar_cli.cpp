#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fracpar: Green matrices of fractional-parabolic systems"};
    app.require_subcommand(1, 1);
    fracpar::cli::run_options opt;
    std::uint64_t seed = 0;
    const char* names[][2] = {
        {"specfun-eval", "Tabulate Wright, subordination and Mittag-Leffler functions"},
        {"kernel", "Z, Z_alpha, Y_alpha, dtZ_alpha fields by the chosen route"},
        {"xcheck", "Route-vs-route and oracle comparisons"},
        {"certify", "Estimate certification for a case set"},
        {"levi", "Levi densities, Green-matrix assembly and Cauchy solve"},
        {"solve", "Oracle trajectory by corrected L1 time stepping"},
    };
    for (const auto& [name, help] : names) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_flag("--quick", opt.quick, "Pinned desk-scale grids and tolerances");
        sub->add_option("--output", opt.output, "Artifact directory")->capture_default_str();
        sub->add_option("--seed", seed, "Seed for sampling-based certifications");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fracpar::cli::config_failure;
    }
    for (CLI::App* sub : app.get_subcommands()) {
        opt.command = sub->get_name();
        if (sub->count("--seed")) opt.seed = seed;
    }
    return fracpar::cli::run(opt);
}
