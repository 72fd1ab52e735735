#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "commands.hpp"
#include "heatctl/error.hpp"

using namespace heatctl;
using namespace heatctl::cli;

int main(int argc, char** argv) {
    CLI::App app{"heatctl: delayed observer-based control of the 2D heat equation"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = "heatctl-out";
    unsigned threads = 0;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0: all cores)");
    app.add_option("--seed", seed, "seed recorded in the manifest");

    std::size_t count = 0;
    CLI::App* spectrum = app.add_subcommand("spectrum", "ordered eigenvalues and the unstable-mode count");
    spectrum->add_option("--count", count, "number of eigenvalues to list");
    CLI::App* design = app.add_subcommand("design", "design or import gains and report margins");
    CLI::App* verify = app.add_subcommand("verify", "certificate verdict at delays.tau_M");
    CLI::App* max_delay = app.add_subcommand("max-delay", "largest certified delay per variant and N");
    CLI::App* simulate = app.add_subcommand("simulate", "truncated delayed closed loop");
    std::string which;
    CLI::App* reproduce = app.add_subcommand("reproduce", "reference tables and traces");
    reproduce->add_option("which", which, "table1-check | table2 | table3 | fig1")
        ->required()
        ->check(CLI::IsMember({"table1-check", "table2", "table3", "fig1"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return kConfigError;
    }

    try {
        Context ctx;
        ctx.config = config_path.empty() ? parse_run_config(json::object()) : load_run_config(config_path);
        ReportWriter writer(out_dir);
        ctx.out = &writer;
        ctx.log = &std::cout;
        ctx.threads = threads;
        ctx.seed = seed;
        ctx.count_override = count;
        if (*spectrum) return cmd_spectrum(ctx);
        if (*design) return cmd_design(ctx);
        if (*verify) return cmd_verify(ctx);
        if (*max_delay) return cmd_max_delay(ctx);
        if (*simulate) return cmd_simulate(ctx);
        if (*reproduce) return cmd_reproduce(ctx, which);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        switch (e.kind()) {
            case ErrorKind::ConfigError:
            case ErrorKind::InvalidArgument:
            case ErrorKind::InsufficientBasis: return kConfigError;
            case ErrorKind::DesignInfeasible: return kInfeasible;
            default: return kInconclusive;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInconclusive;
    }
    return kConfigError;
}
