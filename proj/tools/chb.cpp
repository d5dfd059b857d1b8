#include <chb/app/commands.hpp>
#include <chb/error.hpp>

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

// CHB_THREADS caps the OpenMP worker count.
int apply_thread_limit() {
    const char* env = std::getenv("CHB_THREADS");
    if (!env || !*env) return 0;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096) {
        std::cerr << "error: CHB_THREADS must be a positive integer, got '" << env << "'\n";
        return 2;
    }
    omp_set_num_threads(static_cast<int>(n));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal Cahn-Hilliard-Brinkman solver and optimal control driver"};
    app.require_subcommand(1, 1);

    std::string config_path, out_dir;
    long long seed = -1;
    bool quiet = false;

    const std::pair<const char*, const char*> commands[] = {
        {"validate", "check the structural assumptions for a configuration"},
        {"simulate", "run the forward model and write diagnostics and snapshots"},
        {"optimize", "solve the tracking optimal control problem"},
        {"check-gradient", "Taylor test of the reduced gradient"},
        {"check-adjoint", "dot-product test of tangent and adjoint"},
        {"convergence", "grid or time-step refinement study"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "RNG seed (overrides the config)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--quiet", quiet, "suppress progress output");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (const int rc = apply_thread_limit()) return rc;

    chb::app::RunConfig cfg;
    try {
        cfg = chb::app::load_config(config_path);
    } catch (const chb::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    }
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);

    chb::app::CommandContext ctx;
    ctx.out = out_dir;
    ctx.quiet = quiet;
    return chb::app::run_command(app.get_subcommands().front()->get_name(), cfg, ctx);
}
