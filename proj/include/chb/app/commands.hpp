#pragma once

#include <chb/app/config.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace chb::app {

struct CommandContext {
    /// Output directory; empty means no files (validate only).
    std::filesystem::path out;
    bool quiet = false;
    /// Progress and reports (default std::cout).
    std::ostream* log = nullptr;
    /// Error messages (default std::cerr).
    std::ostream* err = nullptr;
};

/// Subcommands. Each throws chb::Error on failure and returns the exit
/// status otherwise (nonzero for failed checks).
int cmd_validate(const RunConfig& cfg, const CommandContext& ctx);
int cmd_simulate(const RunConfig& cfg, const CommandContext& ctx);
int cmd_optimize(const RunConfig& cfg, const CommandContext& ctx);
int cmd_check_gradient(const RunConfig& cfg, const CommandContext& ctx);
int cmd_check_adjoint(const RunConfig& cfg, const CommandContext& ctx);
int cmd_convergence(const RunConfig& cfg, const CommandContext& ctx);

/// Dispatches by name and maps errors to exit codes
/// (2 configuration, 3 assumption validation, 4 numerical).
int run_command(const std::string& name, const RunConfig& cfg, const CommandContext& ctx);

/// Assumption report with the grid resolution check appended.
ValidationReport validate_run(const RunConfig& cfg);
std::string validation_json(const ValidationReport& report, const Kernel& kernel);

/// Builds tracking targets as configured; inverse_crime runs the model.
TrackingTargets make_targets(const RunConfig& cfg, const ForwardModel& model, const ScalarField& phi0,
                             double dt, int steps);

/// CHBF series stem_000000.chbf ... in `dir`.
std::string series_file(const std::filesystem::path& dir, const char* stem, int n);
ControlSeries read_control_series(const std::filesystem::path& dir, const Grid2D& g, int steps);

}  // namespace chb::app
