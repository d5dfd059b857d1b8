#pragma once

#include <chb/forward.hpp>
#include <chb/optimizer.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace chb::app {

struct GridConfig {
    int nx = 64;
    int ny = 64;
    double lx = 1.0;
    double ly = 1.0;
};

struct TimeConfig {
    double T = 0.01;
    /// Upper bound on the step; 0 selects the model default. The run uses
    /// steps = ceil(T / dt) equal steps of T / steps.
    double dt = 0.0;
    /// 0 writes only the initial and final snapshots.
    int snapshot_every = 0;
};

struct PhysicsSection {
    double nu = 1.0;
    double eta = 1.0;
    /// CHBF scalar field overriding `eta` when set.
    std::string eta_path;
    KernelSpec kernel;
    PotentialSpec potential;
    MobilitySpec mobility;
    /// Test hook: adds an odd component of this size to the kernel stencil
    /// used for the assumption checks.
    double kernel_odd_perturbation = 0.0;
};

/// Builtin patterns: constant, cosine, spinodal, bubble, file.
struct InitialConfig {
    std::string pattern = "spinodal";
    double mean = 0.0;
    double amplitude = 0.05;
    int kx = 1;
    int ky = 1;
    /// Highest cosine mode index in the spinodal pattern.
    int modes = 8;
    double radius = 0.25;
    double cx = 0.5;
    double cy = 0.5;
    double width = 0.05;
    std::string path;
    double phi0_cap = 0.95;
};

/// Time-constant forcing: none, constant, vortex, shear; or a CHBF series
/// directory (kind file, files h_000000.chbf ...).
struct ForcingConfig {
    std::string kind = "none";
    double amplitude = 1.0;
    double x = 0.0;
    double y = 0.0;
    std::string path;
};

/// kinds: inverse_crime (targets from a forward run under `control`),
/// zero, file (directory with phi_d_*.chbf, u_d_*.chbf, phi_omega.chbf).
struct TargetsConfig {
    std::string kind = "inverse_crime";
    ForcingConfig control{"vortex", 0.5, 0.0, 0.0, ""};
    std::string path;
};

struct OptimizerSection {
    OptimizerOptions options;
    double lower = -1.0;
    double upper = 1.0;
    /// Directory holding a saved control series (U_000000.chbf ...).
    std::string initial_control;
};

struct Tolerances {
    double div_tol = 1e-10;
    double cg_tol = 1e-10;
    double kkt_tol = 1e-5;
};

struct SolverSection {
    std::string brinkman = "auto";
    int cg_max_iter = 5000;
    double cfl_max = 1.0;
    double memory_limit_mb = 64.0;
};

struct ChecksConfig {
    std::vector<double> epsilons{1e-2, 1e-3, 1e-4, 1e-5};
    int seeds = 10;
    /// Use the zero perturbation direction.
    bool zero_direction = false;
};

struct ConvergenceConfig {
    /// brinkman: manufactured-solution grid refinement; time: dt halving.
    std::string kind = "brinkman";
    std::vector<int> grids{32, 64, 128};
    int levels = 4;
};

struct RunConfig {
    GridConfig grid;
    TimeConfig time;
    PhysicsSection physics;
    InitialConfig initial;
    ForcingConfig forcing;
    TargetsConfig targets;
    OptimizerSection optimizer;
    Tolerances tolerances;
    SolverSection solver;
    ChecksConfig checks;
    ConvergenceConfig convergence;
    std::uint64_t seed = 0;
};

/// Strict parsing: unknown keys, wrong types and out-of-range values raise
/// ConfigError with the line and key path.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);
/// Range checks shared by the parser and programmatic callers.
void check_ranges(const RunConfig& cfg);
/// Canonical YAML of the full configuration (all defaults filled in).
std::string to_yaml(const RunConfig& cfg);

Grid2D make_grid(const RunConfig& cfg);
PhysicsConfig make_physics(const RunConfig& cfg);
SolverOptions make_solver_options(const RunConfig& cfg);
ScalarField make_initial(const RunConfig& cfg, const Grid2D& g);
/// One entry per step (empty for kind none).
ForceSeries make_forcing(const ForcingConfig& f, const Grid2D& g, int steps);
ControlBounds make_bounds(const RunConfig& cfg, const Grid2D& g);

struct TimeAxis {
    double dt;
    int steps;
};
TimeAxis make_time_axis(const RunConfig& cfg, const ForwardModel& model);

/// Kernel used by the assumption checks (with the odd test perturbation).
Kernel make_validation_kernel(const RunConfig& cfg, const Grid2D& g);

}  // namespace chb::app
