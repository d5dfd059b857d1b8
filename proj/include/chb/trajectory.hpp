#pragma once

#include <chb/field.hpp>
#include <chb/forward.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace chb {

/// Stored forward states phi^0..phi^N and velocities u^0..u^{N-1} on a
/// uniform time grid. Kept in memory up to `memory_limit` bytes, otherwise
/// spooled to CHBF files in a private temporary directory.
class Trajectory {
public:
    static constexpr std::size_t kDefaultMemoryLimit = std::size_t{64} << 20;

    Trajectory(const Grid2D& grid, double dt, int steps,
               std::size_t memory_limit = kDefaultMemoryLimit);
    ~Trajectory();
    Trajectory(Trajectory&&) noexcept;
    Trajectory& operator=(Trajectory&&) noexcept;
    Trajectory(const Trajectory&) = delete;
    Trajectory& operator=(const Trajectory&) = delete;

    const Grid2D& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }
    int steps() const noexcept { return steps_; }
    bool spooled() const noexcept { return !spool_dir_.empty(); }

    void set_phi(int n, const ScalarField& phi);
    void set_u(int n, const VectorField& u);
    /// Throw StateError when the slot was never stored.
    ScalarField phi(int n) const;
    VectorField u(int n) const;
    bool complete() const;

private:
    std::filesystem::path slot_path(char kind, int n) const;

    Grid2D grid_;
    double dt_;
    int steps_;
    std::vector<std::optional<ScalarField>> phi_;
    std::vector<std::optional<VectorField>> u_;
    std::vector<bool> phi_set_, u_set_;
    std::filesystem::path spool_dir_;
};

/// Called after every step (and once for the initial state) with the state
/// and its energy report.
using StepObserver = std::function<void(const SolverState&, const EnergyReport&)>;

/// Runs `steps` forward steps from phi0 with forcing h^n (empty = zero),
/// filling `traj` when given. Returns the final state.
SolverState run_forward(const ForwardModel& model, const ScalarField& phi0, double dt, int steps,
                        const ForceSeries& forces, Trajectory* traj = nullptr,
                        const StepObserver& observer = {});

}  // namespace chb
