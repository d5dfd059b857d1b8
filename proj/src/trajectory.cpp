#include <chb/trajectory.hpp>

#include <chb/error.hpp>
#include <chb/snapshot.hpp>

#include <atomic>
#include <string>
#include <system_error>
#include <unistd.h>

namespace chb {

namespace {

std::filesystem::path make_spool_dir() {
    static std::atomic<int> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        auto p = base / ("chb-traj-" + std::to_string(::getpid()) + "-" +
                         std::to_string(counter.fetch_add(1)));
        std::error_code ec;
        if (std::filesystem::create_directory(p, ec)) return p;
    }
    throw StateError("cannot create trajectory spool directory");
}

}  // namespace

Trajectory::Trajectory(const Grid2D& grid, double dt, int steps, std::size_t memory_limit)
    : grid_(grid), dt_(dt), steps_(steps) {
    if (steps < 1) throw ConfigError("trajectory needs at least one step");
    if (!(dt > 0.0)) throw ConfigError("trajectory dt must be positive");
    const std::size_t bytes = grid.size() * sizeof(double) *
                              (static_cast<std::size_t>(steps + 1) + 2 * static_cast<std::size_t>(steps));
    phi_set_.assign(static_cast<std::size_t>(steps + 1), false);
    u_set_.assign(static_cast<std::size_t>(steps), false);
    if (bytes > memory_limit) {
        spool_dir_ = make_spool_dir();
    } else {
        phi_.resize(static_cast<std::size_t>(steps + 1));
        u_.resize(static_cast<std::size_t>(steps));
    }
}

Trajectory::~Trajectory() {
    if (!spool_dir_.empty()) {
        std::error_code ec;
        std::filesystem::remove_all(spool_dir_, ec);
    }
}

Trajectory::Trajectory(Trajectory&& o) noexcept
    : grid_(o.grid_),
      dt_(o.dt_),
      steps_(o.steps_),
      phi_(std::move(o.phi_)),
      u_(std::move(o.u_)),
      phi_set_(std::move(o.phi_set_)),
      u_set_(std::move(o.u_set_)),
      spool_dir_(std::move(o.spool_dir_)) {
    o.spool_dir_.clear();
}

Trajectory& Trajectory::operator=(Trajectory&& o) noexcept {
    if (this != &o) {
        this->~Trajectory();
        new (this) Trajectory(std::move(o));
    }
    return *this;
}

std::filesystem::path Trajectory::slot_path(char kind, int n) const {
    return spool_dir_ / (std::string(1, kind) + std::to_string(n) + ".chbf");
}

void Trajectory::set_phi(int n, const ScalarField& phi) {
    if (n < 0 || n > steps_) throw StateError("trajectory phi index out of range");
    require_same_grid(phi.grid(), grid_, "trajectory");
    if (spooled()) write_snapshot(slot_path('p', n).string(), phi);
    else phi_[static_cast<std::size_t>(n)] = phi;
    phi_set_[static_cast<std::size_t>(n)] = true;
}

void Trajectory::set_u(int n, const VectorField& u) {
    if (n < 0 || n >= steps_) throw StateError("trajectory u index out of range");
    require_same_grid(u.grid(), grid_, "trajectory");
    if (spooled()) write_snapshot(slot_path('u', n).string(), u);
    else u_[static_cast<std::size_t>(n)] = u;
    u_set_[static_cast<std::size_t>(n)] = true;
}

ScalarField Trajectory::phi(int n) const {
    if (n < 0 || n > steps_ || !phi_set_[static_cast<std::size_t>(n)])
        throw StateError("trajectory snapshot phi[" + std::to_string(n) + "] missing");
    if (spooled()) return read_scalar_snapshot(slot_path('p', n).string());
    return *phi_[static_cast<std::size_t>(n)];
}

VectorField Trajectory::u(int n) const {
    if (n < 0 || n >= steps_ || !u_set_[static_cast<std::size_t>(n)])
        throw StateError("trajectory snapshot u[" + std::to_string(n) + "] missing");
    if (spooled()) return read_vector_snapshot(slot_path('u', n).string());
    return *u_[static_cast<std::size_t>(n)];
}

bool Trajectory::complete() const {
    for (bool b : phi_set_)
        if (!b) return false;
    for (bool b : u_set_)
        if (!b) return false;
    return true;
}

SolverState run_forward(const ForwardModel& model, const ScalarField& phi0, double dt, int steps,
                        const ForceSeries& forces, Trajectory* traj, const StepObserver& observer) {
    if (!forces.empty() && static_cast<int>(forces.size()) != steps)
        throw ConfigError("forcing series has " + std::to_string(forces.size()) +
                          " entries, expected " + std::to_string(steps));
    if (traj && (traj->steps() != steps || !(traj->grid() == model.grid())))
        throw ConfigError("trajectory layout does not match the run");
    SolverState s = model.initial_state(phi0);
    if (traj) traj->set_phi(0, s.phi);
    if (observer) observer(s, model.energy(s.phi, s.u, &s.mu));
    for (int n = 0; n < steps; ++n) {
        const VectorField* h = forces.empty() ? nullptr : &forces[static_cast<std::size_t>(n)];
        s = model.advance(s, dt, h);
        if (traj) {
            traj->set_u(n, s.u);
            traj->set_phi(n + 1, s.phi);
        }
        if (observer) observer(s, model.energy(s.phi, s.u, &s.mu));
    }
    return s;
}

}  // namespace chb
