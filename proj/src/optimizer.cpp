#include <chb/optimizer.hpp>

#include <chb/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace chb {

namespace {

void check_series(const ControlSeries& U, const Grid2D& g, int steps, const char* what) {
    if (static_cast<int>(U.size()) != steps)
        throw ConfigError(std::string(what) + " has " + std::to_string(U.size()) +
                          " time levels, expected " + std::to_string(steps));
    for (const auto& u : U) require_same_grid(u.grid(), g, what);
}

double sq_dist(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s * a.grid().cell_area();
}

double sq_dist(const VectorField& a, const VectorField& b) { return sq_dist(a.x, b.x) + sq_dist(a.y, b.y); }

}  // namespace

ControlBounds ControlBounds::uniform(const Grid2D& g, double lo, double hi) {
    ControlBounds b{VectorField(g, lo, lo), VectorField(g, hi, hi)};
    b.validate();
    return b;
}

void ControlBounds::validate() const {
    require_same_grid(lower.grid(), upper.grid(), "control bounds");
    for (std::size_t k = 0; k < lower.x.size(); ++k)
        if (lower.x[k] > upper.x[k] || lower.y[k] > upper.y[k]) {
            std::ostringstream os;
            os << "control bounds inverted at cell " << k << ": lower (" << lower.x[k] << ", "
               << lower.y[k] << ") > upper (" << upper.x[k] << ", " << upper.y[k] << ")";
            throw ConfigError(os.str());
        }
}

double st_inner(const ControlSeries& a, const ControlSeries& b, double dt) {
    if (a.size() != b.size()) throw ConfigError("control series length mismatch");
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += inner(a[n], b[n]);
    return dt * s;
}

double st_norm(const ControlSeries& a, double dt) { return std::sqrt(st_inner(a, a, dt)); }

void check_targets(const TrackingTargets& t, const Grid2D& g, int steps) {
    if (static_cast<int>(t.phi_d.size()) != steps || static_cast<int>(t.u_d.size()) != steps)
        throw ConfigError("tracking targets must have one entry per time step (" +
                          std::to_string(steps) + "), got phi_d " + std::to_string(t.phi_d.size()) +
                          ", u_d " + std::to_string(t.u_d.size()));
    for (const auto& p : t.phi_d) require_same_grid(p.grid(), g, "phi_d");
    for (const auto& u : t.u_d) require_same_grid(u.grid(), g, "u_d");
    require_same_grid(t.phi_omega.grid(), g, "phi_Omega");
}

double tracking_cost(const Trajectory& traj, const ControlSeries& U, const TrackingTargets& t) {
    const int N = traj.steps();
    check_targets(t, traj.grid(), N);
    check_series(U, traj.grid(), N, "control");
    const VectorField zero(traj.grid());
    double run = 0.0;
    for (int n = 0; n < N; ++n) {
        const auto k = static_cast<std::size_t>(n);
        run += sq_dist(traj.phi(n), t.phi_d[k]) + sq_dist(traj.u(n), t.u_d[k]) + sq_dist(U[k], zero);
    }
    return traj.dt() * run + sq_dist(traj.phi(N), t.phi_omega);
}

AdjointSources tracking_sources(const Trajectory& traj, const TrackingTargets& t) {
    const int N = traj.steps();
    check_targets(t, traj.grid(), N);
    AdjointSources s;
    s.phi_src.reserve(static_cast<std::size_t>(N));
    s.u_src.reserve(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) {
        const auto k = static_cast<std::size_t>(n);
        s.phi_src.push_back(traj.dt() * (traj.phi(n) - t.phi_d[k]));
        s.u_src.push_back(traj.u(n) - t.u_d[k]);
    }
    s.terminal = traj.phi(N) - t.phi_omega;
    return s;
}

ControlSeries reduced_gradient(const ControlSeries& U, const AdjointSeries& adjoint) {
    if (U.size() != adjoint.v.size()) throw StateError("adjoint does not match the control series");
    ControlSeries g;
    g.reserve(U.size());
    for (std::size_t n = 0; n < U.size(); ++n) g.push_back(2.0 * (U[n] + adjoint.v[n]));
    return g;
}

ControlSeries project(const ControlSeries& U, const ControlBounds& b) {
    b.validate();
    ControlSeries out = U;
    for (auto& u : out) {
        require_same_grid(u.grid(), b.lower.grid(), "project");
        for (std::size_t k = 0; k < u.x.size(); ++k) {
            u.x[k] = std::clamp(u.x[k], b.lower.x[k], b.upper.x[k]);
            u.y[k] = std::clamp(u.y[k], b.lower.y[k], b.upper.y[k]);
        }
    }
    return out;
}

double kkt_residual(const ControlSeries& U, const ControlSeries& g, const ControlBounds& b, double dt) {
    ControlSeries trial = U;
    for (std::size_t n = 0; n < U.size(); ++n) trial[n] -= g[n];
    trial = project(trial, b);
    for (std::size_t n = 0; n < U.size(); ++n) trial[n] = U[n] - trial[n];
    return st_norm(trial, dt);
}

ViSample sample_variational_inequality(const ControlSeries& Ubar, const ControlSeries& g,
                                       const ControlBounds& b, double dt, int samples,
                                       unsigned seed) {
    const double r = kkt_residual(Ubar, g, b, dt);
    const double gn = st_norm(g, dt);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](double lo, double hi, double centre) {
        if (!std::isfinite(lo)) lo = centre - 1.0;
        if (!std::isfinite(hi)) hi = centre + 1.0;
        return lo + (hi - lo) * unit(rng);
    };
    ViSample out;
    out.passed = true;
    out.worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        ControlSeries d = Ubar;
        for (std::size_t n = 0; n < d.size(); ++n)
            for (std::size_t k = 0; k < d[n].x.size(); ++k) {
                d[n].x[k] = draw(b.lower.x[k], b.upper.x[k], Ubar[n].x[k]) - Ubar[n].x[k];
                d[n].y[k] = draw(b.lower.y[k], b.upper.y[k], Ubar[n].y[k]) - Ubar[n].y[k];
            }
        const double val = st_inner(g, d, dt);
        const double tol = r * (st_norm(d, dt) + r + gn);
        if (val < out.worst) {
            out.worst = val;
            out.tolerance = tol;
        }
        if (val < -tol) out.passed = false;
    }
    return out;
}

ReducedProblem::ReducedProblem(const ForwardModel& model, ScalarField phi0, double dt, int steps,
                               TrackingTargets targets)
    : model_(model), phi0_(std::move(phi0)), dt_(dt), steps_(steps), targets_(std::move(targets)) {
    if (!(dt > 0.0) || steps < 1) throw ConfigError("optimal control needs dt > 0 and at least one step");
    check_targets(targets_, model.grid(), steps);
}

ControlSeries ReducedProblem::zero_control() const {
    return ControlSeries(static_cast<std::size_t>(steps_), VectorField(model_.grid()));
}

double ReducedProblem::cost(const ControlSeries& U, Trajectory& traj) const {
    check_series(U, model_.grid(), steps_, "control");
    run_forward(model_, phi0_, dt_, steps_, U, &traj);
    return tracking_cost(traj, U, targets_);
}

double ReducedProblem::cost(const ControlSeries& U) const {
    Trajectory traj(model_.grid(), dt_, steps_);
    return cost(U, traj);
}

ReducedProblem::Gradient ReducedProblem::gradient(const ControlSeries& U) const {
    Trajectory traj(model_.grid(), dt_, steps_);
    Gradient out;
    out.cost = cost(U, traj);
    Sensitivity sens(model_, traj);
    out.adjoint = sens.adjoint_sweep(tracking_sources(traj, targets_));
    out.g = reduced_gradient(U, out.adjoint);
    return out;
}

OcpResult solve_ocp(const ReducedProblem& problem, const ControlBounds& bounds,
                    const ControlSeries& U0, const OptimizerOptions& opt,
                    const IterateObserver& observer) {
    bounds.validate();
    const double dt = problem.dt();
    OcpResult res;
    res.U = project(U0, bounds);

    auto grad = problem.gradient(res.U);
    res.cost = grad.cost;
    res.kkt_residual = kkt_residual(res.U, grad.g, bounds, dt);
    res.initial_kkt_residual = res.kkt_residual;
    auto record = [&](int iter, double step, int bt) {
        IterateRecord r{iter, res.cost, res.kkt_residual, step, bt, st_norm(grad.g, dt)};
        res.history.push_back(r);
        if (observer) observer(r, res.U);
    };
    record(0, 0.0, 0);
    const double target = opt.kkt_tol * res.initial_kkt_residual;

    for (int it = 1; it <= opt.max_iters; ++it) {
        if (res.kkt_residual <= target) break;
        double s = opt.initial_step;
        int bt = 0;
        bool accepted = false;
        ControlSeries trial;
        double trial_cost = 0.0;
        for (; bt <= opt.max_backtracks; ++bt) {
            trial = res.U;
            for (std::size_t n = 0; n < trial.size(); ++n) trial[n].axpy(-s, grad.g[n]);
            trial = project(trial, bounds);
            ControlSeries diff = res.U;
            for (std::size_t n = 0; n < diff.size(); ++n) diff[n] -= trial[n];
            const double d2 = st_inner(diff, diff, dt);
            try {
                trial_cost = problem.cost(trial);
            } catch (const NumericalError&) {
                s *= opt.backtrack_factor;
                continue;
            }
            if (trial_cost <= res.cost - opt.armijo_c * d2 / s) {
                accepted = true;
                break;
            }
            s *= opt.backtrack_factor;
        }
        if (!accepted) {
            res.line_search_failed = true;
            res.message = "line search failed after " + std::to_string(opt.max_backtracks) +
                          " backtracks at iteration " + std::to_string(it);
            break;
        }
        res.U = std::move(trial);
        grad = problem.gradient(res.U);
        res.cost = grad.cost;
        res.kkt_residual = kkt_residual(res.U, grad.g, bounds, dt);
        record(it, s, bt);
    }
    res.converged = res.kkt_residual <= target;
    if (res.message.empty())
        res.message = res.converged ? "KKT tolerance reached" : "iteration limit reached";
    res.gradient = std::move(grad.g);
    res.adjoint = std::move(grad.adjoint);
    return res;
}

}  // namespace chb
