#pragma once

#include <chb/forward.hpp>
#include <chb/sensitivity.hpp>
#include <chb/trajectory.hpp>

#include <functional>
#include <string>
#include <vector>

namespace chb {

/// Control and target time series live on the forward time axis: entry n
/// belongs to step n (t = n dt), n = 0..N-1.
using ControlSeries = ForceSeries;

struct TrackingTargets {
    std::vector<ScalarField> phi_d;
    std::vector<VectorField> u_d;
    ScalarField phi_omega;
};

/// Time-constant box U1 <= U <= U2, componentwise.
struct ControlBounds {
    VectorField lower;
    VectorField upper;

    static ControlBounds uniform(const Grid2D& g, double lo, double hi);
    /// Throws ConfigError when lower > upper anywhere.
    void validate() const;
};

/// dt-weighted space-time L2 product sum_n dt <a^n, b^n>_h.
double st_inner(const ControlSeries& a, const ControlSeries& b, double dt);
double st_norm(const ControlSeries& a, double dt);

/// Throws ConfigError if the targets do not match the trajectory axes.
void check_targets(const TrackingTargets& t, const Grid2D& g, int steps);

/// Rectangle-rule tracking cost (no 1/2 factors):
///   dt sum_{n<N} (|phi^n - phi_d^n|^2 + |u^n - u_d^n|^2 + |U^n|^2) + |phi^N - phi_Omega|^2
/// with cell-weighted norms.
double tracking_cost(const Trajectory& traj, const ControlSeries& U, const TrackingTargets& t);

/// Adjoint sources whose solution gives the cost gradient g = 2 (U + v).
AdjointSources tracking_sources(const Trajectory& traj, const TrackingTargets& t);

/// g^n = 2 (U^n + v^n): the gradient in the st_inner product.
ControlSeries reduced_gradient(const ControlSeries& U, const AdjointSeries& adjoint);

/// Componentwise clamp into the box.
ControlSeries project(const ControlSeries& U, const ControlBounds& b);

/// |U - P(U - g)| in the st_inner norm.
double kkt_residual(const ControlSeries& U, const ControlSeries& g, const ControlBounds& b, double dt);

struct ViSample {
    /// min over samples of <g, U - Ubar> (st_inner).
    double worst = 0.0;
    /// Lower bound implied by the KKT residual r: -|r| (|U - Ubar| + |r| + |g|), at the worst sample.
    double tolerance = 0.0;
    bool passed = false;
};

/// Checks <g, U - Ubar> >= -tol for random admissible U drawn uniformly from
/// the box (unbounded components are sampled within +-1 of Ubar).
ViSample sample_variational_inequality(const ControlSeries& Ubar, const ControlSeries& g,
                                       const ControlBounds& b, double dt, int samples,
                                       unsigned seed);

/// U -> J(S(U), U) for a fixed initial phase and time grid.
class ReducedProblem {
public:
    ReducedProblem(const ForwardModel& model, ScalarField phi0, double dt, int steps,
                   TrackingTargets targets);

    const ForwardModel& model() const noexcept { return model_; }
    const ScalarField& phi0() const noexcept { return phi0_; }
    double dt() const noexcept { return dt_; }
    int steps() const noexcept { return steps_; }
    const TrackingTargets& targets() const noexcept { return targets_; }
    ControlSeries zero_control() const;

    double cost(const ControlSeries& U) const;
    /// Cost with its trajectory retained.
    double cost(const ControlSeries& U, Trajectory& traj) const;

    struct Gradient {
        double cost = 0.0;
        ControlSeries g;
        AdjointSeries adjoint;
    };
    Gradient gradient(const ControlSeries& U) const;

private:
    const ForwardModel& model_;
    ScalarField phi0_;
    double dt_;
    int steps_;
    TrackingTargets targets_;
};

struct OptimizerOptions {
    int max_iters = 50;
    /// Stop when the KKT residual drops below kkt_tol times the initial one.
    double kkt_tol = 1e-5;
    double armijo_c = 1e-4;
    double initial_step = 1.0;
    double backtrack_factor = 0.5;
    int max_backtracks = 30;
};

struct IterateRecord {
    int iter = 0;
    double cost = 0.0;
    double kkt_residual = 0.0;
    double step_size = 0.0;
    int backtracks = 0;
    double grad_norm = 0.0;
};

struct OcpResult {
    ControlSeries U;
    ControlSeries gradient;
    AdjointSeries adjoint;
    double cost = 0.0;
    double kkt_residual = 0.0;
    double initial_kkt_residual = 0.0;
    std::vector<IterateRecord> history;
    bool converged = false;
    /// Set when the line search failed; the last accepted iterate is returned.
    bool line_search_failed = false;
    std::string message;
};

using IterateObserver = std::function<void(const IterateRecord&, const ControlSeries&)>;

/// Projected gradient descent with Armijo backtracking on the true cost:
///   U_{k+1} = P(U_k - s g_k),  J(U_{k+1}) <= J(U_k) - c |U_k - U_{k+1}|^2 / s.
OcpResult solve_ocp(const ReducedProblem& problem, const ControlBounds& bounds,
                    const ControlSeries& U0, const OptimizerOptions& options = {},
                    const IterateObserver& observer = {});

}  // namespace chb
