#pragma once

#include <chb/brinkman.hpp>
#include <chb/field.hpp>
#include <chb/kernel.hpp>
#include <chb/operators.hpp>
#include <chb/potentials.hpp>
#include <chb/validation.hpp>

#include <functional>
#include <vector>

namespace chb {

struct PhysicsConfig {
    Grid2D grid;
    double nu = 1.0;
    /// Permeability; empty means eta = 0 everywhere.
    ScalarField eta;
    KernelSpec kernel;
    PotentialSpec potential;
    MobilitySpec mobility;
};

struct SolverOptions {
    /// Relative residual for the implicit Cahn-Hilliard solve.
    double cg_tol = 1e-10;
    int cg_max_iter = 5000;
    BrinkmanOptions brinkman;
    /// Largest admissible dt * (|u_x|/hx + |u_y|/hy).
    double cfl_max = 1.0;
    /// Skip the alpha1 > 0 refusal (tests only).
    bool allow_nonelliptic = false;
};

struct SolverState {
    double t = 0.0;
    long step = 0;
    ScalarField phi;
    /// Velocity and pressure of the last Brinkman solve (at phi of the previous step).
    VectorField u;
    ScalarField mu;
    ScalarField pressure;
    int cg_iters = 0;
    int stokes_iters = 0;
    double div_u_max = 0.0;
};

struct EnergyReport {
    /// Lyapunov free energy: int F(phi) + 1/2 int a phi^2 - 1/2 int phi (J*phi).
    double energy = 0.0;
    /// int F(phi) - 1/2 int phi (J*phi), the functional without the a phi^2 term.
    double energy_paper_form = 0.0;
    double diss_mu = 0.0;    // int m(phi) |grad mu|^2
    double diss_visc = 0.0;  // nu int |grad u|^2
    double diss_perm = 0.0;  // int eta |u|^2
    double mass = 0.0;
    double max_abs_phi = 0.0;
};

struct StepResult {
    ScalarField phi;
    int cg_iters = 0;
};

/// Time-dependent body force h^n, n = 0..N-1; an empty series means h = 0.
using ForceSeries = std::vector<VectorField>;

/// One time step of the discrete model:
///   mu^n  = a phi^n - J*phi^n + F_delta'(phi^n)
///   u^n   = L( -(grad a) (phi^n)^2 / 2 - (J*phi^n) grad phi^n + h^n )
///   M(phi^n) phi^{n+1} = phi^n - dt T(u^n, phi^n) + dt R(phi^n)
/// with L the Brinkman solution operator, M = I - dt div(c grad .),
/// c = m(phi) a + lambda(phi), T the conservative face-averaged transport and R
/// the explicit nonlocal flux div(m ((grad a) phi - grad J*phi)).
class ForwardModel {
public:
    /// Throws AssumptionError when the measured alpha1 is not positive.
    ForwardModel(PhysicsConfig config, SolverOptions options = {});

    const PhysicsConfig& config() const noexcept { return config_; }
    const SolverOptions& options() const noexcept { return options_; }
    const Grid2D& grid() const noexcept { return config_.grid; }
    const Kernel& kernel() const noexcept { return kernel_; }
    const OperatorTables& tables() const noexcept { return tables_; }
    const BrinkmanSolver& brinkman() const noexcept { return brinkman_; }
    const ValidationReport& validation() const noexcept { return report_; }
    double alpha1() const noexcept { return report_.alpha1; }

    /// 0.1 min(hx, hy)^2 / alpha1.
    double default_dt() const;

    ScalarField chemical_potential(const ScalarField& phi) const;
    /// Phase part of the momentum forcing, equal to mu grad phi up to a gradient.
    VectorField korteweg_force(const ScalarField& phi) const;
    BrinkmanSolution brinkman_solve(const ScalarField& phi, const VectorField* force) const;

    /// Implicit diffusion coefficient c = m(phi) a + lambda(phi).
    ScalarField diffusion_coefficient(const ScalarField& phi) const;
    /// Explicit nonlocal flux term R(phi).
    ScalarField nonlocal_flux(const ScalarField& phi) const;
    /// Solves M(phi_frozen) x = rhs by CG; throws NumericalError on failure.
    StepResult solve_implicit(const ScalarField& phi_frozen, const ScalarField& rhs,
                              double dt) const;
    /// Cahn-Hilliard update for given velocity.
    StepResult ch_step(const ScalarField& phi, const VectorField& u, double dt) const;

    /// mu -> u -> phi; throws NumericalError on CFL violation or solver failure.
    SolverState advance(const SolverState& s, double dt, const VectorField* force) const;

    SolverState initial_state(const ScalarField& phi0) const;
    EnergyReport energy(const ScalarField& phi, const VectorField& u,
                        const ScalarField* mu = nullptr) const;

private:
    PhysicsConfig config_;
    SolverOptions options_;
    Kernel kernel_;
    OperatorTables tables_;
    ValidationReport report_;
    BrinkmanSolver brinkman_;
    VectorField grad_a_;
    FaceField face_diff_a_;
};

/// Conservative face-averaged transport div(avg(u) avg(phi)).
ScalarField transport(const VectorField& u, const ScalarField& phi);
/// Transpose of phi -> transport(u, phi).
ScalarField transport_phi_transpose(const VectorField& u, const ScalarField& chi);
/// Transpose of u -> transport(u, phi).
VectorField transport_u_transpose(const ScalarField& phi, const ScalarField& chi);

/// Max-norm of the discrete divergence.
double max_divergence(const VectorField& u);

}  // namespace chb
