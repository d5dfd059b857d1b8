#pragma once

#include <chb/forward.hpp>
#include <chb/trajectory.hpp>

#include <vector>

namespace chb {

struct TangentState {
    ScalarField psi;  // psi^{n+1}
    VectorField w;    // w^n
};

/// psi^0..psi^N and w^0..w^{N-1}.
struct TangentSeries {
    std::vector<ScalarField> psi;
    std::vector<VectorField> w;
};

/// Sources for the discrete adjoint of the tangent map, expressed so that
/// the adjoint computes the gradient of the functional
///     G = sum_{n<N} <phi_src[n], psi^n> + sum_{n<N} dt <u_src[n], w^n> + <terminal, psi^N>
/// (Euclidean cell sums). Empty vectors mean zero.
struct AdjointSources {
    std::vector<ScalarField> phi_src;
    std::vector<VectorField> u_src;
    ScalarField terminal;
};

/// xi^0..xi^N and v^0..v^{N-1}. The derivative of G with respect to the
/// forcing h^n is dt v^n.
struct AdjointSeries {
    std::vector<ScalarField> xi;
    std::vector<VectorField> v;
};

/// Exact derivative of the discrete forward map and its transpose around a
/// stored trajectory.
class Sensitivity {
public:
    Sensitivity(const ForwardModel& model, const Trajectory& traj);

    /// Linearized step n: (psi^n, dU^n) -> (psi^{n+1}, w^n).
    TangentState tangent_step(const ScalarField& psi, int n, const VectorField* dU) const;
    /// Tangent response to a forcing perturbation (empty = zero), starting
    /// from psi^0 (null = zero).
    TangentSeries tangent_sweep(const ForceSeries& dU, const ScalarField* psi0 = nullptr) const;
    /// Backward sweep; xi^N = terminal exactly.
    AdjointSeries adjoint_sweep(const AdjointSources& src) const;

    const ForwardModel& model() const noexcept { return model_; }
    const Trajectory& trajectory() const noexcept { return traj_; }

private:
    struct Frozen;
    Frozen freeze(int n) const;

    const ForwardModel& model_;
    const Trajectory& traj_;
};

/// Options for the continuum adjoint residual.
struct AdjointResidualOptions {
    /// Cells closer than this physical distance to the wall are excluded.
    double wall_margin = 0.0;
    /// Read the nonlocal terms "grad J * (g)" of the adjoint equation as the
    /// literal (grad J) * . g instead of the transposed kernel
    /// int grad_y J(x - y) . g(y) dy. Only for reporting the discrepancy.
    bool literal_kernel_gradient = false;
};

/// Residual of the continuum adjoint equation
///   -xi' - u.grad xi + m'(phi)((grad a) phi - grad J*phi).grad xi
///        - grad J * (m(phi) grad xi) - (m(phi) a + lambda(phi)) lap xi
///        + ((grad a) phi - grad J*phi).v - grad J * (phi v) = source
/// evaluated on the discrete adjoint with centered differences
/// (xi' from the difference of levels n+1 and n; spatial terms on the
/// implicit level M(phi^n)^{-1} xi^{n+1}; coefficients and v at level n;
/// source phi_src[n]/dt).
/// Returns the max over steps of the cell-weighted L2 norm over the
/// retained cells, divided by the max L2 norm of the source when it is
/// nonzero.
double continuous_adjoint_residual(const ForwardModel& model, const Trajectory& traj,
                                   const AdjointSeries& adjoint, const AdjointSources& src,
                                   const AdjointResidualOptions& opts = {});

}  // namespace chb
