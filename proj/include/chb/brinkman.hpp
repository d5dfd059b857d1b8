#pragma once

#include <chb/field.hpp>

#include <memory>

namespace chb {

enum class BrinkmanMethod { Auto, Direct, Minres };

struct BrinkmanOptions {
    BrinkmanMethod method = BrinkmanMethod::Auto;
    /// Grids up to this many cells use the sparse direct factorization in Auto mode.
    std::size_t direct_max_cells = 128 * 128;
    double minres_tol = 1e-13;
    int minres_max_iter = 20000;
    /// Max-norm bound on the discrete divergence of the returned velocity.
    double div_tol = 1e-10;
};

struct BrinkmanSolution {
    VectorField u;
    ScalarField pressure;
    int iterations = 0;
    double divergence_max = 0.0;
};

/// Discrete saddle problem
///     -nu Lap_D u + eta u + grad pi = f,   div u = 0,   mean(pi) = 0
/// on the co-located grid (Lap_D: Dirichlet five-point, grad/div: the
/// field-core stencils with div = -grad^T). The assembled system is symmetric,
/// so the velocity solution operator f -> u is self-adjoint and `solve` also
/// serves as its transpose.
class BrinkmanSolver {
public:
    BrinkmanSolver(const Grid2D& grid, double nu, const ScalarField& eta,
                   const BrinkmanOptions& options = {});
    ~BrinkmanSolver();
    BrinkmanSolver(BrinkmanSolver&&) noexcept;
    BrinkmanSolver& operator=(BrinkmanSolver&&) noexcept;

    /// Throws NumericalError on non-convergence or divergence above div_tol.
    BrinkmanSolution solve(const VectorField& rhs) const;

    /// Applies -nu Lap_D u + eta u (the velocity block).
    VectorField apply_velocity_operator(const VectorField& u) const;

    const Grid2D& grid() const noexcept;
    double nu() const noexcept;
    const ScalarField& eta() const noexcept;
    bool uses_direct() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace chb
