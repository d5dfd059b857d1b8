#include <chb/brinkman.hpp>
#include <chb/error.hpp>
#include <chb/operators.hpp>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include <cmath>
#include <string>
#include <vector>

namespace chb {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct BrinkmanSolver::Impl {
    Grid2D grid;
    double nu = 1.0;
    ScalarField eta;
    BrinkmanOptions options;
    bool direct = true;
    SpMat system;  // saddle matrix with pinned pressure
    Eigen::UmfPackLU<SpMat> lu;
    // MINRES preconditioner: incomplete Cholesky of the velocity block.
    SpMat velocity_block;
    Eigen::IncompleteCholesky<double> ichol;

    std::size_t n() const { return grid.size(); }
    std::size_t dim() const { return 3 * n(); }

    void assemble();
    Vec apply_preconditioner(const Vec& r) const;
    Vec minres(const Vec& b, int& iterations) const;
};

void BrinkmanSolver::Impl::assemble() {
    const int nx = grid.nx, ny = grid.ny;
    const std::size_t N = n();
    const double ihx2 = 1.0 / (grid.hx() * grid.hx());
    const double ihy2 = 1.0 / (grid.hy() * grid.hy());
    const double sx = 0.5 / grid.hx();
    const double sy = 0.5 / grid.hy();

    std::vector<Eigen::Triplet<double>> kt;  // velocity block (one component)
    std::vector<Eigen::Triplet<double>> trip;
    kt.reserve(5 * N);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int r = static_cast<int>(grid.index(i, j));
            double diag = eta[r];
            auto nb = [&](int ii, int jj, double w) {
                if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) {
                    diag += nu * w;  // odd ghost: -(-u_0) contributes +w
                } else {
                    kt.emplace_back(r, static_cast<int>(grid.index(ii, jj)), -nu * w);
                }
                diag += nu * w;
            };
            nb(i + 1, j, ihx2);
            nb(i - 1, j, ihx2);
            nb(i, j + 1, ihy2);
            nb(i, j - 1, ihy2);
            kt.emplace_back(r, r, diag);
        }
    }
    velocity_block.resize(static_cast<int>(N), static_cast<int>(N));
    velocity_block.setFromTriplets(kt.begin(), kt.end());

    for (const auto& t : kt) {
        trip.emplace_back(t.row(), t.col(), t.value());
        trip.emplace_back(t.row() + static_cast<int>(N), t.col() + static_cast<int>(N), t.value());
    }
    // Gradient blocks G (rows: velocity, cols: pressure) and G^T.
    const int p0 = static_cast<int>(2 * N);
    for (int j = 0; j < ny; ++j) {
        const int jm = j > 0 ? j - 1 : 0;
        const int jp = j + 1 < ny ? j + 1 : ny - 1;
        for (int i = 0; i < nx; ++i) {
            const int im = i > 0 ? i - 1 : 0;
            const int ip = i + 1 < nx ? i + 1 : nx - 1;
            const int r = static_cast<int>(grid.index(i, j));
            auto add_g = [&](int row, int col, double v) {
                trip.emplace_back(row, p0 + col, v);
                trip.emplace_back(p0 + col, row, v);
            };
            add_g(r, static_cast<int>(grid.index(ip, j)), sx);
            add_g(r, static_cast<int>(grid.index(im, j)), -sx);
            add_g(r + static_cast<int>(N), static_cast<int>(grid.index(i, jp)), sy);
            add_g(r + static_cast<int>(N), static_cast<int>(grid.index(i, jm)), -sy);
        }
    }
    // The pressure is pinned at cell 0 (row and column replaced by identity)
    // and shifted to zero mean after the solve; the velocity is independent
    // of how the constant mode is fixed.
    std::erase_if(trip, [&](const Eigen::Triplet<double>& t) {
        return t.row() == p0 || t.col() == p0;
    });
    trip.emplace_back(p0, p0, 1.0);
    system.resize(static_cast<int>(dim()), static_cast<int>(dim()));
    system.setFromTriplets(trip.begin(), trip.end());  // duplicates are summed
    system.makeCompressed();
}

Vec BrinkmanSolver::Impl::apply_preconditioner(const Vec& r) const {
    const int N = static_cast<int>(n());
    Vec z(r.size());
    z.segment(0, N) = ichol.solve(r.segment(0, N));
    z.segment(N, N) = ichol.solve(r.segment(N, N));
    // Pressure block: inverse of the Stokes Schur complement S ~ I/nu.
    const double scale = nu;
    z.segment(2 * N, N) = scale * r.segment(2 * N, N);
    return z;
}

// Preconditioned MINRES for symmetric indefinite systems (Paige & Saunders
// recurrence with an SPD preconditioner).
Vec BrinkmanSolver::Impl::minres(const Vec& b, int& iterations) const {
    const Eigen::Index m = b.size();
    Vec x = Vec::Zero(m);
    Vec r1 = b;
    Vec y = apply_preconditioner(r1);
    double beta1 = r1.dot(y);
    if (beta1 <= 0.0) {
        iterations = 0;
        return x;
    }
    beta1 = std::sqrt(beta1);
    double beta = beta1, oldb = 0.0, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    Vec w = Vec::Zero(m), w2 = Vec::Zero(m), r2 = r1, v;
    const double bnorm = b.norm();
    iterations = 0;
    for (int it = 1; it <= options.minres_max_iter; ++it) {
        iterations = it;
        const double s = 1.0 / beta;
        v = s * y;
        y = system * v;
        if (it >= 2) y -= (beta / oldb) * r1;
        const double alfa = v.dot(y);
        y -= (alfa / beta) * r2;
        r1 = r2;
        r2 = y;
        y = apply_preconditioner(r2);
        oldb = beta;
        beta = r2.dot(y);
        if (beta < 0.0) throw NumericalError("Brinkman MINRES: indefinite preconditioner");
        beta = std::sqrt(beta);
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::hypot(gbar, beta);
        gamma = std::max(gamma, 1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;
        Vec w1 = w2;
        w2 = w;
        w = (v - oldeps * w1 - delta * w2) / gamma;
        x += phi * w;
        if (it % 25 == 0 || phibar < options.minres_tol * beta1) {
            const double res = (b - system * x).norm();
            if (res <= options.minres_tol * bnorm) return x;
        }
    }
    const double res = (b - system * x).norm();
    throw NumericalError("Brinkman MINRES did not converge in " +
                             std::to_string(options.minres_max_iter) +
                             " iterations, relative residual " + std::to_string(res / bnorm),
                         res / bnorm);
}

BrinkmanSolver::BrinkmanSolver(const Grid2D& grid, double nu, const ScalarField& eta,
                               const BrinkmanOptions& options)
    : impl_(std::make_unique<Impl>()) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("Brinkman: viscosity must be > 0");
    require_same_grid(grid, eta.grid(), "BrinkmanSolver");
    for (std::size_t k = 0; k < eta.size(); ++k) {
        if (!(eta[k] >= 0.0) || !std::isfinite(eta[k])) {
            throw ConfigError("Brinkman: permeability eta must be finite and >= 0");
        }
    }
    impl_->grid = grid;
    impl_->nu = nu;
    impl_->eta = eta;
    impl_->options = options;
    impl_->direct = options.method == BrinkmanMethod::Direct ||
                    (options.method == BrinkmanMethod::Auto &&
                     grid.size() <= options.direct_max_cells);
    impl_->assemble();
    if (impl_->direct) {
        impl_->lu.compute(impl_->system);
        if (impl_->lu.info() != Eigen::Success) {
            throw NumericalError("Brinkman: sparse LU factorization failed");
        }
    } else {
        impl_->ichol.compute(impl_->velocity_block);
        if (impl_->ichol.info() != Eigen::Success) {
            throw NumericalError("Brinkman: incomplete Cholesky preconditioner failed");
        }
    }
}

BrinkmanSolver::~BrinkmanSolver() = default;
BrinkmanSolver::BrinkmanSolver(BrinkmanSolver&&) noexcept = default;
BrinkmanSolver& BrinkmanSolver::operator=(BrinkmanSolver&&) noexcept = default;

const Grid2D& BrinkmanSolver::grid() const noexcept { return impl_->grid; }
double BrinkmanSolver::nu() const noexcept { return impl_->nu; }
const ScalarField& BrinkmanSolver::eta() const noexcept { return impl_->eta; }
bool BrinkmanSolver::uses_direct() const noexcept { return impl_->direct; }

BrinkmanSolution BrinkmanSolver::solve(const VectorField& rhs) const {
    const Grid2D& g = impl_->grid;
    require_same_grid(g, rhs.grid(), "BrinkmanSolver::solve");
    const std::size_t N = g.size();
    const auto idx = [](std::size_t k) { return static_cast<Eigen::Index>(k); };
    Vec b = Vec::Zero(idx(impl_->dim()));
    for (std::size_t k = 0; k < N; ++k) {
        b(idx(k)) = rhs.x[k];
        b(idx(N + k)) = rhs.y[k];
    }
    BrinkmanSolution out;
    out.u = VectorField(g);
    out.pressure = ScalarField(g);
    if (b.squaredNorm() == 0.0) return out;

    Vec x;
    if (impl_->direct) {
        x = impl_->lu.solve(b);
        out.iterations = 1;
    } else {
        x = impl_->minres(b, out.iterations);
    }
    const double div_tol = impl_->options.div_tol;
    for (int pass = 0;; ++pass) {
        for (std::size_t k = 0; k < N; ++k) {
            out.u.x[k] = x(idx(k));
            out.u.y[k] = x(idx(N + k));
        }
        if (!out.u.all_finite()) throw NumericalError("Brinkman: non-finite solution");
        out.divergence_max = divergence(out.u).max_abs();
        // Relative to the velocity scale so the bound is independent of the
        // forcing magnitude.
        const double scale = std::max(1.0, out.u.max_abs());
        if (out.divergence_max <= 1e-2 * div_tol * scale) break;
        if (!impl_->direct || pass == 3) {
            if (out.divergence_max <= div_tol * scale) break;
            throw NumericalError("Brinkman: divergence " + std::to_string(out.divergence_max) +
                                     " exceeds div_tol",
                                 out.divergence_max);
        }
        // Iterative refinement on the direct path.
        const Vec r = b - impl_->system * x;
        x += impl_->lu.solve(r);
        ++out.iterations;
    }
    for (std::size_t k = 0; k < N; ++k) out.pressure[k] = x(idx(2 * N + k));
    const double pmean = out.pressure.mean();
    for (std::size_t k = 0; k < N; ++k) out.pressure[k] -= pmean;
    if (!out.pressure.all_finite()) throw NumericalError("Brinkman: non-finite pressure");
    return out;
}

VectorField BrinkmanSolver::apply_velocity_operator(const VectorField& u) const {
    VectorField out(impl_->grid);
    const ScalarField lx = dirichlet_laplacian(u.x);
    const ScalarField ly = dirichlet_laplacian(u.y);
    for (std::size_t k = 0; k < u.x.size(); ++k) {
        out.x[k] = -impl_->nu * lx[k] + impl_->eta[k] * u.x[k];
        out.y[k] = -impl_->nu * ly[k] + impl_->eta[k] * u.y[k];
    }
    return out;
}

}  // namespace chb
