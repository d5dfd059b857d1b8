#include <chb/forward.hpp>

#include <chb/error.hpp>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chb {

namespace {

ScalarField eta_or_zero(const PhysicsConfig& c) {
    if (c.eta.size() == 0) return ScalarField(c.grid, 0.0);
    require_same_grid(c.eta.grid(), c.grid, "permeability");
    return c.eta;
}

PhysicsConfig normalized(PhysicsConfig c) {
    c.eta = eta_or_zero(c);
    if (!(c.nu > 0.0) || !std::isfinite(c.nu)) throw ConfigError("viscosity nu must be positive");
    for (double v : c.eta.values())
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError("permeability eta must be finite and non-negative");
    return c;
}

ScalarField map_field(const ScalarField& f, auto&& fn) {
    ScalarField out(f.grid());
    const auto n = static_cast<std::ptrdiff_t>(f.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = fn(f[k]);
    return out;
}

}  // namespace

ScalarField transport(const VectorField& u, const ScalarField& phi) {
    require_same_grid(u.grid(), phi.grid(), "transport");
    FaceField flux = face_average(phi);
    const FaceField ux = face_average(u.x), uy = face_average(u.y);
    for (std::size_t k = 0; k < flux.x.size(); ++k) flux.x[k] *= ux.x[k];
    for (std::size_t k = 0; k < flux.y.size(); ++k) flux.y[k] *= uy.y[k];
    return flux_divergence(flux);
}

ScalarField transport_phi_transpose(const VectorField& u, const ScalarField& chi) {
    // flux_divergence^T = -face_difference.
    FaceField z = face_difference(chi);
    const FaceField ux = face_average(u.x), uy = face_average(u.y);
    for (std::size_t k = 0; k < z.x.size(); ++k) z.x[k] *= -ux.x[k];
    for (std::size_t k = 0; k < z.y.size(); ++k) z.y[k] *= -uy.y[k];
    return face_average_transpose(z);
}

VectorField transport_u_transpose(const ScalarField& phi, const ScalarField& chi) {
    FaceField z = face_difference(chi);
    const FaceField p = face_average(phi);
    const Grid2D& g = phi.grid();
    FaceField zx(g), zy(g);
    for (std::size_t k = 0; k < z.x.size(); ++k) zx.x[k] = -z.x[k] * p.x[k];
    for (std::size_t k = 0; k < z.y.size(); ++k) zy.y[k] = -z.y[k] * p.y[k];
    return {face_average_transpose(zx), face_average_transpose(zy)};
}

double max_divergence(const VectorField& u) { return divergence(u).max_abs(); }

ForwardModel::ForwardModel(PhysicsConfig config, SolverOptions options)
    : config_(normalized(std::move(config))),
      options_(options),
      kernel_(config_.grid, config_.kernel),
      tables_(config_.potential, config_.mobility, true),
      report_(validate_assumptions(config_.potential, config_.mobility, kernel_, config_.eta,
                                   config_.nu)),
      brinkman_(config_.grid, config_.nu, config_.eta, options_.brinkman),
      grad_a_(gradient(kernel_.a())),
      face_diff_a_(face_difference(kernel_.a())) {
    if (!options_.allow_nonelliptic && !(report_.alpha1 > 0.0)) {
        std::ostringstream os;
        os << "implicit step is not elliptic: measured alpha1 = " << report_.alpha1
           << " (need m(s)(F''(s) + a(x)) > 0; a_min = " << report_.a_min << ")";
        throw AssumptionError(os.str());
    }
}

double ForwardModel::default_dt() const {
    const double h = std::min(grid().hx(), grid().hy());
    return 0.1 * h * h / report_.alpha1;
}

ScalarField ForwardModel::chemical_potential(const ScalarField& phi) const {
    require_same_grid(phi.grid(), grid(), "chemical_potential");
    const ScalarField jphi = kernel_.convolve(phi);
    const ScalarField& a = kernel_.a();
    ScalarField mu(grid());
    const auto n = static_cast<std::ptrdiff_t>(phi.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k)
        mu[k] = a[k] * phi[k] - jphi[k] + tables_.dF(phi[k]);
    return mu;
}

VectorField ForwardModel::korteweg_force(const ScalarField& phi) const {
    const ScalarField jphi = kernel_.convolve(phi);
    const VectorField gphi = gradient(phi);
    VectorField f(grid());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double half_sq = 0.5 * phi[k] * phi[k];
        f.x[k] = -grad_a_.x[k] * half_sq - jphi[k] * gphi.x[k];
        f.y[k] = -grad_a_.y[k] * half_sq - jphi[k] * gphi.y[k];
    }
    return f;
}

BrinkmanSolution ForwardModel::brinkman_solve(const ScalarField& phi, const VectorField* force) const {
    VectorField rhs = korteweg_force(phi);
    if (force) {
        require_same_grid(force->grid(), grid(), "forcing");
        rhs += *force;
    }
    return brinkman_.solve(rhs);
}

ScalarField ForwardModel::diffusion_coefficient(const ScalarField& phi) const {
    const ScalarField& a = kernel_.a();
    ScalarField c(grid());
    const auto n = static_cast<std::ptrdiff_t>(phi.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) c[k] = tables_.dBtilde(phi[k], a[k]);
    return c;
}

ScalarField ForwardModel::nonlocal_flux(const ScalarField& phi) const {
    const FaceField mf = face_average(map_field(phi, [this](double s) { return tables_.m(s); }));
    const FaceField pf = face_average(phi);
    FaceField flux = face_difference(kernel_.convolve(phi));
    for (std::size_t k = 0; k < flux.x.size(); ++k)
        flux.x[k] = mf.x[k] * (pf.x[k] * face_diff_a_.x[k] - flux.x[k]);
    for (std::size_t k = 0; k < flux.y.size(); ++k)
        flux.y[k] = mf.y[k] * (pf.y[k] * face_diff_a_.y[k] - flux.y[k]);
    return flux_divergence(flux);
}

StepResult ForwardModel::solve_implicit(const ScalarField& phi_frozen, const ScalarField& rhs,
                                        double dt) const {
    const Grid2D& g = grid();
    const ScalarField c = diffusion_coefficient(phi_frozen);
    for (std::size_t k = 0; k < c.size(); ++k)
        if (!(c[k] >= 0.0))
            throw DomainError("negative implicit diffusion coefficient " + std::to_string(c[k]));
    const FaceField cf = face_average(c);
    const Eigen::Index n = static_cast<Eigen::Index>(g.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 5);
    std::vector<double> diag(static_cast<std::size_t>(n), 1.0);
    auto couple = [&](std::size_t p, std::size_t q, double w) {
        diag[p] += w;
        diag[q] += w;
        trip.emplace_back(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q), -w);
        trip.emplace_back(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p), -w);
    };
    const double wx = dt / (g.hx() * g.hx()), wy = dt / (g.hy() * g.hy());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i)
            couple(g.index(i, j), g.index(i + 1, j), wx * cf.x[static_cast<std::size_t>(j) * (g.nx - 1) + i]);
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            couple(g.index(i, j), g.index(i, j + 1), wy * cf.y[static_cast<std::size_t>(j) * g.nx + i]);
    for (Eigen::Index k = 0; k < n; ++k) trip.emplace_back(k, k, diag[static_cast<std::size_t>(k)]);
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(options_.cg_tol);
    cg.setMaxIterations(options_.cg_max_iter);
    cg.compute(A);
    const Eigen::Map<const Eigen::VectorXd> b(rhs.raw().data(), n);
    Eigen::VectorXd x = cg.solveWithGuess(b, b);
    if (cg.info() != Eigen::Success || !x.allFinite())
        throw NumericalError("implicit Cahn-Hilliard solve did not converge", cg.error());

    StepResult out{ScalarField(g, std::vector<double>(x.data(), x.data() + n)),
                   static_cast<int>(cg.iterations())};
    // Columns of A sum to one, so the exact solution keeps sum(rhs); remove the
    // iteration error from the mean.
    const double shift = (rhs.sum() - out.phi.sum()) / static_cast<double>(n);
    for (auto& v : out.phi.raw()) v += shift;
    return out;
}

StepResult ForwardModel::ch_step(const ScalarField& phi, const VectorField& u, double dt) const {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    ScalarField rhs = phi;
    rhs.axpy(-dt, transport(u, phi));
    rhs.axpy(dt, nonlocal_flux(phi));
    return solve_implicit(phi, rhs, dt);
}

SolverState ForwardModel::initial_state(const ScalarField& phi0) const {
    require_same_grid(phi0.grid(), grid(), "initial phase");
    if (!phi0.all_finite()) throw ConfigError("initial phase contains non-finite values");
    SolverState s;
    s.phi = phi0;
    s.u = VectorField(grid());
    s.mu = chemical_potential(phi0);
    s.pressure = ScalarField(grid());
    return s;
}

SolverState ForwardModel::advance(const SolverState& s, double dt, const VectorField* force) const {
    SolverState next;
    BrinkmanSolution bs = brinkman_solve(s.phi, force);
    const Grid2D& g = grid();
    double cfl = 0.0;
    for (std::size_t k = 0; k < bs.u.x.size(); ++k)
        cfl = std::max(cfl, dt * (std::abs(bs.u.x[k]) / g.hx() + std::abs(bs.u.y[k]) / g.hy()));
    if (cfl > options_.cfl_max) {
        std::ostringstream os;
        os << "CFL condition violated: dt*|u|/h = " << cfl << " > " << options_.cfl_max;
        throw NumericalError(os.str(), cfl);
    }
    StepResult st = ch_step(s.phi, bs.u, dt);
    if (!st.phi.all_finite()) throw NumericalError("non-finite phase after step");
    next.phi = std::move(st.phi);
    next.mu = chemical_potential(next.phi);
    next.u = std::move(bs.u);
    next.pressure = std::move(bs.pressure);
    next.t = s.t + dt;
    next.step = s.step + 1;
    next.cg_iters = st.cg_iters;
    next.stokes_iters = bs.iterations;
    next.div_u_max = bs.divergence_max;
    return next;
}

EnergyReport ForwardModel::energy(const ScalarField& phi, const VectorField& u,
                                  const ScalarField* mu) const {
    const Grid2D& g = grid();
    const double w = g.cell_area();
    const ScalarField jphi = kernel_.convolve(phi);
    const ScalarField& a = kernel_.a();
    EnergyReport r;
    double fsum = 0.0, nl = 0.0, loc = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        fsum += tables_.F(phi[k]);
        nl += phi[k] * jphi[k];
        loc += a[k] * phi[k] * phi[k];
        r.max_abs_phi = std::max(r.max_abs_phi, std::abs(phi[k]));
    }
    r.energy_paper_form = w * (fsum - 0.5 * nl);
    r.energy = w * (fsum + 0.5 * loc - 0.5 * nl);
    r.mass = phi.integral();

    const ScalarField muf = mu ? *mu : chemical_potential(phi);
    const FaceField mf = face_average(map_field(phi, [this](double s) { return tables_.m(s); }));
    const FaceField dmu = face_difference(muf);
    double dm = 0.0;
    for (std::size_t k = 0; k < dmu.x.size(); ++k) dm += mf.x[k] * dmu.x[k] * dmu.x[k];
    for (std::size_t k = 0; k < dmu.y.size(); ++k) dm += mf.y[k] * dmu.y[k] * dmu.y[k];
    r.diss_mu = w * dm;
    if (u.x.size() == phi.size()) {
        r.diss_visc = config_.nu * dirichlet_gradient_energy(u) + 0.0;
        double dp = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k)
            dp += config_.eta[k] * (u.x[k] * u.x[k] + u.y[k] * u.y[k]);
        r.diss_perm = w * dp;
    }
    return r;
}

}  // namespace chb
