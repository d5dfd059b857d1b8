#include <chb/sensitivity.hpp>

#include <chb/error.hpp>
#include <chb/operators.hpp>

#include <algorithm>
#include <cmath>

namespace chb {

namespace {

template <class Fn>
ScalarField map_field(const ScalarField& f, Fn&& fn) {
    ScalarField out(f.grid());
    const auto n = static_cast<std::ptrdiff_t>(f.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = fn(f[k]);
    return out;
}

ScalarField vdot(const VectorField& a, const VectorField& b) {
    ScalarField out(a.grid());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a.x[k] * b.x[k] + a.y[k] * b.y[k];
    return out;
}

VectorField scale(const ScalarField& s, const VectorField& v) {
    return {hadamard(s, v.x), hadamard(s, v.y)};
}

}  // namespace

/// Coefficients of step n, frozen at phi^n.
struct Sensitivity::Frozen {
    ScalarField phi, phi_next, jphi, m, dm, dc;
    VectorField u, gphi;
    FaceField mf, K, dphi_next;
};

Sensitivity::Sensitivity(const ForwardModel& model, const Trajectory& traj)
    : model_(model), traj_(traj) {
    if (!(traj.grid() == model.grid())) throw ConfigError("trajectory grid differs from the model grid");
}

Sensitivity::Frozen Sensitivity::freeze(int n) const {
    const auto& ot = model_.tables();
    const auto& a = model_.kernel().a();
    Frozen f;
    f.phi = traj_.phi(n);
    f.phi_next = traj_.phi(n + 1);
    f.u = traj_.u(n);
    f.jphi = model_.kernel().convolve(f.phi);
    f.gphi = gradient(f.phi);
    f.m = map_field(f.phi, [&](double s) { return ot.m(s); });
    f.dm = map_field(f.phi, [&](double s) { return ot.dm(s); });
    f.dc = ScalarField(f.phi.grid());
    const auto cells = static_cast<std::ptrdiff_t>(f.phi.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < cells; ++k) f.dc[k] = ot.d2Btilde(f.phi[k], a[k]);
    f.mf = face_average(f.m);
    // K = avg(phi) diff(a) - diff(J*phi) on faces.
    const FaceField pf = face_average(f.phi), da = face_difference(a);
    f.K = face_difference(f.jphi);
    for (std::size_t k = 0; k < f.K.x.size(); ++k) f.K.x[k] = pf.x[k] * da.x[k] - f.K.x[k];
    for (std::size_t k = 0; k < f.K.y.size(); ++k) f.K.y[k] = pf.y[k] * da.y[k] - f.K.y[k];
    f.dphi_next = face_difference(f.phi_next);
    return f;
}

TangentState Sensitivity::tangent_step(const ScalarField& psi, int n, const VectorField* dU) const {
    if (n < 0 || n >= traj_.steps()) throw StateError("tangent step index out of range");
    require_same_grid(psi.grid(), model_.grid(), "tangent_step");
    const Frozen f = freeze(n);
    const double dt = traj_.dt();
    const Kernel& J = model_.kernel();
    const ScalarField& a = J.a();
    const VectorField ga = gradient(a);

    // Linearized momentum forcing.
    const ScalarField jpsi = J.convolve(psi);
    const VectorField gpsi = gradient(psi);
    VectorField rhs(psi.grid());
    for (std::size_t k = 0; k < psi.size(); ++k) {
        rhs.x[k] = -ga.x[k] * f.phi[k] * psi[k] - jpsi[k] * f.gphi.x[k] - f.jphi[k] * gpsi.x[k];
        rhs.y[k] = -ga.y[k] * f.phi[k] * psi[k] - jpsi[k] * f.gphi.y[k] - f.jphi[k] * gpsi.y[k];
    }
    if (dU) rhs += *dU;
    VectorField w = model_.brinkman().solve(rhs).u;

    // Linearized nonlocal flux R'(phi) psi.
    const FaceField dmpsi = face_average(hadamard(f.dm, psi));
    const FaceField pf = face_average(psi), da = face_difference(a);
    FaceField flux = face_difference(jpsi);
    for (std::size_t k = 0; k < flux.x.size(); ++k)
        flux.x[k] = dmpsi.x[k] * f.K.x[k] + f.mf.x[k] * (pf.x[k] * da.x[k] - flux.x[k]);
    for (std::size_t k = 0; k < flux.y.size(); ++k)
        flux.y[k] = dmpsi.y[k] * f.K.y[k] + f.mf.y[k] * (pf.y[k] * da.y[k] - flux.y[k]);
    // Coefficient variation of the implicit operator acting on phi^{n+1}.
    FaceField cflux = face_average(hadamard(f.dc, psi));
    cflux *= f.dphi_next;
    flux += cflux;

    ScalarField q = psi;
    q.axpy(-dt, transport(w, f.phi));
    q.axpy(-dt, transport(f.u, psi));
    q.axpy(dt, flux_divergence(flux));
    return {model_.solve_implicit(f.phi, q, dt).phi, std::move(w)};
}

TangentSeries Sensitivity::tangent_sweep(const ForceSeries& dU, const ScalarField* psi0) const {
    const int N = traj_.steps();
    if (!dU.empty() && static_cast<int>(dU.size()) != N)
        throw ConfigError("perturbation series length does not match the trajectory");
    TangentSeries out;
    out.psi.reserve(static_cast<std::size_t>(N + 1));
    out.psi.push_back(psi0 ? *psi0 : ScalarField(model_.grid()));
    for (int n = 0; n < N; ++n) {
        auto st = tangent_step(out.psi.back(), n, dU.empty() ? nullptr : &dU[static_cast<std::size_t>(n)]);
        out.psi.push_back(std::move(st.psi));
        out.w.push_back(std::move(st.w));
    }
    return out;
}

AdjointSeries Sensitivity::adjoint_sweep(const AdjointSources& src) const {
    const int N = traj_.steps();
    const Grid2D& g = model_.grid();
    if (!src.phi_src.empty() && static_cast<int>(src.phi_src.size()) != N)
        throw ConfigError("adjoint phase sources must have one entry per step");
    if (!src.u_src.empty() && static_cast<int>(src.u_src.size()) != N)
        throw ConfigError("adjoint velocity sources must have one entry per step");
    const double dt = traj_.dt();
    const Kernel& J = model_.kernel();
    const ScalarField& a = J.a();
    const VectorField ga = gradient(a);
    const FaceField da = face_difference(a);

    AdjointSeries out;
    out.xi.assign(static_cast<std::size_t>(N + 1), ScalarField());
    out.v.assign(static_cast<std::size_t>(N), VectorField());
    out.xi[static_cast<std::size_t>(N)] = src.terminal.size() ? src.terminal : ScalarField(g);
    require_same_grid(out.xi.back().grid(), g, "adjoint terminal data");

    for (int n = N - 1; n >= 0; --n) {
        const Frozen f = freeze(n);
        const ScalarField chi = model_.solve_implicit(f.phi, out.xi[static_cast<std::size_t>(n + 1)], dt).phi;

        VectorField ups = src.u_src.empty() ? VectorField(g) : src.u_src[static_cast<std::size_t>(n)];
        ups -= transport_u_transpose(f.phi, chi);
        VectorField v = model_.brinkman().solve(ups).u;

        // z = flux_divergence^T chi.
        FaceField z = face_difference(chi);
        z *= -1.0;

        ScalarField lam = chi;
        lam.axpy(-dt, transport_phi_transpose(f.u, chi));

        // R'^T chi.
        FaceField kz = f.K * z;
        ScalarField rt = hadamard(f.dm, face_average_transpose(kz));
        FaceField maz = f.mf * z;
        FaceField madaz = maz;
        for (std::size_t k = 0; k < madaz.x.size(); ++k) madaz.x[k] *= da.x[k];
        for (std::size_t k = 0; k < madaz.y.size(); ++k) madaz.y[k] *= da.y[k];
        rt += face_average_transpose(madaz);
        rt -= J.convolve(face_difference_transpose(maz));
        lam.axpy(dt, rt);

        // Coefficient variation of the implicit operator.
        lam.axpy(dt, hadamard(f.dc, face_average_transpose(f.dphi_next * z)));

        // f'(phi)^T v.
        ScalarField ft = hadamard(f.phi, vdot(ga, v));
        ft += J.convolve(vdot(f.gphi, v));
        ft += gradient_transpose(scale(f.jphi, v));
        lam.axpy(-dt, ft);

        if (!src.phi_src.empty()) lam += src.phi_src[static_cast<std::size_t>(n)];
        out.xi[static_cast<std::size_t>(n)] = std::move(lam);
        out.v[static_cast<std::size_t>(n)] = std::move(v);
    }
    return out;
}

}  // namespace chb

namespace chb {

double continuous_adjoint_residual(const ForwardModel& model, const Trajectory& traj,
                                   const AdjointSeries& adjoint, const AdjointSources& src,
                                   const AdjointResidualOptions& opts) {
    const int N = traj.steps();
    if (static_cast<int>(adjoint.xi.size()) != N + 1 || static_cast<int>(adjoint.v.size()) != N)
        throw StateError("adjoint series does not cover the trajectory");
    const Grid2D& g = model.grid();
    const double dt = traj.dt();
    const Kernel& J = model.kernel();
    const auto& ot = model.tables();
    const ScalarField& a = J.a();
    const VectorField ga = gradient(a);
    const ScalarField one(g, 1.0);
    const double sgn = opts.literal_kernel_gradient ? -1.0 : 1.0;

    const int mx = std::max(1, static_cast<int>(std::ceil(opts.wall_margin / g.hx() - 1e-12)));
    const int my = std::max(1, static_cast<int>(std::ceil(opts.wall_margin / g.hy() - 1e-12)));
    auto norm = [&](const ScalarField& f) {
        double s = 0.0;
        for (int j = my; j < g.ny - my; ++j)
            for (int i = mx; i < g.nx - mx; ++i) s += f(i, j) * f(i, j);
        return std::sqrt(s * g.cell_area());
    };

    double rmax = 0.0, smax = 0.0;
    for (int n = 0; n < N; ++n) {
        const ScalarField phi = traj.phi(n);
        const VectorField u = traj.u(n);
        // Spatial terms act on the implicit level M(phi^n)^{-1} xi^{n+1} of the backward step.
        const ScalarField xi = model.solve_implicit(phi, adjoint.xi[static_cast<std::size_t>(n + 1)], dt).phi;
        const VectorField& v = adjoint.v[static_cast<std::size_t>(n)];
        const ScalarField jphi = J.convolve(phi);
        const VectorField gjphi = gradient(jphi);
        const VectorField gxi = gradient(xi);
        const ScalarField lap = variable_coefficient_laplacian(one, xi);

        ScalarField m(g), dm(g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            m[k] = ot.m(phi[k]);
            dm[k] = ot.dm(phi[k]);
        }
        // Transposed-kernel reading: int grad_y J(x-y).g(y) dy = div(J*g) under no-flux g.
        const VectorField mg{hadamard(m, gxi.x), hadamard(m, gxi.y)};
        const ScalarField t_mobility = divergence({J.convolve(mg.x), J.convolve(mg.y)});
        const ScalarField t_velocity = divergence({J.convolve(hadamard(phi, v.x)), J.convolve(hadamard(phi, v.y))});

        ScalarField r(g), s(g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double kx = ga.x[k] * phi[k] - gjphi.x[k];
            const double ky = ga.y[k] * phi[k] - gjphi.y[k];
            const double xt = (adjoint.xi[static_cast<std::size_t>(n + 1)][k] - adjoint.xi[static_cast<std::size_t>(n)][k]) / dt;
            const double c = ot.dBtilde(phi[k], a[k]);
            s[k] = src.phi_src.empty() ? 0.0 : src.phi_src[static_cast<std::size_t>(n)][k] / dt;
            r[k] = -xt - (u.x[k] * gxi.x[k] + u.y[k] * gxi.y[k]) +
                   dm[k] * (kx * gxi.x[k] + ky * gxi.y[k]) + sgn * t_mobility[k] - c * lap[k] +
                   (kx * v.x[k] + ky * v.y[k]) + sgn * t_velocity[k] - s[k];
        }
        rmax = std::max(rmax, norm(r));
        smax = std::max(smax, norm(s));
    }
    return smax > 0.0 ? rmax / smax : rmax;
}

}  // namespace chb
