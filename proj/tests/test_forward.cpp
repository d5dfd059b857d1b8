#include <doctest.h>

#include <chb/error.hpp>
#include <chb/forward.hpp>
#include <chb/trajectory.hpp>

#include <cmath>
#include <random>

using namespace chb;

namespace {

PhysicsConfig base_config(int n, PotentialKind kind = PotentialKind::Logarithmic) {
    Grid2D g(n, n);
    PhysicsConfig pc{g, 1.0, ScalarField(g, 1.0), KernelSpec{}, PotentialSpec{}, MobilitySpec{}};
    pc.potential.kind = kind;
    if (kind == PotentialKind::DoubleObstacle) {
        // F'' = -1 in the interior, so a must dominate
        pc.kernel.strength = 6.0;
        pc.potential.delta = 0.1;
        pc.mobility.kind = MobilityKind::Cutoff;
    }
    return pc;
}

ScalarField smooth_phase(const Grid2D& g, double amp = 0.7) {
    return ScalarField::from_function(g, [amp](double x, double y) {
        return amp * std::cos(M_PI * x) * std::cos(2.0 * M_PI * y) + 0.1;
    });
}

// Random smooth field with |phi| <= bound, built from a few low Fourier modes.
ScalarField random_smooth(const Grid2D& g, unsigned seed, double bound) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double c[4][4];
    for (auto& row : c)
        for (double& v : row) v = u(rng);
    auto f = ScalarField::from_function(g, [&](double x, double y) {
        double s = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) s += c[p][q] * std::cos(p * M_PI * x) * std::cos(q * M_PI * y);
        return s;
    });
    f *= bound / f.max_abs();
    return f;
}

}  // namespace

TEST_CASE("chemical potential of constant states") {
    auto pc = base_config(16, PotentialKind::DoubleObstacle);
    ForwardModel dob(pc);
    CHECK(dob.chemical_potential(ScalarField(pc.grid, 0.0)).max_abs() == 0.0);

    ForwardModel lg(base_config(16));
    for (double c : {-0.6, 0.0, 0.3, 0.9}) {
        auto mu = lg.chemical_potential(ScalarField(pc.grid, c));
        const double want = lg.tables().dF(c);
        for (std::size_t k = 0; k < mu.size(); ++k) REQUIRE(mu[k] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("chemical potential of a spike matches direct summation") {
    auto pc = base_config(12);
    ForwardModel fm(pc);
    const Grid2D& g = pc.grid;
    ScalarField phi(g, 0.0);
    phi(5, 7) = 0.8;
    phi(2, 3) = -0.4;
    auto mu = fm.chemical_potential(phi);
    const Kernel& J = fm.kernel();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double conv = 0.0;
            for (int q = 0; q < g.ny; ++q)
                for (int p = 0; p < g.nx; ++p) conv += J.at(i - p, j - q) * phi(p, q);
            conv *= g.cell_area();
            double aa = 0.0;
            for (int q = 0; q < g.ny; ++q)
                for (int p = 0; p < g.nx; ++p) aa += J.at(i - p, j - q);
            aa *= g.cell_area();
            const double want = aa * phi(i, j) - conv + fm.tables().dF(phi(i, j));
            REQUIRE(std::abs(mu(i, j) - want) <= 1e-12);
        }
}

TEST_CASE("brinkman solve of trivial states") {
    auto pc = base_config(16);
    ForwardModel fm(pc);
    auto zero = fm.brinkman_solve(ScalarField(pc.grid, 0.0), nullptr);
    CHECK(zero.u.max_abs() == 0.0);
    CHECK(zero.pressure.max_abs() == 0.0);

    auto flat = fm.brinkman_solve(ScalarField(pc.grid, 0.4), nullptr);
    CHECK(l2_norm(flat.u) <= 1e-10);
    CHECK(max_divergence(flat.u) <= 1e-10);
}

TEST_CASE("constant states are fixed points") {
    for (auto kind : {PotentialKind::Logarithmic, PotentialKind::DoubleObstacle}) {
        auto pc = base_config(16, kind);
        ForwardModel fm(pc);
        for (double c : {-0.5, 0.2}) {
            ScalarField phi(pc.grid, c);
            auto r = fm.nonlocal_flux(phi);
            CHECK(r.max_abs() <= 1e-12);
            auto next = fm.ch_step(phi, VectorField(pc.grid), fm.default_dt());
            for (std::size_t k = 0; k < next.phi.size(); ++k) REQUIRE(std::abs(next.phi[k] - c) <= 1e-12);

            auto s = fm.initial_state(phi);
            for (int n = 0; n < 10; ++n) s = fm.advance(s, fm.default_dt(), nullptr);
            CHECK(s.u.max_abs() <= 1e-10);
            for (std::size_t k = 0; k < s.phi.size(); ++k) REQUIRE(std::abs(s.phi[k] - c) <= 1e-12);
        }
    }
}

TEST_CASE("mass is conserved with forcing") {
    auto pc = base_config(32);
    ForwardModel fm(pc);
    const Grid2D& g = pc.grid;
    auto phi0 = random_smooth(g, 7, 0.9);
    VectorField h(ScalarField::from_function(g, [](double, double y) { return 3.0 * std::sin(M_PI * y); }),
                  ScalarField::from_function(g, [](double x, double) { return x * x; }));
    const double m0 = phi0.mean();
    auto s = fm.initial_state(phi0);
    for (int n = 0; n < 50; ++n) {
        s = fm.advance(s, fm.default_dt(), &h);
        REQUIRE(std::abs(s.phi.mean() - m0) <= 1e-12 * (1.0 + std::abs(m0)));
        REQUIRE(s.div_u_max <= 1e-10);
    }
}

TEST_CASE("step doubling shows second order local error") {
    auto pc = base_config(24);
    SolverOptions opts;
    opts.cg_tol = 1e-15;
    ForwardModel fm(pc, opts);
    auto phi0 = smooth_phase(pc.grid);
    VectorField h(pc.grid, 0.5, -0.2);
    auto defect = [&](double dt) {
        auto one = fm.advance(fm.initial_state(phi0), dt, &h);
        auto two = fm.advance(fm.advance(fm.initial_state(phi0), dt / 2, &h), dt / 2, &h);
        return l2_norm(one.phi - two.phi);
    };
    const double dt = 0.02 * fm.default_dt();
    const double d1 = defect(dt), d2 = defect(dt / 2), d3 = defect(dt / 4);
    CHECK(std::log2(d1 / d2) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(d2 / d3) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("energy examples") {
    auto pc = base_config(16);
    ForwardModel fm(pc);
    const Grid2D& g = pc.grid;
    VectorField zero(g);

    auto e0 = fm.energy(ScalarField(g, 0.0), zero);
    CHECK(e0.energy_paper_form == doctest::Approx(0.1 * g.area()).epsilon(1e-13));
    CHECK(e0.energy == doctest::Approx(0.1 * g.area()).epsilon(1e-13));

    const double c = 0.35;
    auto ec = fm.energy(ScalarField(g, c), zero);
    const double asum = fm.kernel().a().sum() * g.cell_area();
    CHECK(ec.energy_paper_form - fm.tables().F(c) * g.area() == doctest::Approx(-0.5 * c * c * asum).epsilon(1e-12));

    auto phi = smooth_phase(g);
    auto e = fm.energy(phi, zero);
    const Kernel& J = fm.kernel();
    double fsum = 0.0, loc = 0.0, nl = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            fsum += fm.tables().F(phi(i, j));
            double conv = 0.0, aa = 0.0;
            for (int q = 0; q < g.ny; ++q)
                for (int p = 0; p < g.nx; ++p) {
                    conv += J.at(i - p, j - q) * phi(p, q);
                    aa += J.at(i - p, j - q);
                }
            const double w = g.cell_area();
            nl += phi(i, j) * conv * w;
            loc += aa * w * phi(i, j) * phi(i, j);
        }
    const double w = g.cell_area();
    CHECK(std::abs(e.energy_paper_form - w * (fsum - 0.5 * nl)) <= 1e-12);
    CHECK(std::abs(e.energy - w * (fsum + 0.5 * loc - 0.5 * nl)) <= 1e-12);
}

TEST_CASE("energy decays without forcing") {
    for (auto kind : {PotentialKind::Logarithmic, PotentialKind::DoubleObstacle}) {
        auto pc = base_config(32, kind);
        ForwardModel fm(pc);
        auto phi0 = random_smooth(pc.grid, 11, 0.9);
        double prev = fm.energy(phi0, VectorField(pc.grid)).energy;
        auto s = fm.initial_state(phi0);
        for (int n = 0; n < 100; ++n) {
            s = fm.advance(s, fm.default_dt(), nullptr);
            auto e = fm.energy(s.phi, s.u);
            REQUIRE(e.energy <= prev + 1e-14 * std::abs(prev));
            REQUIRE(e.diss_mu >= 0.0);
            REQUIRE(e.diss_visc >= 0.0);
            REQUIRE(e.diss_perm >= 0.0);
            prev = e.energy;
        }
    }
}

TEST_CASE("phase stays near the physical interval") {
    auto pc = base_config(32);
    ForwardModel fm(pc);
    auto phi0 = random_smooth(pc.grid, 3, 0.95);
    VectorField h(pc.grid, 1.0, 0.0);
    double worst = 0.0;
    run_forward(fm, phi0, fm.default_dt(), 100, ForceSeries(100, h), nullptr,
                [&](const SolverState& s, const EnergyReport&) { worst = std::max(worst, s.phi.max_abs()); });
    CHECK(worst <= 1.05);
}

TEST_CASE("non-elliptic configurations are refused") {
    auto pc = base_config(16);
    pc.kernel.strength = 0.2;
    CHECK_THROWS_AS(ForwardModel{pc}, AssumptionError);
    SolverOptions opts;
    opts.allow_nonelliptic = true;
    CHECK_NOTHROW(ForwardModel(pc, opts));
}

TEST_CASE("CFL violation is a numerical error") {
    auto pc = base_config(16);
    pc.nu = 1e-3;
    pc.eta = ScalarField(pc.grid, 1e-3);
    ForwardModel fm(pc);
    auto phi0 = smooth_phase(pc.grid);
    VectorField h(ScalarField::from_function(pc.grid, [](double, double y) { return 50.0 * std::sin(M_PI * y); }),
                  ScalarField(pc.grid, 0.0));
    CHECK_THROWS_AS(fm.advance(fm.initial_state(phi0), 10.0 * fm.default_dt(), &h), NumericalError);
}

TEST_CASE("trajectory spools to disk and reports missing slots") {
    auto pc = base_config(16);
    ForwardModel fm(pc);
    auto phi0 = smooth_phase(pc.grid);
    const double dt = fm.default_dt();
    VectorField h(pc.grid, 0.3, 0.1);
    Trajectory mem(pc.grid, dt, 6);
    Trajectory disk(pc.grid, dt, 6, 1);
    CHECK_FALSE(mem.spooled());
    CHECK(disk.spooled());
    CHECK_THROWS_AS(disk.phi(3), StateError);
    run_forward(fm, phi0, dt, 6, ForceSeries(6, h), &mem);
    run_forward(fm, phi0, dt, 6, ForceSeries(6, h), &disk);
    CHECK(mem.complete());
    CHECK(disk.complete());
    for (int n = 0; n <= 6; ++n) CHECK(mem.phi(n) == disk.phi(n));
    for (int n = 0; n < 6; ++n) CHECK(mem.u(n) == disk.u(n));
}
