#include <doctest.h>

#include <chb/manufactured.hpp>

#include <chb/brinkman.hpp>
#include <chb/operators.hpp>

#include <cmath>
#include <random>

using namespace chb;

namespace {

VectorField random_vector(const Grid2D& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorField v(g);
    for (auto& x : v.x.raw()) x = u(rng);
    for (auto& x : v.y.raw()) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("manufactured Brinkman solution converges at second order") {
    BrinkmanManufactured ms;
    double err[3];
    int k = 0;
    for (int n : {16, 32, 64}) {
        Grid2D g(n, n);
        BrinkmanSolver solver(g, ms.nu, ScalarField(g, ms.eta));
        const auto sol = solver.solve(ms.forcing(g));
        err[k++] = (sol.u - ms.velocity(g)).max_abs();
        CHECK(sol.divergence_max <= 1e-10);
        CHECK(std::abs(sol.pressure.mean()) < 1e-12);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("gradient forcing is absorbed by the pressure") {
    Grid2D g(16, 16);
    BrinkmanSolver solver(g, 0.5, ScalarField(g, 2.0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    ScalarField q(g);
    for (auto& v : q.raw()) v = u(rng);
    const auto sol = solver.solve(gradient(q));
    CHECK(sol.u.max_abs() < 1e-10);
}

TEST_CASE("velocity solution operator is self-adjoint") {
    Grid2D g(12, 10, 1.2, 1.0);
    ScalarField eta(g, 1.0);
    for (int i = 0; i < g.nx; ++i) eta(i, 2) = 3.0;
    BrinkmanSolver solver(g, 0.3, eta);
    const auto f = random_vector(g, 1), h = random_vector(g, 2);
    const double lhs = dot(solver.solve(f).u, h), rhs = dot(f, solver.solve(h).u);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
}

TEST_CASE("iterative and direct Brinkman paths agree") {
    Grid2D g(16, 16);
    const auto f = random_vector(g, 3);
    BrinkmanOptions direct;
    direct.method = BrinkmanMethod::Direct;
    BrinkmanOptions iter;
    iter.method = BrinkmanMethod::Minres;
    BrinkmanSolver a(g, 1.0, ScalarField(g, 1.0), direct), b(g, 1.0, ScalarField(g, 1.0), iter);
    CHECK(a.uses_direct());
    CHECK_FALSE(b.uses_direct());
    const auto ua = a.solve(f), ub = b.solve(f);
    CHECK(ub.iterations > 0);
    CHECK((ua.u - ub.u).max_abs() <= 1e-8 * std::max(1.0, ua.u.max_abs()));
    CHECK(ub.divergence_max <= 1e-10);
}

TEST_CASE("Brinkman energy identity") {
    // <K u, u> = <f, u> for the divergence-free solution.
    Grid2D g(16, 16);
    BrinkmanSolver solver(g, 0.7, ScalarField(g, 0.4));
    const auto f = random_vector(g, 5);
    const auto u = solver.solve(f).u;
    CHECK(inner(solver.apply_velocity_operator(u), u) == doctest::Approx(inner(f, u)).epsilon(1e-9));
}
