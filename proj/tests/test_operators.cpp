#include <doctest.h>

#include <chb/error.hpp>
#include <chb/operators.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace chb;

namespace {

constexpr double pi = std::numbers::pi;

ScalarField random_field(const Grid2D& g, unsigned seed, bool interior_only = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const bool edge = i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1;
            f(i, j) = interior_only && edge ? 0.0 : u(rng);
        }
    return f;
}

double interior_max(const ScalarField& f, int margin) {
    const auto& g = f.grid();
    double m = 0.0;
    for (int j = margin; j < g.ny - margin; ++j)
        for (int i = margin; i < g.nx - margin; ++i) m = std::max(m, std::abs(f(i, j)));
    return m;
}

}  // namespace

TEST_CASE("grid geometry and validation") {
    Grid2D g(8, 4, 2.0, 1.0);
    CHECK(g.hx() == doctest::Approx(0.25));
    CHECK(g.x(0) == doctest::Approx(0.125));
    CHECK(g.y(3) == doctest::Approx(0.875));
    CHECK(g.index(3, 2) == 2 * 8 + 3);
    CHECK_THROWS_AS(Grid2D(3, 8), ConfigError);
    CHECK_THROWS_AS(Grid2D(8, 8, 0.0, 1.0), ConfigError);
}

TEST_CASE("field arithmetic rejects grid mismatch") {
    ScalarField a(Grid2D(8, 8), 1.0), b(Grid2D(8, 16), 1.0);
    CHECK_THROWS_AS(a += b, ConfigError);
    CHECK_THROWS_AS(inner(a, b), ConfigError);
}

TEST_CASE("gradient of constant and linear fields") {
    Grid2D g(16, 16);
    CHECK(gradient(ScalarField(g, 5.0)).max_abs() == 0.0);
    const auto gx = gradient(ScalarField::from_function(g, [](double x, double) { return x; }));
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx - 1; ++i) CHECK(gx.x(i, j) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gx.y.max_abs() == 0.0);
}

TEST_CASE("gradient converges at second order") {
    double err[2];
    int k = 0;
    for (int n : {32, 64}) {
        Grid2D g(n, n);
        const auto d = gradient(ScalarField::from_function(g, [](double x, double) { return std::cos(pi * x); }));
        const auto ex = ScalarField::from_function(g, [](double x, double) { return -pi * std::sin(pi * x); });
        err[k++] = (d.x - ex).max_abs();
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("divergence of gradient approximates the Laplacian at second order") {
    double err[2];
    int k = 0;
    for (int n : {32, 64}) {
        Grid2D g(n, n);
        auto f = ScalarField::from_function(g, [](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); });
        auto lap = divergence(gradient(f));
        auto ex = ScalarField::from_function(
            g, [](double x, double y) { return -2 * pi * pi * std::cos(pi * x) * std::cos(pi * y); });
        // Wide stencil touches the ghosts three cells in; compare away from them.
        ScalarField e = lap - ex;
        err[k++] = interior_max(e, n / 8);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("constant vector field has zero interior divergence") {
    Grid2D g(12, 10);
    const auto d = divergence(VectorField(g, 2.0, -3.0));
    CHECK(interior_max(d, 1) < 1e-12);
}

TEST_CASE("summation by parts for gradient and divergence") {
    Grid2D g(24, 20, 1.5, 1.0);
    for (unsigned seed = 1; seed <= 5; ++seed) {
        auto f = random_field(g, seed, true);
        VectorField v(random_field(g, 100 + seed, true), random_field(g, 200 + seed, true));
        const double lhs = inner(gradient(f), v) + inner(f, divergence(v));
        CHECK(std::abs(lhs) <= 1e-12 * l2_norm(f) * l2_norm(v));
        // The identity is exact for arbitrary (not only interior) fields.
        auto f2 = random_field(g, 300 + seed);
        VectorField v2(random_field(g, 400 + seed), random_field(g, 500 + seed));
        CHECK(std::abs(inner(gradient(f2), v2) + inner(f2, divergence(v2))) <=
              1e-12 * l2_norm(f2) * l2_norm(v2));
        CHECK((gradient_transpose(v2) + divergence(v2)).max_abs() < 1e-11);
    }
}

TEST_CASE("face operator transposes") {
    Grid2D g(9, 7);
    auto f = random_field(g, 7);
    FaceField q(g);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto& v : q.x) v = u(rng);
    for (auto& v : q.y) v = u(rng);
    auto fdot = [](const FaceField& a, const FaceField& b) {
        double s = 0;
        for (std::size_t k = 0; k < a.x.size(); ++k) s += a.x[k] * b.x[k];
        for (std::size_t k = 0; k < a.y.size(); ++k) s += a.y[k] * b.y[k];
        return s;
    };
    CHECK(fdot(face_average(f), q) == doctest::Approx(dot(f, face_average_transpose(q))).epsilon(1e-13));
    CHECK(fdot(face_difference(f), q) ==
          doctest::Approx(dot(f, face_difference_transpose(q))).epsilon(1e-13));
    CHECK((flux_divergence(q) + face_difference_transpose(q)).max_abs() < 1e-11);
}

TEST_CASE("variable coefficient Laplacian") {
    Grid2D g(20, 16);
    CHECK(variable_coefficient_laplacian(ScalarField(g, 1.0), ScalarField(g, 3.0)).max_abs() == 0.0);
    for (unsigned seed = 1; seed <= 5; ++seed) {
        auto c = random_field(g, seed);
        for (auto& v : c.raw()) v = std::abs(v) + 0.1;
        auto f = random_field(g, 50 + seed);
        auto r = variable_coefficient_laplacian(c, f);
        CHECK(std::abs(r.integral()) <= 1e-12 * std::max(1.0, l2_norm(r)));
    }
    ScalarField neg(g, 1.0);
    neg(3, 3) = -1e-3;
    CHECK_THROWS_AS(variable_coefficient_laplacian(neg, ScalarField(g, 1.0)), DomainError);
}

TEST_CASE("variable coefficient Laplacian converges at second order") {
    double err[2];
    int k = 0;
    for (int n : {32, 64}) {
        Grid2D g(n, n);
        auto f = ScalarField::from_function(g, [](double x, double) { return std::cos(pi * x); });
        auto ex = ScalarField::from_function(g, [](double x, double) { return -pi * pi * std::cos(pi * x); });
        err[k++] = (variable_coefficient_laplacian(ScalarField(g, 1.0), f) - ex).max_abs();
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("coefficient transpose of the variable coefficient Laplacian") {
    Grid2D g(10, 12);
    auto f = random_field(g, 1), c = random_field(g, 2), y = random_field(g, 3);
    for (auto& v : c.raw()) v = std::abs(v);
    const double lhs = dot(variable_coefficient_laplacian(c, f), y);
    const double rhs = dot(c, variable_coefficient_laplacian_coefficient_transpose(f, y));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("Dirichlet Laplacian is symmetric negative definite") {
    Grid2D g(10, 8);
    auto a = random_field(g, 11), b = random_field(g, 12);
    CHECK(dot(dirichlet_laplacian(a), b) == doctest::Approx(dot(a, dirichlet_laplacian(b))).epsilon(1e-12));
    CHECK(dot(dirichlet_laplacian(a), a) < 0.0);
    VectorField u(a, b);
    CHECK(dirichlet_gradient_energy(u) ==
          doctest::Approx(-(inner(dirichlet_laplacian(a), a) + inner(dirichlet_laplacian(b), b))).epsilon(1e-12));
}
