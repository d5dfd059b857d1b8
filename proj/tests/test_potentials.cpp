#include <doctest.h>

#include <chb/error.hpp>
#include <chb/potentials.hpp>
#include <chb/validation.hpp>

#include <cmath>

using namespace chb;

namespace {

PotentialSpec log_spec(double delta = 0.05) {
    PotentialSpec p;
    p.kind = PotentialKind::Logarithmic;
    p.theta = 0.1;
    p.theta_c = 0.2;
    p.delta = delta;
    return p;
}

PotentialSpec do_spec(double delta = 0.1) {
    PotentialSpec p;
    p.kind = PotentialKind::DoubleObstacle;
    p.delta = delta;
    return p;
}

MobilitySpec degenerate() { return {}; }

MobilitySpec constant(double m0) {
    MobilitySpec m;
    m.kind = MobilityKind::Constant;
    m.m0 = m0;
    return m;
}

// Checks that derivative k+1 matches a central difference of derivative k on
// both sides of r0, and that derivatives 0..3 agree from the left and right.
template <class J>
void check_c3_at(const J& jet, double r0) {
    const double h = 1e-7;
    const auto l = jet(std::nextafter(r0, -10.0)), r = jet(std::nextafter(r0, 10.0));
    for (int k = 0; k < 4; ++k) CHECK(std::abs(l[k] - r[k]) <= 1e-9 * std::max(1.0, std::abs(l[k])));
    for (double c : {r0 - 10 * h, r0 + 10 * h})
        for (int k = 0; k < 3; ++k) {
            const double fd = (jet(c + h)[k] - jet(c - h)[k]) / (2 * h);
            CHECK(std::abs(fd - jet(c)[k + 1]) <= 1e-6 * std::max(1.0, std::abs(fd)));
        }
}

}  // namespace

TEST_CASE("double obstacle values") {
    const auto p = do_spec();
    CHECK(eval_potential(p, 0.0, false) == doctest::Approx(0.5));
    CHECK(eval_potential(p, 1.0, false) == 0.0);
    CHECK(eval_potential(p, 1.0001, false) == kInfinitePotential);
    CHECK(std::isfinite(eval_potential(p, 5.0, true)));
}

TEST_CASE("logarithmic values and domain") {
    const auto p = log_spec();
    CHECK(eval_potential(p, 0.0, false) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK_THROWS_AS(eval_potential(p, 1.0, false), DomainError);
    CHECK_THROWS_AS(eval_potential(p, -1.5, false), DomainError);
    CHECK(std::isfinite(eval_potential(p, 1.5, true)));
}

TEST_CASE("obstacle penalty branches") {
    for (double d : {0.5, 0.1, 0.01}) {
        CHECK(eval_beta_do(d, 0.5) == 0.0);
        CHECK(eval_beta_do(d, 1.0) == 0.0);
        CHECK(eval_beta_do(d, 1 + d) == doctest::Approx(d).epsilon(1e-13));
        const double c = 1 + d / 2, t = (1 + d) - c;
        CHECK(4 / (d * d) * t * t * t + t == doctest::Approx(d).epsilon(1e-13));
        for (double r : {0.3, 1.02, 1.3, 2.7, 11.0}) CHECK(eval_beta_do(d, -r) == eval_beta_do(d, r));
    }
}

TEST_CASE("regularized potentials are C3 across branch points") {
    for (double d : {0.5, 0.1, 0.05}) {
        const auto p = do_spec(d);
        auto jet = [&](double r) { return potential_jet(p, r, true); };
        for (double r0 : {1.0, 1.0 + d, -1.0, -1.0 - d}) check_c3_at(jet, r0);
    }
    for (double d : {0.2, 0.05}) {
        const auto p = log_spec(d);
        auto jet = [&](double r) { return potential_jet(p, r, true); };
        for (double r0 : {1.0 - d, -1.0 + d}) check_c3_at(jet, r0);
    }
}

TEST_CASE("obstacle regularization is exact on [-1, 1]") {
    const auto p = do_spec(0.1);
    double sup = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        const double r = -1.0 + k / 1000.0;
        sup = std::max(sup, std::abs(eval_potential(p, r, true) - eval_potential(p, r, false)));
    }
    CHECK(sup == 0.0);
}

TEST_CASE("logarithmic regularization error decreases with delta") {
    double prev = 1e300;
    for (double d : {0.1, 0.05, 0.025, 0.0125, 0.00625}) {
        const auto p = log_spec(d);
        double sup = 0.0;
        for (int k = 0; k <= 1980; ++k) {
            const double r = -0.99 + k / 1000.0;
            sup = std::max(sup, std::abs(eval_potential(p, r, true) - eval_potential(p, r, false)));
        }
        CHECK(sup < prev);
        prev = sup;
    }
}

TEST_CASE("lambda calculus") {
    SUBCASE("compensated logarithmic part") {
        OperatorTables ot(log_spec(), degenerate(), false);
        for (int k = -100; k <= 100; ++k) {
            const double s = k / 100.0;
            CHECK(std::abs(ot.lambda(s) - ot.lambda2(s) - 0.1) <= 1e-13);
            CHECK(ot.lambda1(s) == 0.1);
        }
        CHECK(ot.lambda(0.0) == doctest::Approx(-0.1).epsilon(1e-14));
        CHECK(ot.B1(0.5) == doctest::Approx(0.05).epsilon(1e-12));
        CHECK_THROWS_AS(ot.lambda(1.2), DomainError);
    }
    SUBCASE("regularized log matches inside the cut") {
        OperatorTables ot(log_spec(0.05), degenerate(), true);
        for (double s : {-0.9, 0.0, 0.5, 0.94}) CHECK(ot.lambda1(s) == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("constant mobility obstacle") {
        OperatorTables ot(do_spec(), constant(2.5), true);
        for (double s : {-0.7, 0.0, 0.3}) CHECK(ot.lambda2(s) == doctest::Approx(-2 * 2.5));
    }
    SUBCASE("non-compensated singularity") {
        OperatorTables ot(log_spec(), constant(1.0), false);
        CHECK_THROWS_AS(ot.lambda(1.0), DomainError);
        CHECK(std::isfinite(ot.lambda(0.999)));
    }
    SUBCASE("lambda derivative matches finite differences") {
        OperatorTables ot(log_spec(0.05), degenerate(), true);
        const double h = 1e-6;
        for (double s : {-0.99, -0.3, 0.2, 0.97}) {
            const double fd = (ot.lambda(s + h) - ot.lambda(s - h)) / (2 * h);
            CHECK(ot.dlambda(s) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("b and B primitives") {
    OperatorTables ot(log_spec(), degenerate(), false);
    CHECK(ot.b(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(ot.b(0.0) == 0.0);
    CHECK(ot.B(0.0) == 0.0);
    // B(s) = theta s + theta_c (s^3/3 - s) for the compensated log potential.
    for (double s : {-0.8, 0.3, 0.9}) {
        CHECK(ot.B(s) == doctest::Approx(0.1 * s + 0.2 * (s * s * s / 3 - s)).epsilon(1e-11));
        CHECK(ot.b(-s) == -ot.b(s));
        CHECK(ot.B(-s) == doctest::Approx(-ot.B(s)).epsilon(1e-12));
    }
    OperatorTables reg(do_spec(0.1), MobilitySpec{MobilityKind::Cutoff, 0.9, 1.0}, true);
    for (double s : {-1.05, 0.5, 0.95, 1.2}) {
        CHECK(reg.b(-s) == doctest::Approx(-reg.b(s)));
        CHECK(reg.B(-s) == doctest::Approx(-reg.B(s)).epsilon(1e-12));
        const double h = 1e-5;
        CHECK((reg.B(s + h) - reg.B(s - h)) / (2 * h) == doctest::Approx(reg.lambda(s)).epsilon(1e-7));
        CHECK((reg.b(s + h) - reg.b(s - h)) / (2 * h) == doctest::Approx(reg.m(s)).epsilon(1e-7));
    }
    CHECK(reg.dBtilde(0.3, 2.0) == doctest::Approx(reg.m(0.3) * 2.0 + reg.lambda(0.3)));
}

TEST_CASE("mobility kinds") {
    MobilitySpec cut{MobilityKind::Cutoff, 0.9, 1.0};
    CHECK(mobility_jet(cut, 0.95)[0] == doctest::Approx(1 - 0.81));
    CHECK(mobility_jet(cut, -4.0)[0] == doctest::Approx(1 - 0.81));
    CHECK(mobility_jet(degenerate(), 1.0)[0] == 0.0);
    CHECK(mobility_jet(degenerate(), 1.3)[0] == 0.0);
    CHECK_THROWS_AS(constant(0.0).validate(), ConfigError);
    CHECK_THROWS_AS(mobility_kind_from_string("linear"), ConfigError);
}

TEST_CASE("parameter validation") {
    auto p = log_spec();
    p.theta = 0.3;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = log_spec(0.7);
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK_THROWS_AS(potential_kind_from_string("quartic"), ConfigError);
}

TEST_CASE("assumption validator margins") {
    Grid2D g(16, 16);
    const ScalarField eta(g, 1.0);
    SUBCASE("logarithmic with compensating mobility") {
        KernelSpec ks;
        ks.strength = 1.0;
        Kernel k(g, ks);
        const auto rep = validate_assumptions(log_spec(), degenerate(), k, eta, 1.0);
        // alpha1 = min over s of theta + m (a - theta_c).
        const double expect = std::min(0.1, 0.1 + rep.a_min - 0.2);
        CHECK(rep.alpha1 == doctest::Approx(expect).epsilon(1e-9));
        CHECK(rep.alpha0 == doctest::Approx(0.1));
        if (rep.a_min >= 0.1) {
            CHECK(rep.all_passed());
        }
        CHECK(rep.find("J.even")->passed);
    }
    SUBCASE("obstacle with constant mobility needs a_min above one") {
        KernelSpec small;
        small.strength = 0.5;
        const auto weak = validate_assumptions(do_spec(), constant(1.0), Kernel(g, small), eta, 1.0);
        CHECK_FALSE(weak.find("A4")->passed);
        CHECK_FALSE(weak.find("H1")->passed);
        KernelSpec strong;
        strong.strength = 6.0;
        const auto ok = validate_assumptions(do_spec(), constant(1.0), Kernel(g, strong), eta, 1.0);
        CHECK(ok.a_min > 1.0);
        CHECK(ok.find("A4")->passed);
        CHECK(ok.alpha1 == doctest::Approx(ok.a_min - 1.0).epsilon(1e-9));
        CHECK(ok.find("A1")->waived);
        CHECK(ok.all_passed());
    }
    SUBCASE("negative permeability is reported") {
        ScalarField bad(g, 1.0);
        bad(2, 2) = -0.1;
        const auto rep = validate_assumptions(log_spec(), degenerate(), Kernel(g, KernelSpec{}), bad, 1.0);
        CHECK_FALSE(rep.find("N.eta")->passed);
        CHECK_FALSE(rep.all_passed());
    }
}
