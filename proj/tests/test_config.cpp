#include <doctest.h>

#include <chb/app/config.hpp>
#include <chb/error.hpp>

#include <string>

using namespace chb;
using namespace chb::app;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "cfg.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("empty config gives defaults") {
    const auto c = parse_config("");
    CHECK(c.grid.nx == 64);
    CHECK(c.physics.potential.kind == PotentialKind::Logarithmic);
    CHECK(c.physics.potential.theta == 0.1);
    CHECK(c.optimizer.options.kkt_tol == 1e-5);
    CHECK(c.optimizer.options.initial_step == 1.0);
    CHECK(c.optimizer.options.backtrack_factor == 0.5);
    CHECK(c.optimizer.options.max_backtracks == 30);
    CHECK(c.tolerances.div_tol == 1e-10);
}

TEST_CASE("values are read into their sections") {
    const auto c = parse_config(R"(
grid: {nx: 20, ny: 10, lx: 2.0}
physics:
  nu: 0.5
  kernel: {profile: constant, strength: 0.3}
  potential: {kind: do, delta: 0.1}
  mobility: {kind: cutoff, epsilon: 0.8}
initial: {pattern: bubble, radius: 0.2}
targets: {kind: inverse_crime, control: {kind: constant, x: 0.1, y: -0.2}}
tolerances: {kkt_tol: 1.0e-3}
checks: {epsilons: [0.1, 0.01]}
seed: 99
)");
    CHECK(c.grid.nx == 20);
    CHECK(c.grid.lx == 2.0);
    CHECK(c.grid.ly == 1.0);
    CHECK(c.physics.nu == 0.5);
    CHECK(c.physics.kernel.profile == KernelProfile::Constant);
    CHECK(c.physics.potential.kind == PotentialKind::DoubleObstacle);
    CHECK(c.physics.mobility.kind == MobilityKind::Cutoff);
    CHECK(c.targets.control.y == -0.2);
    CHECK(c.optimizer.options.kkt_tol == 1e-3);
    CHECK(c.checks.epsilons.size() == 2);
    CHECK(c.seed == 99);
}

TEST_CASE("unknown keys are rejected with location") {
    const auto msg = error_of("grid: {nx: 8}\nphysics:\n  kernel:\n    sgma: 0.1\n");
    CHECK(msg.find("cfg.yaml:4:5") != std::string::npos);
    CHECK(msg.find("physics.kernel.sgma") != std::string::npos);
    CHECK(msg.find("unknown key") != std::string::npos);
    CHECK(error_of("bogus: 1\n").find("bogus") != std::string::npos);
    CHECK_FALSE(error_of("targets: {control: {knd: vortex}}\n").empty());
}

TEST_CASE("type, range and syntax errors") {
    CHECK(error_of("grid: {nx: abc}\n").find("grid.nx") != std::string::npos);
    CHECK(error_of("grid: {nx: 1}\n").find("grid.nx") != std::string::npos);
    CHECK(error_of("grid: 3\n").find("expected a mapping") != std::string::npos);
    CHECK(error_of("physics: {potential: {kind: quartic}}\n").find("physics.potential.kind") != std::string::npos);
    CHECK(error_of("time: {T: -1}\n").find("time.T") != std::string::npos);
    CHECK(error_of("optimizer: {lower: 1, upper: 0}\n").find("optimizer.lower") != std::string::npos);
    CHECK(error_of("physics: {nu: .nan}\n").find("finite") != std::string::npos);
    CHECK(error_of("grid: [1, 2\n").find("syntax") != std::string::npos);
    CHECK(error_of("initial: {pattern: file}\n").find("initial.path") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.yaml"), ConfigError);
}

TEST_CASE("potential parameter relations are left to validation") {
    const auto c = parse_config("physics: {potential: {theta: 0.3, theta_c: 0.2}}\n");
    CHECK(c.physics.potential.theta == 0.3);
}

TEST_CASE("resolved yaml round trips") {
    auto c = parse_config("grid: {nx: 12}\nphysics: {nu: 0.25}\nchecks: {epsilons: [0.5, 0.25, 0.125]}\nseed: 5\n");
    const auto text = to_yaml(c);
    const auto back = parse_config(text, "resolved");
    CHECK(to_yaml(back) == text);
    CHECK(back.grid.nx == 12);
    CHECK(back.physics.nu == 0.25);
    CHECK(back.seed == 5);
}

TEST_CASE("time axis takes equal steps not exceeding dt") {
    auto c = parse_config("grid: {nx: 8, ny: 8}\ntime: {T: 0.01, dt: 0.003}\n");
    ForwardModel fm(make_physics(c), make_solver_options(c));
    const auto ax = make_time_axis(c, fm);
    CHECK(ax.steps == 4);
    CHECK(ax.dt == doctest::Approx(0.0025));
    c.time.dt = 0.0;
    CHECK(make_time_axis(c, fm).dt <= fm.default_dt());
}

TEST_CASE("initial patterns respect the cap and the seed") {
    auto c = parse_config("grid: {nx: 16, ny: 16}\ninitial: {pattern: spinodal, mean: 0.1, amplitude: 0.5}\nseed: 4\n");
    const Grid2D g = make_grid(c);
    const auto a = make_initial(c, g), b = make_initial(c, g);
    CHECK(a == b);
    CHECK(a.max_abs() <= 0.6 + 1e-15);
    c.seed = 5;
    CHECK_FALSE(make_initial(c, g) == a);
    c.initial.mean = 0.0;
    c.initial.amplitude = 0.97;
    CHECK_THROWS_AS(make_initial(c, g), ConfigError);
}

TEST_CASE("odd kernel hook breaks evenness only") {
    auto c = parse_config("grid: {nx: 16, ny: 16}\nphysics: {kernel: {odd_perturbation: 0.1}}\n");
    const auto k = make_validation_kernel(c, make_grid(c));
    CHECK(k.evenness_defect() > 0.0);
    c.physics.kernel_odd_perturbation = 0.0;
    CHECK(make_validation_kernel(c, make_grid(c)).evenness_defect() == 0.0);
}
