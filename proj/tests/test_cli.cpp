#include <doctest.h>

#include <chb/app/commands.hpp>
#include <chb/snapshot.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace chb;
using namespace chb::app;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("chb-cli-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> csv_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> r;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
        rows.push_back(r);
    }
    return rows;
}

struct Run {
    int rc;
    std::string log;
};

Run run(const std::string& cmd, const RunConfig& cfg, const fs::path& out) {
    std::ostringstream log;
    CommandContext ctx{out, false, &log, &log};
    const int rc = run_command(cmd, cfg, ctx);
    return {rc, log.str()};
}

const char* small = R"(
grid: {nx: 16, ny: 16}
time: {T: 0.0078125, dt: 0.0009765625, snapshot_every: 4}
initial: {pattern: cosine, mean: 0.1, amplitude: 0.6, kx: 1, ky: 2}
tolerances: {cg_tol: 1.0e-13}
)";

}  // namespace

TEST_CASE("validate reports alpha0 = theta for the default potential") {
    TempDir t("validate");
    const auto r = run("validate", parse_config(""), t.path);
    CHECK(r.rc == 0);
    const auto j = nlohmann::json::parse(slurp(t.path / "validation.json"));
    CHECK(j["all_passed"] == true);
    CHECK(j["alpha0"].get<double>() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(j["kernel_evenness_defect"].get<double>() == 0.0);
}

TEST_CASE("validate fails on inverted theta and odd kernels") {
    TempDir t("validate-bad");
    auto r = run("validate", parse_config("physics: {potential: {theta: 0.3, theta_c: 0.2}}\n"), t.path);
    CHECK(r.rc == 3);
    auto j = nlohmann::json::parse(slurp(t.path / "validation.json"));
    bool params_failed = false;
    for (const auto& c : j["checks"])
        if (c["name"] == "params") params_failed = !c["passed"].get<bool>();
    CHECK(params_failed);

    r = run("validate", parse_config("grid: {nx: 16, ny: 16}\nphysics: {kernel: {odd_perturbation: 0.05}}\n"), t.path);
    CHECK(r.rc == 3);
    j = nlohmann::json::parse(slurp(t.path / "validation.json"));
    for (const auto& c : j["checks"])
        if (c["name"] == "J.even") CHECK_FALSE(c["passed"].get<bool>());
}

TEST_CASE("simulate of a constant state has constant diagnostics") {
    TempDir t("sim-const");
    auto cfg = parse_config(small);
    cfg.initial.pattern = "constant";
    cfg.initial.mean = 0.3;
    REQUIRE(run("simulate", cfg, t.path).rc == 0);
    const auto rows = csv_rows(t.path / "diagnostics.csv");
    REQUIRE(rows.size() == 9);
    for (const auto& r : rows) {
        CHECK(r[1] == doctest::Approx(rows[0][1]).epsilon(1e-13));
        CHECK(r[2] == doctest::Approx(rows[0][2]).epsilon(1e-13));
    }
    const auto phi = read_scalar_snapshot((t.path / "snapshots" / "phi_000008.chbf").string());
    CHECK(phi.max_abs() == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(fs::exists(t.path / "snapshots" / "u_000004.chbf"));
}

TEST_CASE("simulate is deterministic and dissipative") {
    TempDir a("sim-a"), b("sim-b");
    auto cfg = parse_config(small);
    cfg.initial.pattern = "spinodal";
    cfg.initial.amplitude = 0.5;
    cfg.seed = 42;
    REQUIRE(run("simulate", cfg, a.path).rc == 0);
    REQUIRE(run("simulate", cfg, b.path).rc == 0);
    CHECK(slurp(a.path / "diagnostics.csv") == slurp(b.path / "diagnostics.csv"));
    CHECK(slurp(a.path / "snapshots" / "phi_000008.chbf") == slurp(b.path / "snapshots" / "phi_000008.chbf"));
    const auto rows = csv_rows(a.path / "diagnostics.csv");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(rows[k][2] <= rows[k - 1][2]);
        CHECK(rows[k][7] <= 1e-10);
    }
}

TEST_CASE("exit codes for assumption and numerical failures") {
    TempDir t("codes");
    auto cfg = parse_config(small);
    cfg.physics.kernel.strength = 0.2;
    CHECK(run("simulate", cfg, t.path).rc == 3);

    auto cfl = parse_config(small);
    cfl.physics.nu = 1e-3;
    cfl.physics.eta = 1e-3;
    cfl.time.dt = 0.01;
    cfl.time.T = 0.05;
    cfl.forcing.kind = "shear";
    cfl.forcing.amplitude = 50.0;
    const auto r = run("simulate", cfl, t.path);
    CHECK(r.rc == 4);
    CHECK(r.log.find("CFL") != std::string::npos);
    CHECK(fs::exists(t.path / "diagnostics.csv"));
    const auto j = nlohmann::json::parse(slurp(t.path / "energy.json"));
    CHECK(j["status"] == "failed");

    CHECK(run("simulate", parse_config(small), fs::path()).rc == 2);
}

TEST_CASE("optimize with a degenerate box stops at once") {
    TempDir t("opt-degenerate");
    auto cfg = parse_config(small);
    cfg.optimizer.lower = cfg.optimizer.upper = 0.0;
    REQUIRE(run("optimize", cfg, t.path).rc == 0);
    CHECK(csv_rows(t.path / "optimize_log.csv").size() == 1);
    const auto U = read_vector_snapshot((t.path / "control" / "U_000003.chbf").string());
    CHECK(U.max_abs() == 0.0);
}

TEST_CASE("optimize resumed from a saved iterate reproduces the next iterate") {
    TempDir a("opt-a"), b("opt-b"), c("opt-c");
    auto cfg = parse_config(small);
    cfg.physics.nu = 0.01;
    cfg.physics.eta = 0.01;
    cfg.optimizer.options.kkt_tol = 0.0;
    cfg.optimizer.options.max_iters = 2;
    REQUIRE(run("optimize", cfg, a.path).rc == 0);
    cfg.optimizer.options.max_iters = 1;
    REQUIRE(run("optimize", cfg, b.path).rc == 0);
    cfg.optimizer.initial_control = (b.path / "control").string();
    REQUIRE(run("optimize", cfg, c.path).rc == 0);
    for (int n = 0; n < 8; ++n) {
        const auto f = series_file("control", "U", n);
        CHECK(slurp(a.path / f) == slurp(c.path / f));
    }
    const auto log = csv_rows(a.path / "optimize_log.csv");
    REQUIRE(log.size() == 3);
    CHECK(log[2][1] <= log[1][1]);
    CHECK(log[1][1] <= log[0][1]);
    CHECK(fs::exists(a.path / "adjoint" / "xi_000008.chbf"));
    CHECK(fs::exists(a.path / "states" / "phi_000008.chbf"));
    CHECK(fs::exists(a.path / "targets" / "phi_omega.chbf"));
}

TEST_CASE("check commands report small errors and zero rows") {
    TempDir t("checks");
    auto cfg = parse_config(small);
    cfg.forcing.kind = "vortex";
    cfg.checks.seeds = 2;
    cfg.tolerances.cg_tol = 1e-14;
    REQUIRE(run("check-adjoint", cfg, t.path).rc == 0);
    for (const auto& r : csv_rows(t.path / "dot_product.csv")) CHECK(r[3] <= 1e-10);

    cfg.targets.kind = "zero";
    cfg.checks.epsilons = {1e-2, 1e-3, 1e-4};
    REQUIRE(run("check-gradient", cfg, t.path).rc == 0);
    const auto j = nlohmann::json::parse(slurp(t.path / "taylor_summary.json"));
    CHECK(j["slope"].get<double>() == doctest::Approx(2.0).epsilon(0.05));

    cfg.checks.zero_direction = true;
    REQUIRE(run("check-adjoint", cfg, t.path).rc == 0);
    for (const auto& r : csv_rows(t.path / "dot_product.csv")) {
        CHECK(r[1] == 0.0);
        CHECK(r[2] == 0.0);
        CHECK(r[3] == 0.0);
    }
    REQUIRE(run("check-gradient", cfg, t.path).rc == 0);
    for (const auto& r : csv_rows(t.path / "taylor.csv")) {
        CHECK(r[1] == 0.0);
        CHECK(r[2] == 0.0);
    }
}

TEST_CASE("brinkman convergence driver") {
    TempDir t("conv");
    auto cfg = parse_config("convergence: {kind: brinkman, grids: [16, 32]}\n");
    REQUIRE(run("convergence", cfg, t.path).rc == 0);
    const auto rows = csv_rows(t.path / "convergence.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][4] > 1.8);
    CHECK(run("frobnicate", cfg, t.path).rc == 2);
}
