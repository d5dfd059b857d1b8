#include <chb/app/commands.hpp>

#include <chb/error.hpp>
#include <chb/manufactured.hpp>
#include <chb/sensitivity.hpp>
#include <chb/snapshot.hpp>
#include <chb/trajectory.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

namespace chb::app {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::ostream& logger(const CommandContext& ctx) { return ctx.log ? *ctx.log : std::cout; }
std::ostream& errors(const CommandContext& ctx) { return ctx.err ? *ctx.err : std::cerr; }

void say(const CommandContext& ctx, const std::string& line) {
    if (!ctx.quiet) logger(ctx) << line << '\n';
}

fs::path require_out(const CommandContext& ctx, const char* cmd) {
    if (ctx.out.empty()) throw ConfigError(std::string(cmd) + " needs an output directory (--out)");
    fs::create_directories(ctx.out);
    return ctx.out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Csv {
public:
    Csv(const fs::path& path, std::initializer_list<const char*> cols) : os_(path) {
        if (!os_) throw ConfigError("cannot write '" + path.string() + "'");
        bool first = true;
        for (const char* c : cols) {
            os_ << (first ? "" : ",") << c;
            first = false;
        }
        os_ << '\n';
    }
    template <class... T>
    void row(const T&... v) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(v), first = false), ...);
        os_ << '\n';
        os_.flush();
    }

private:
    static std::string cell(double v) { return fmt(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(unsigned v) { return std::to_string(v); }
    std::ofstream os_;
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write '" + p.string() + "'");
    os << text;
}

json energy_json(const EnergyReport& e) {
    return {{"energy", e.energy},   {"energy_paper_form", e.energy_paper_form},
            {"diss_mu", e.diss_mu}, {"diss_visc", e.diss_visc},
            {"diss_perm", e.diss_perm}, {"mass", e.mass},
            {"max_abs_phi", e.max_abs_phi}};
}

/// Validation, then the model; assumption failures raise AssumptionError.
ForwardModel prepare_model(const RunConfig& cfg, const CommandContext& ctx) {
    const auto report = validate_run(cfg);
    if (!ctx.out.empty()) {
        fs::create_directories(ctx.out);
        write_text(ctx.out / "validation.json", validation_json(report, make_validation_kernel(cfg, make_grid(cfg))));
        write_text(ctx.out / "config.resolved.yaml", to_yaml(cfg));
    }
    if (!report.all_passed()) {
        std::string failed;
        for (const auto& c : report.checks)
            if (!c.passed && !c.waived) failed += (failed.empty() ? "" : ", ") + c.name;
        throw AssumptionError("assumption checks failed: " + failed);
    }
    return ForwardModel(make_physics(cfg), make_solver_options(cfg));
}

std::size_t memory_limit(const RunConfig& cfg) {
    return static_cast<std::size_t>(cfg.solver.memory_limit_mb * 1024.0 * 1024.0);
}

VectorField random_vector(const Grid2D& g, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    VectorField v(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        v.x[k] = nd(rng);
        v.y[k] = nd(rng);
    }
    return v;
}

ScalarField random_scalar(const Grid2D& g, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    ScalarField f(g);
    for (std::size_t k = 0; k < g.size(); ++k) f[k] = nd(rng);
    return f;
}

ControlSeries control_or_zero(const ForcingConfig& f, const Grid2D& g, int steps) {
    auto s = make_forcing(f, g, steps);
    if (s.empty()) s.assign(static_cast<std::size_t>(steps), VectorField(g));
    return s;
}

}  // namespace

std::string series_file(const fs::path& dir, const char* stem, int n) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06d.chbf", stem, n);
    return (dir / buf).string();
}

ControlSeries read_control_series(const fs::path& dir, const Grid2D& g, int steps) {
    ControlSeries U;
    for (int n = 0; n < steps; ++n) {
        const auto p = series_file(dir, "U", n);
        if (!fs::exists(p)) throw ConfigError("control series is missing '" + p + "'");
        U.push_back(read_vector_snapshot(p));
        require_same_grid(U.back().grid(), g, "initial_control");
    }
    return U;
}

ValidationReport validate_run(const RunConfig& cfg) {
    const Grid2D g = make_grid(cfg);
    const PhysicsConfig pc = make_physics(cfg);
    const Kernel k = make_validation_kernel(cfg, g);
    ValidationReport r = validate_assumptions(pc.potential, pc.mobility, k, pc.eta, pc.nu);
    const double radius = cfg.physics.kernel.radius > 0.0 ? cfg.physics.kernel.radius : 4.0 * cfg.physics.kernel.sigma;
    const double h = std::max(g.hx(), g.hy());
    AssumptionCheck res{"grid.resolution", radius >= 2.0 * h, false, radius / h,
                        "kernel support radius / cell size (need >= 2)"};
    if (cfg.physics.kernel.profile == KernelProfile::Constant) {
        res.passed = true;
        res.waived = true;
    }
    r.checks.push_back(res);
    return r;
}

std::string validation_json(const ValidationReport& r, const Kernel& kernel) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"waived", c.waived}, {"value", c.value},
                          {"detail", c.detail}});
    json j = {{"all_passed", r.all_passed()}, {"alpha0", r.alpha0}, {"alpha1", r.alpha1},
              {"c0", r.c0},                   {"a_min", r.a_min},   {"a_max", r.a_max},
              {"kernel_evenness_defect", kernel.evenness_defect()}, {"checks", checks}};
    return j.dump(2) + "\n";
}

TrackingTargets make_targets(const RunConfig& cfg, const ForwardModel& model, const ScalarField& phi0,
                             double dt, int steps) {
    const Grid2D& g = model.grid();
    TrackingTargets t;
    if (cfg.targets.kind == "zero") {
        t.phi_d.assign(static_cast<std::size_t>(steps), ScalarField(g));
        t.u_d.assign(static_cast<std::size_t>(steps), VectorField(g));
        t.phi_omega = ScalarField(g);
    } else if (cfg.targets.kind == "file") {
        const fs::path dir = cfg.targets.path;
        for (int n = 0; n < steps; ++n) {
            const auto pp = series_file(dir, "phi_d", n), up = series_file(dir, "u_d", n);
            if (!fs::exists(pp) || !fs::exists(up))
                throw ConfigError("target series is missing step " + std::to_string(n) + " in '" + dir.string() + "'");
            t.phi_d.push_back(read_scalar_snapshot(pp));
            t.u_d.push_back(read_vector_snapshot(up));
        }
        const auto op = (dir / "phi_omega.chbf").string();
        if (!fs::exists(op)) throw ConfigError("target file '" + op + "' not found");
        t.phi_omega = read_scalar_snapshot(op);
    } else {
        Trajectory traj(g, dt, steps, memory_limit(cfg));
        run_forward(model, phi0, dt, steps, control_or_zero(cfg.targets.control, g, steps), &traj);
        for (int n = 0; n < steps; ++n) {
            t.phi_d.push_back(traj.phi(n));
            t.u_d.push_back(traj.u(n));
        }
        t.phi_omega = traj.phi(steps);
    }
    check_targets(t, g, steps);
    return t;
}

int cmd_validate(const RunConfig& cfg, const CommandContext& ctx) {
    const auto report = validate_run(cfg);
    const Kernel k = make_validation_kernel(cfg, make_grid(cfg));
    if (!ctx.out.empty()) {
        fs::create_directories(ctx.out);
        write_text(ctx.out / "validation.json", validation_json(report, k));
    }
    if (!ctx.quiet) {
        logger(ctx) << report.summary();
        logger(ctx) << "alpha0 " << fmt(report.alpha0) << "  alpha1 " << fmt(report.alpha1) << "  c0 "
                    << fmt(report.c0) << "  a_min " << fmt(report.a_min) << "  evenness defect "
                    << fmt(k.evenness_defect()) << '\n';
    }
    return report.all_passed() ? 0 : 3;
}

int cmd_simulate(const RunConfig& cfg, const CommandContext& ctx) {
    const fs::path out = require_out(ctx, "simulate");
    const ForwardModel model = prepare_model(cfg, ctx);
    const Grid2D& g = model.grid();
    const auto [dt, steps] = make_time_axis(cfg, model);
    const ScalarField phi0 = make_initial(cfg, g);
    const ForceSeries h = make_forcing(cfg.forcing, g, steps);
    say(ctx, "simulate: " + std::to_string(g.nx) + "x" + std::to_string(g.ny) + ", " + std::to_string(steps) +
                 " steps of dt = " + fmt(dt));

    fs::create_directories(out / "snapshots");
    Csv diag(out / "diagnostics.csv", {"t", "mass", "energy", "diss_mu", "diss_visc", "diss_perm", "max_abs_phi",
                                       "div_u_max", "cg_iters", "stokes_iters"});
    json summary = {{"dt", dt}, {"steps", steps}, {"T", dt * steps}};
    EnergyReport first, last;
    double max_increase = -std::numeric_limits<double>::infinity();
    long last_step = -1;
    auto observer = [&](const SolverState& s, const EnergyReport& e) {
        diag.row(s.t, e.mass, e.energy, e.diss_mu, e.diss_visc, e.diss_perm, e.max_abs_phi, s.div_u_max, s.cg_iters,
                 s.stokes_iters);
        if (s.step == 0) first = e;
        else max_increase = std::max(max_increase, e.energy - last.energy);
        last = e;
        last_step = s.step;
        const bool snap = s.step == 0 || s.step == steps ||
                          (cfg.time.snapshot_every > 0 && s.step % cfg.time.snapshot_every == 0);
        if (snap) {
            write_snapshot(series_file(out / "snapshots", "phi", static_cast<int>(s.step)), s.phi);
            write_snapshot(series_file(out / "snapshots", "u", static_cast<int>(s.step)), s.u);
        }
        if (!ctx.quiet && steps >= 10 && s.step > 0 && s.step % (steps / 10) == 0)
            logger(ctx) << "  step " << s.step << "/" << steps << "  E = " << fmt(e.energy)
                        << "  max|phi| = " << fmt(e.max_abs_phi) << '\n';
    };
    try {
        run_forward(model, phi0, dt, steps, h, nullptr, observer);
    } catch (const Error& e) {
        summary["status"] = "failed";
        summary["error"] = e.what();
        summary["last_step"] = last_step;
        write_text(out / "energy.json", summary.dump(2) + "\n");
        throw;
    }
    summary["status"] = "ok";
    summary["initial"] = energy_json(first);
    summary["final"] = energy_json(last);
    summary["max_energy_increase"] = steps > 0 ? max_increase : 0.0;
    summary["mass_drift"] = last.mass - first.mass;
    write_text(out / "energy.json", summary.dump(2) + "\n");
    say(ctx, "done: E " + fmt(first.energy) + " -> " + fmt(last.energy) + ", mass drift " +
                 fmt(last.mass - first.mass));
    return 0;
}

int cmd_optimize(const RunConfig& cfg, const CommandContext& ctx) {
    const fs::path out = require_out(ctx, "optimize");
    const ForwardModel model = prepare_model(cfg, ctx);
    const Grid2D& g = model.grid();
    const auto [dt, steps] = make_time_axis(cfg, model);
    const ScalarField phi0 = make_initial(cfg, g);
    TrackingTargets targets = make_targets(cfg, model, phi0, dt, steps);
    if (cfg.targets.kind == "inverse_crime") {
        const fs::path td = out / "targets";
        fs::create_directories(td);
        for (int n = 0; n < steps; ++n) {
            write_snapshot(series_file(td, "phi_d", n), targets.phi_d[static_cast<std::size_t>(n)]);
            write_snapshot(series_file(td, "u_d", n), targets.u_d[static_cast<std::size_t>(n)]);
        }
        write_snapshot((td / "phi_omega.chbf").string(), targets.phi_omega);
    }
    const ReducedProblem problem(model, phi0, dt, steps, std::move(targets));
    const ControlBounds bounds = make_bounds(cfg, g);
    const ControlSeries U0 = cfg.optimizer.initial_control.empty()
                                 ? problem.zero_control()
                                 : read_control_series(cfg.optimizer.initial_control, g, steps);
    say(ctx, "optimize: " + std::to_string(g.nx) + "x" + std::to_string(g.ny) + ", " + std::to_string(steps) +
                 " steps of dt = " + fmt(dt));

    Csv log(out / "optimize_log.csv", {"iter", "cost", "kkt_residual", "step_size", "backtracks", "grad_norm"});
    auto observer = [&](const IterateRecord& r, const ControlSeries&) {
        log.row(r.iter, r.cost, r.kkt_residual, r.step_size, r.backtracks, r.grad_norm);
        if (!ctx.quiet)
            logger(ctx) << "  iter " << r.iter << "  J = " << fmt(r.cost) << "  kkt = " << fmt(r.kkt_residual)
                        << "  s = " << fmt(r.step_size) << '\n';
    };
    const OcpResult res = solve_ocp(problem, bounds, U0, cfg.optimizer.options, observer);

    for (const char* d : {"control", "adjoint", "states"}) fs::create_directories(out / d);
    for (int n = 0; n < steps; ++n) {
        const auto k = static_cast<std::size_t>(n);
        write_snapshot(series_file(out / "control", "U", n), res.U[k]);
        write_snapshot(series_file(out / "adjoint", "v", n), res.adjoint.v[k]);
    }
    for (int n = 0; n <= steps; ++n)
        write_snapshot(series_file(out / "adjoint", "xi", n), res.adjoint.xi[static_cast<std::size_t>(n)]);
    {
        Trajectory traj(g, dt, steps, memory_limit(cfg));
        run_forward(model, phi0, dt, steps, res.U, &traj);
        for (int n = 0; n <= steps; ++n) write_snapshot(series_file(out / "states", "phi", n), traj.phi(n));
        for (int n = 0; n < steps; ++n) write_snapshot(series_file(out / "states", "u", n), traj.u(n));
    }
    const auto vi = sample_variational_inequality(res.U, res.gradient, bounds, dt, 100, static_cast<unsigned>(cfg.seed));
    const double J0 = res.history.front().cost;
    json summary = {{"iterations", static_cast<int>(res.history.size()) - 1},
                    {"initial_cost", J0},
                    {"final_cost", res.cost},
                    {"cost_reduction", J0 > 0.0 ? 1.0 - res.cost / J0 : 0.0},
                    {"initial_kkt_residual", res.initial_kkt_residual},
                    {"final_kkt_residual", res.kkt_residual},
                    {"converged", res.converged},
                    {"line_search_failed", res.line_search_failed},
                    {"message", res.message},
                    {"variational_inequality", {{"samples", 100}, {"worst", vi.worst}, {"tolerance", vi.tolerance}, {"passed", vi.passed}}}};
    write_text(out / "summary.json", summary.dump(2) + "\n");
    say(ctx, res.message + ": J " + fmt(J0) + " -> " + fmt(res.cost));
    return res.line_search_failed ? 4 : 0;
}

int cmd_check_gradient(const RunConfig& cfg, const CommandContext& ctx) {
    const fs::path out = require_out(ctx, "check-gradient");
    const ForwardModel model = prepare_model(cfg, ctx);
    const Grid2D& g = model.grid();
    const auto [dt, steps] = make_time_axis(cfg, model);
    const ScalarField phi0 = make_initial(cfg, g);
    const ReducedProblem problem(model, phi0, dt, steps, make_targets(cfg, model, phi0, dt, steps));
    const ControlSeries U = control_or_zero(cfg.forcing, g, steps);
    std::mt19937_64 rng(cfg.seed);
    ControlSeries dir = problem.zero_control();
    if (!cfg.checks.zero_direction)
        for (auto& d : dir) d = random_vector(g, rng);
    const auto grad = problem.gradient(U);
    const double dJ = st_inner(grad.g, dir, dt);

    Csv csv(out / "taylor.csv", {"epsilon_or_seed", "lhs", "rhs", "rel_err"});
    std::vector<double> le, lr;
    for (double eps : cfg.checks.epsilons) {
        ControlSeries Ue = U;
        for (std::size_t n = 0; n < Ue.size(); ++n) Ue[n].axpy(eps, dir[n]);
        const double lhs = problem.cost(Ue) - grad.cost;
        const double rhs = eps * dJ;
        const double rem = std::abs(lhs - rhs);
        csv.row(eps, lhs, rhs, rhs != 0.0 ? rem / std::abs(rhs) : rem);
        if (rem > 0.0) {
            le.push_back(std::log(eps));
            lr.push_back(std::log(rem));
        }
    }
    double slope = std::numeric_limits<double>::quiet_NaN();
    if (le.size() >= 2) {
        const double n = static_cast<double>(le.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = 0; k < le.size(); ++k) {
            sx += le[k];
            sy += lr[k];
            sxx += le[k] * le[k];
            sxy += le[k] * lr[k];
        }
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    const bool zero = cfg.checks.zero_direction;
    const bool ok = zero || (slope >= 1.9 && slope <= 2.1);
    write_text(out / "taylor_summary.json",
               json({{"slope", zero ? json(nullptr) : json(slope)}, {"passed", ok}, {"zero_direction", zero}}).dump(2) + "\n");
    say(ctx, zero ? std::string("zero direction: all rows zero") : "Taylor remainder slope " + fmt(slope));
    return ok ? 0 : 4;
}

int cmd_check_adjoint(const RunConfig& cfg, const CommandContext& ctx) {
    const fs::path out = require_out(ctx, "check-adjoint");
    const ForwardModel model = prepare_model(cfg, ctx);
    const Grid2D& g = model.grid();
    const auto [dt, steps] = make_time_axis(cfg, model);
    const ScalarField phi0 = make_initial(cfg, g);
    Trajectory traj(g, dt, steps, memory_limit(cfg));
    run_forward(model, phi0, dt, steps, make_forcing(cfg.forcing, g, steps), &traj);
    const Sensitivity sens(model, traj);

    Csv csv(out / "dot_product.csv", {"epsilon_or_seed", "lhs", "rhs", "rel_err"});
    double worst = 0.0;
    for (int s = 1; s <= cfg.checks.seeds; ++s) {
        std::mt19937_64 rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(s));
        ForceSeries dU(static_cast<std::size_t>(steps), VectorField(g));
        if (!cfg.checks.zero_direction)
            for (auto& d : dU) d = random_vector(g, rng);
        AdjointSources src;
        for (int n = 0; n < steps; ++n) src.phi_src.push_back(random_scalar(g, rng));
        for (int n = 0; n < steps; ++n) src.u_src.push_back(random_vector(g, rng));
        src.terminal = random_scalar(g, rng);
        const auto tan = sens.tangent_sweep(dU);
        const auto adj = sens.adjoint_sweep(src);
        double lhs = dot(src.terminal, tan.psi.back()), rhs = 0.0;
        for (int n = 0; n < steps; ++n) {
            const auto k = static_cast<std::size_t>(n);
            lhs += dot(src.phi_src[k], tan.psi[k]) + dt * dot(src.u_src[k], tan.w[k]);
            rhs += dt * dot(dU[k], adj.v[k]);
        }
        const double scale = std::max(std::abs(lhs), std::abs(rhs));
        const double rel = scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
        worst = std::max(worst, rel);
        csv.row(static_cast<double>(s), lhs, rhs, rel);
    }
    say(ctx, "dot-product test: worst relative error " + fmt(worst));
    return worst <= 1e-8 ? 0 : 4;
}

int cmd_convergence(const RunConfig& cfg, const CommandContext& ctx) {
    const fs::path out = require_out(ctx, "convergence");
    if (cfg.convergence.kind == "brinkman") {
        if (cfg.grid.lx != 1.0 || cfg.grid.ly != 1.0)
            throw ConfigError("brinkman convergence uses the unit square (grid.lx = grid.ly = 1)");
        BrinkmanManufactured ms{cfg.physics.nu, cfg.physics.eta};
        Csv csv(out / "convergence.csv", {"n", "h", "error_l2", "error_max", "order_l2", "order_max", "div_max"});
        double prev_l2 = 0.0, prev_max = 0.0, prev_h = 0.0, worst_div = 0.0;
        for (int n : cfg.convergence.grids) {
            const Grid2D g(n, n);
            BrinkmanSolver solver(g, ms.nu, ScalarField(g, ms.eta), make_solver_options(cfg).brinkman);
            const auto sol = solver.solve(ms.forcing(g));
            const auto err = sol.u - ms.velocity(g);
            const double el2 = l2_norm(err), emax = err.max_abs(), h = g.hx();
            const double o2 = prev_h > 0 ? std::log(prev_l2 / el2) / std::log(prev_h / h) : 0.0;
            const double om = prev_h > 0 ? std::log(prev_max / emax) / std::log(prev_h / h) : 0.0;
            csv.row(n, h, el2, emax, o2, om, sol.divergence_max);
            say(ctx, "n = " + std::to_string(n) + "  L2 error " + fmt(el2) + "  order " + fmt(o2));
            worst_div = std::max(worst_div, sol.divergence_max);
            prev_l2 = el2;
            prev_max = emax;
            prev_h = h;
        }
        return worst_div <= cfg.tolerances.div_tol ? 0 : 4;
    }
    const ForwardModel model = prepare_model(cfg, ctx);
    const Grid2D& g = model.grid();
    const auto axis = make_time_axis(cfg, model);
    const ScalarField phi0 = make_initial(cfg, g);
    const int L = cfg.convergence.levels;
    std::vector<ScalarField> finals;
    std::vector<int> nsteps;
    for (int k = 0; k <= L; ++k) {
        const int n = axis.steps << k;
        const double dt = cfg.time.T / n;
        finals.push_back(run_forward(model, phi0, dt, n, make_forcing(cfg.forcing, g, n)).phi);
        nsteps.push_back(n);
    }
    // successive differences |phi_k - phi_{k+1}| avoid a biased reference
    Csv csv(out / "convergence.csv", {"steps", "dt", "difference_l2", "order"});
    double prev = 0.0;
    for (int k = 0; k < L; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double e = l2_norm(finals[kk] - finals[kk + 1]);
        const double order = k > 0 && e > 0.0 ? std::log2(prev / e) : 0.0;
        csv.row(nsteps[kk], cfg.time.T / nsteps[kk], e, order);
        say(ctx, "steps = " + std::to_string(nsteps[kk]) + "  difference " + fmt(e) + "  order " + fmt(order));
        prev = e;
    }
    return 0;
}

int run_command(const std::string& name, const RunConfig& cfg, const CommandContext& ctx) {
    try {
        if (name == "validate") return cmd_validate(cfg, ctx);
        if (name == "simulate") return cmd_simulate(cfg, ctx);
        if (name == "optimize") return cmd_optimize(cfg, ctx);
        if (name == "check-gradient") return cmd_check_gradient(cfg, ctx);
        if (name == "check-adjoint") return cmd_check_adjoint(cfg, ctx);
        if (name == "convergence") return cmd_convergence(cfg, ctx);
        throw ConfigError("unknown command '" + name + "'");
    } catch (const Error& e) {
        errors(ctx) << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const fs::filesystem_error& e) {
        errors(ctx) << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        errors(ctx) << "error: " << e.what() << '\n';
        return 4;
    }
}

}  // namespace chb::app
