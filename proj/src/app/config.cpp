#include <chb/app/config.hpp>

#include <chb/error.hpp>
#include <chb/snapshot.hpp>

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace chb::app {

namespace {

std::string where(const std::string& source, const YAML::Mark& m) {
    if (m.is_null()) return source;
    return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

[[noreturn]] void fail(const std::string& at, const std::string& key, const std::string& msg) {
    throw ConfigError(at + ": " + (key.empty() ? std::string() : key + ": ") + msg);
}

class Section {
public:
    Section(const YAML::Node& node, std::string path, std::string source)
        : node_(node), path_(std::move(path)), source_(std::move(source)) {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            fail(where(source_, node_.Mark()), path_, "expected a mapping");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!present()) return;
        const YAML::Node v = node_[key];
        if (!v) return;
        try {
            if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>>) {
                if (!v.IsSequence()) throw YAML::BadConversion(v.Mark());
            } else if (!v.IsScalar()) {
                throw YAML::BadConversion(v.Mark());
            }
            out = v.as<T>();
        } catch (const YAML::BadConversion&) {
            fail(where(source_, v.Mark()), key_path(key), std::string("cannot read value as ") + type_name<T>());
        }
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(out)) fail(where(source_, v.Mark()), key_path(key), "value must be finite");
        }
    }

    /// Enumerations: parse with `conv`, rethrowing with context.
    template <class T, class F>
    void get_enum(const char* key, T& out, F conv) {
        std::string s;
        get(key, s);
        if (!present() || !node_[key]) return;
        try {
            out = conv(s);
        } catch (const Error& e) {
            fail(where(source_, node_[key].Mark()), key_path(key), e.what());
        }
    }

    Section sub(const char* key) {
        seen_.insert(key);
        return Section(present() ? node_[key] : YAML::Node(), key_path(key), source_);
    }

    bool has(const char* key) const { return present() && node_[key]; }

    /// Unknown keys are errors.
    void finish() const {
        if (!present()) return;
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (!seen_.count(k)) {
                std::string allowed;
                for (const auto& s : seen_) allowed += (allowed.empty() ? "" : ", ") + s;
                fail(where(source_, kv.first.Mark()), key_path(k), "unknown key (allowed: " + allowed + ")");
            }
        }
    }

    std::string key_path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

private:
    bool present() const { return node_ && node_.IsMap(); }

    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, bool>) return "a boolean";
        else if constexpr (std::is_integral_v<T>) return "an integer";
        else if constexpr (std::is_floating_point_v<T>) return "a number";
        else if constexpr (std::is_same_v<T, std::string>) return "a string";
        else return "a list of numbers";
    }

    YAML::Node node_;
    std::string path_;
    std::string source_;
    std::set<std::string> seen_;
};

void read_forcing(Section s, ForcingConfig& f) {
    s.get("kind", f.kind);
    s.get("amplitude", f.amplitude);
    s.get("x", f.x);
    s.get("y", f.y);
    s.get("path", f.path);
    s.finish();
}

BrinkmanMethod brinkman_method(const std::string& s) {
    if (s == "auto") return BrinkmanMethod::Auto;
    if (s == "direct") return BrinkmanMethod::Direct;
    if (s == "minres") return BrinkmanMethod::Minres;
    throw ConfigError("unknown Brinkman method '" + s + "' (expected auto, direct, minres)");
}

void require(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ConfigError(key + ": " + msg);
}

template <class T>
bool one_of(const T& v, std::initializer_list<const char*> opts) {
    return std::any_of(opts.begin(), opts.end(), [&](const char* o) { return v == o; });
}

void check_forcing(const ForcingConfig& f, const std::string& key) {
    require(one_of(f.kind, {"none", "constant", "vortex", "shear", "file"}), key + ".kind",
            "unknown forcing kind '" + f.kind + "' (expected none, constant, vortex, shear, file)");
    require(f.kind != "file" || !f.path.empty(), key + ".path", "required for kind file");
}

std::string series_path(const std::string& dir, const char* stem, int n) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06d.chbf", stem, n);
    return (std::filesystem::path(dir) / buf).string();
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        fail(where(source, e.mark), "", "YAML syntax error: " + e.msg);
    }
    RunConfig c;
    Section top(root, "", source);

    auto grid = top.sub("grid");
    grid.get("nx", c.grid.nx);
    grid.get("ny", c.grid.ny);
    grid.get("lx", c.grid.lx);
    grid.get("ly", c.grid.ly);
    grid.finish();

    auto time = top.sub("time");
    time.get("T", c.time.T);
    time.get("dt", c.time.dt);
    time.get("snapshot_every", c.time.snapshot_every);
    time.finish();

    auto phys = top.sub("physics");
    phys.get("nu", c.physics.nu);
    phys.get("eta", c.physics.eta);
    phys.get("eta_path", c.physics.eta_path);
    {
        auto k = phys.sub("kernel");
        k.get_enum("profile", c.physics.kernel.profile, kernel_profile_from_string);
        k.get("sigma", c.physics.kernel.sigma);
        k.get("radius", c.physics.kernel.radius);
        k.get("strength", c.physics.kernel.strength);
        k.get("odd_perturbation", c.physics.kernel_odd_perturbation);
        k.finish();
        auto p = phys.sub("potential");
        p.get_enum("kind", c.physics.potential.kind, potential_kind_from_string);
        p.get("theta", c.physics.potential.theta);
        p.get("theta_c", c.physics.potential.theta_c);
        p.get("delta", c.physics.potential.delta);
        p.finish();
        auto m = phys.sub("mobility");
        m.get_enum("kind", c.physics.mobility.kind, mobility_kind_from_string);
        m.get("epsilon", c.physics.mobility.epsilon);
        m.get("m0", c.physics.mobility.m0);
        m.finish();
    }
    phys.finish();

    auto init = top.sub("initial");
    init.get("pattern", c.initial.pattern);
    init.get("mean", c.initial.mean);
    init.get("amplitude", c.initial.amplitude);
    init.get("kx", c.initial.kx);
    init.get("ky", c.initial.ky);
    init.get("modes", c.initial.modes);
    init.get("radius", c.initial.radius);
    init.get("cx", c.initial.cx);
    init.get("cy", c.initial.cy);
    init.get("width", c.initial.width);
    init.get("path", c.initial.path);
    init.get("phi0_cap", c.initial.phi0_cap);
    init.finish();

    read_forcing(top.sub("forcing"), c.forcing);

    auto tg = top.sub("targets");
    tg.get("kind", c.targets.kind);
    tg.get("path", c.targets.path);
    read_forcing(tg.sub("control"), c.targets.control);
    tg.finish();

    auto opt = top.sub("optimizer");
    opt.get("max_iters", c.optimizer.options.max_iters);
    opt.get("armijo_c", c.optimizer.options.armijo_c);
    opt.get("initial_step", c.optimizer.options.initial_step);
    opt.get("backtrack_factor", c.optimizer.options.backtrack_factor);
    opt.get("max_backtracks", c.optimizer.options.max_backtracks);
    opt.get("lower", c.optimizer.lower);
    opt.get("upper", c.optimizer.upper);
    opt.get("initial_control", c.optimizer.initial_control);
    opt.finish();

    auto tol = top.sub("tolerances");
    tol.get("div_tol", c.tolerances.div_tol);
    tol.get("cg_tol", c.tolerances.cg_tol);
    tol.get("kkt_tol", c.tolerances.kkt_tol);
    tol.finish();

    auto sol = top.sub("solver");
    sol.get("brinkman", c.solver.brinkman);
    sol.get("cg_max_iter", c.solver.cg_max_iter);
    sol.get("cfl_max", c.solver.cfl_max);
    sol.get("memory_limit_mb", c.solver.memory_limit_mb);
    sol.finish();

    auto chk = top.sub("checks");
    chk.get("epsilons", c.checks.epsilons);
    chk.get("seeds", c.checks.seeds);
    chk.get("zero_direction", c.checks.zero_direction);
    chk.finish();

    auto conv = top.sub("convergence");
    conv.get("kind", c.convergence.kind);
    conv.get("grids", c.convergence.grids);
    conv.get("levels", c.convergence.levels);
    conv.finish();

    top.get("seed", c.seed);
    top.finish();

    try {
        check_ranges(c);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    c.optimizer.options.kkt_tol = c.tolerances.kkt_tol;
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void check_ranges(const RunConfig& c) {
    require(c.grid.nx >= 2 && c.grid.nx <= 4096, "grid.nx", "must lie in [2, 4096]");
    require(c.grid.ny >= 2 && c.grid.ny <= 4096, "grid.ny", "must lie in [2, 4096]");
    require(c.grid.lx > 0.0, "grid.lx", "must be positive");
    require(c.grid.ly > 0.0, "grid.ly", "must be positive");
    require(c.time.T > 0.0, "time.T", "must be positive");
    require(c.time.dt >= 0.0, "time.dt", "must be non-negative (0 selects the default)");
    require(c.time.snapshot_every >= 0, "time.snapshot_every", "must be non-negative");
    require(c.physics.nu > 0.0, "physics.nu", "must be positive");
    require(c.physics.eta >= 0.0, "physics.eta", "must be non-negative");
    require(c.physics.kernel.sigma > 0.0, "physics.kernel.sigma", "must be positive");
    require(c.physics.kernel.radius >= 0.0, "physics.kernel.radius", "must be non-negative");
    require(c.physics.kernel.profile != KernelProfile::Tabulated, "physics.kernel.profile",
            "raw stencils are not configurable");
    require(c.physics.potential.delta > 0.0 && c.physics.potential.delta <= 0.5, "physics.potential.delta",
            "must lie in (0, 0.5]");
    require(c.physics.potential.theta > 0.0, "physics.potential.theta", "must be positive");
    c.physics.mobility.validate();
    require(one_of(c.initial.pattern, {"constant", "cosine", "spinodal", "bubble", "file"}), "initial.pattern",
            "unknown pattern '" + c.initial.pattern + "' (expected constant, cosine, spinodal, bubble, file)");
    require(c.initial.pattern != "file" || !c.initial.path.empty(), "initial.path", "required for pattern file");
    require(c.initial.amplitude >= 0.0, "initial.amplitude", "must be non-negative");
    require(c.initial.modes >= 1 && c.initial.modes <= 64, "initial.modes", "must lie in [1, 64]");
    require(c.initial.kx >= 0 && c.initial.ky >= 0, "initial.kx/ky", "must be non-negative");
    require(c.initial.width > 0.0, "initial.width", "must be positive");
    require(c.initial.radius > 0.0, "initial.radius", "must be positive");
    require(c.initial.phi0_cap > 0.0 && c.initial.phi0_cap <= 1.0, "initial.phi0_cap", "must lie in (0, 1]");
    check_forcing(c.forcing, "forcing");
    check_forcing(c.targets.control, "targets.control");
    require(one_of(c.targets.kind, {"inverse_crime", "zero", "file"}), "targets.kind",
            "unknown targets kind '" + c.targets.kind + "' (expected inverse_crime, zero, file)");
    require(c.targets.kind != "file" || !c.targets.path.empty(), "targets.path", "required for kind file");
    const auto& o = c.optimizer.options;
    require(o.max_iters >= 0, "optimizer.max_iters", "must be non-negative");
    require(o.armijo_c > 0.0 && o.armijo_c < 1.0, "optimizer.armijo_c", "must lie in (0, 1)");
    require(o.initial_step > 0.0, "optimizer.initial_step", "must be positive");
    require(o.backtrack_factor > 0.0 && o.backtrack_factor < 1.0, "optimizer.backtrack_factor",
            "must lie in (0, 1)");
    require(o.max_backtracks >= 0, "optimizer.max_backtracks", "must be non-negative");
    require(c.optimizer.lower <= c.optimizer.upper, "optimizer.lower", "must not exceed optimizer.upper");
    require(c.tolerances.div_tol > 0.0, "tolerances.div_tol", "must be positive");
    require(c.tolerances.cg_tol > 0.0 && c.tolerances.cg_tol < 1.0, "tolerances.cg_tol", "must lie in (0, 1)");
    require(c.tolerances.kkt_tol >= 0.0, "tolerances.kkt_tol", "must be non-negative");
    brinkman_method(c.solver.brinkman);
    require(c.solver.cg_max_iter >= 1, "solver.cg_max_iter", "must be positive");
    require(c.solver.cfl_max > 0.0, "solver.cfl_max", "must be positive");
    require(c.solver.memory_limit_mb >= 0.0, "solver.memory_limit_mb", "must be non-negative");
    require(c.checks.epsilons.size() >= 2, "checks.epsilons", "need at least two values");
    for (double e : c.checks.epsilons) require(e > 0.0 && std::isfinite(e), "checks.epsilons", "must be positive");
    require(c.checks.seeds >= 1, "checks.seeds", "must be positive");
    require(one_of(c.convergence.kind, {"brinkman", "time"}), "convergence.kind",
            "unknown kind '" + c.convergence.kind + "' (expected brinkman, time)");
    require(c.convergence.grids.size() >= 2, "convergence.grids", "need at least two grids");
    for (int n : c.convergence.grids) require(n >= 4, "convergence.grids", "entries must be >= 4");
    require(c.convergence.levels >= 2 && c.convergence.levels <= 12, "convergence.levels", "must lie in [2, 12]");
}

std::string to_yaml(const RunConfig& c) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    auto forcing = [&](const ForcingConfig& f) {
        e << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << f.kind << YAML::Key << "amplitude"
          << YAML::Value << f.amplitude << YAML::Key << "x" << YAML::Value << f.x << YAML::Key << "y"
          << YAML::Value << f.y << YAML::Key << "path" << YAML::Value << f.path << YAML::EndMap;
    };
    e << YAML::BeginMap;
    e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap << YAML::Key << "nx" << YAML::Value << c.grid.nx
      << YAML::Key << "ny" << YAML::Value << c.grid.ny << YAML::Key << "lx" << YAML::Value << c.grid.lx
      << YAML::Key << "ly" << YAML::Value << c.grid.ly << YAML::EndMap;
    e << YAML::Key << "time" << YAML::Value << YAML::BeginMap << YAML::Key << "T" << YAML::Value << c.time.T
      << YAML::Key << "dt" << YAML::Value << c.time.dt << YAML::Key << "snapshot_every" << YAML::Value
      << c.time.snapshot_every << YAML::EndMap;
    const auto& p = c.physics;
    e << YAML::Key << "physics" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "nu" << YAML::Value << p.nu << YAML::Key << "eta" << YAML::Value << p.eta;
    e << YAML::Key << "eta_path" << YAML::Value << p.eta_path;
    e << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap << YAML::Key << "profile" << YAML::Value
      << to_string(p.kernel.profile) << YAML::Key << "sigma" << YAML::Value << p.kernel.sigma << YAML::Key
      << "radius" << YAML::Value << p.kernel.radius << YAML::Key << "strength" << YAML::Value
      << p.kernel.strength << YAML::Key << "odd_perturbation" << YAML::Value << p.kernel_odd_perturbation
      << YAML::EndMap;
    e << YAML::Key << "potential" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
      << to_string(p.potential.kind) << YAML::Key << "theta" << YAML::Value << p.potential.theta << YAML::Key
      << "theta_c" << YAML::Value << p.potential.theta_c << YAML::Key << "delta" << YAML::Value
      << p.potential.delta << YAML::EndMap;
    e << YAML::Key << "mobility" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
      << to_string(p.mobility.kind) << YAML::Key << "epsilon" << YAML::Value << p.mobility.epsilon << YAML::Key
      << "m0" << YAML::Value << p.mobility.m0 << YAML::EndMap;
    e << YAML::EndMap;
    const auto& i = c.initial;
    e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap << YAML::Key << "pattern" << YAML::Value
      << i.pattern << YAML::Key << "mean" << YAML::Value << i.mean << YAML::Key << "amplitude" << YAML::Value
      << i.amplitude << YAML::Key << "kx" << YAML::Value << i.kx << YAML::Key << "ky" << YAML::Value << i.ky
      << YAML::Key << "modes" << YAML::Value << i.modes << YAML::Key << "radius" << YAML::Value << i.radius
      << YAML::Key << "cx" << YAML::Value << i.cx << YAML::Key << "cy" << YAML::Value << i.cy << YAML::Key
      << "width" << YAML::Value << i.width << YAML::Key << "path" << YAML::Value << i.path << YAML::Key
      << "phi0_cap" << YAML::Value << i.phi0_cap << YAML::EndMap;
    e << YAML::Key << "forcing" << YAML::Value;
    forcing(c.forcing);
    e << YAML::Key << "targets" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
      << c.targets.kind << YAML::Key << "path" << YAML::Value << c.targets.path << YAML::Key << "control"
      << YAML::Value;
    forcing(c.targets.control);
    e << YAML::EndMap;
    const auto& o = c.optimizer;
    e << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap << YAML::Key << "max_iters" << YAML::Value
      << o.options.max_iters << YAML::Key << "armijo_c" << YAML::Value << o.options.armijo_c << YAML::Key
      << "initial_step" << YAML::Value << o.options.initial_step << YAML::Key << "backtrack_factor"
      << YAML::Value << o.options.backtrack_factor << YAML::Key << "max_backtracks" << YAML::Value
      << o.options.max_backtracks << YAML::Key << "lower" << YAML::Value << o.lower << YAML::Key << "upper"
      << YAML::Value << o.upper << YAML::Key << "initial_control" << YAML::Value << o.initial_control
      << YAML::EndMap;
    e << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap << YAML::Key << "div_tol" << YAML::Value
      << c.tolerances.div_tol << YAML::Key << "cg_tol" << YAML::Value << c.tolerances.cg_tol << YAML::Key
      << "kkt_tol" << YAML::Value << c.tolerances.kkt_tol << YAML::EndMap;
    e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap << YAML::Key << "brinkman" << YAML::Value
      << c.solver.brinkman << YAML::Key << "cg_max_iter" << YAML::Value << c.solver.cg_max_iter << YAML::Key
      << "cfl_max" << YAML::Value << c.solver.cfl_max << YAML::Key << "memory_limit_mb" << YAML::Value
      << c.solver.memory_limit_mb << YAML::EndMap;
    e << YAML::Key << "checks" << YAML::Value << YAML::BeginMap << YAML::Key << "epsilons" << YAML::Value
      << YAML::Flow << c.checks.epsilons << YAML::Key << "seeds" << YAML::Value << c.checks.seeds << YAML::Key
      << "zero_direction" << YAML::Value << c.checks.zero_direction << YAML::EndMap;
    e << YAML::Key << "convergence" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
      << c.convergence.kind << YAML::Key << "grids" << YAML::Value << YAML::Flow << c.convergence.grids
      << YAML::Key << "levels" << YAML::Value << c.convergence.levels << YAML::EndMap;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

Grid2D make_grid(const RunConfig& c) { return Grid2D(c.grid.nx, c.grid.ny, c.grid.lx, c.grid.ly); }

PhysicsConfig make_physics(const RunConfig& c) {
    const Grid2D g = make_grid(c);
    PhysicsConfig pc{g, c.physics.nu, ScalarField(g, c.physics.eta), c.physics.kernel, c.physics.potential,
                     c.physics.mobility};
    if (!c.physics.eta_path.empty()) {
        pc.eta = read_scalar_snapshot(c.physics.eta_path);
        require_same_grid(pc.eta.grid(), g, "physics.eta_path");
    }
    return pc;
}

SolverOptions make_solver_options(const RunConfig& c) {
    SolverOptions o;
    o.cg_tol = c.tolerances.cg_tol;
    o.cg_max_iter = c.solver.cg_max_iter;
    o.cfl_max = c.solver.cfl_max;
    o.brinkman.div_tol = c.tolerances.div_tol;
    o.brinkman.method = brinkman_method(c.solver.brinkman);
    return o;
}

ScalarField make_initial(const RunConfig& c, const Grid2D& g) {
    const auto& in = c.initial;
    const double pi = std::acos(-1.0);
    ScalarField phi;
    if (in.pattern == "constant") {
        phi = ScalarField(g, in.mean);
    } else if (in.pattern == "cosine") {
        phi = ScalarField::from_function(g, [&](double x, double y) {
            return in.mean + in.amplitude * std::cos(in.kx * pi * x / g.lx) * std::cos(in.ky * pi * y / g.ly);
        });
    } else if (in.pattern == "spinodal") {
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> nd;
        const int M = in.modes;
        std::vector<double> coef(static_cast<std::size_t>((M + 1) * (M + 1)));
        for (int q = 0; q <= M; ++q)
            for (int p = 0; p <= M; ++p)
                coef[static_cast<std::size_t>(q * (M + 1) + p)] =
                    (p == 0 && q == 0) ? 0.0 : nd(rng) / (1.0 + p * p + q * q);
        ScalarField noise(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double s = 0.0;
                for (int q = 0; q <= M; ++q)
                    for (int p = 0; p <= M; ++p)
                        s += coef[static_cast<std::size_t>(q * (M + 1) + p)] * std::cos(p * pi * g.x(i) / g.lx) *
                             std::cos(q * pi * g.y(j) / g.ly);
                noise(i, j) = s;
            }
        const double peak = noise.max_abs();
        phi = ScalarField(g, in.mean);
        if (peak > 0.0) phi.axpy(in.amplitude / peak, noise);
    } else if (in.pattern == "bubble") {
        phi = ScalarField::from_function(g, [&](double x, double y) {
            const double r = std::hypot(x - in.cx, y - in.cy);
            return in.mean + in.amplitude * std::tanh((in.radius - r) / in.width);
        });
    } else {
        phi = read_scalar_snapshot(in.path);
        require_same_grid(phi.grid(), g, "initial.path");
    }
    if (!phi.all_finite()) throw ConfigError("initial phase contains non-finite values");
    if (phi.max_abs() > in.phi0_cap)
        throw ConfigError("initial phase exceeds initial.phi0_cap: max|phi0| = " + std::to_string(phi.max_abs()) +
                          " > " + std::to_string(in.phi0_cap));
    return phi;
}

ForceSeries make_forcing(const ForcingConfig& f, const Grid2D& g, int steps) {
    if (f.kind == "none") return {};
    const double pi = std::acos(-1.0);
    VectorField h;
    if (f.kind == "constant") {
        h = VectorField(g, f.x, f.y);
    } else if (f.kind == "vortex") {
        h = VectorField(ScalarField::from_function(g, [&](double x, double y) {
                            return f.amplitude * std::sin(pi * y / g.ly) * std::cos(pi * x / g.lx);
                        }),
                        ScalarField::from_function(g, [&](double x, double y) {
                            return -f.amplitude * std::sin(pi * x / g.lx) * std::cos(pi * y / g.ly);
                        }));
    } else if (f.kind == "shear") {
        h = VectorField(ScalarField::from_function(g, [&](double, double y) { return f.amplitude * std::sin(pi * y / g.ly); }),
                        ScalarField(g, 0.0));
    } else {
        ForceSeries s;
        for (int n = 0; n < steps; ++n) {
            const auto p = series_path(f.path, "h", n);
            if (!std::filesystem::exists(p)) throw ConfigError("forcing series is missing '" + p + "'");
            s.push_back(read_vector_snapshot(p));
            require_same_grid(s.back().grid(), g, "forcing.path");
        }
        return s;
    }
    return ForceSeries(static_cast<std::size_t>(steps), h);
}

ControlBounds make_bounds(const RunConfig& c, const Grid2D& g) {
    return ControlBounds::uniform(g, c.optimizer.lower, c.optimizer.upper);
}

TimeAxis make_time_axis(const RunConfig& c, const ForwardModel& model) {
    const double dt_max = c.time.dt > 0.0 ? c.time.dt : model.default_dt();
    const double ratio = c.time.T / dt_max;
    const int steps = std::max(1, static_cast<int>(std::ceil(ratio * (1.0 - 1e-12))));
    if (steps > 10000000) throw ConfigError("time.T / dt gives more than 1e7 steps");
    return {c.time.T / steps, steps};
}

Kernel make_validation_kernel(const RunConfig& c, const Grid2D& g) {
    Kernel k(g, c.physics.kernel);
    const double eps = c.physics.kernel_odd_perturbation;
    if (eps == 0.0) return k;
    std::vector<double> st = k.stencil();
    const double peak = k.at(0, 0);
    for (int dj = -(g.ny - 1); dj < g.ny; ++dj)
        for (int di = -(g.nx - 1); di < g.nx; ++di) {
            const auto idx = static_cast<std::size_t>(dj + g.ny - 1) * (2 * g.nx - 1) + (di + g.nx - 1);
            if (st[idx] != 0.0) st[idx] += eps * peak * di / (g.nx - 1.0);
        }
    return Kernel::from_stencil(g, std::move(st));
}

}  // namespace chb::app
