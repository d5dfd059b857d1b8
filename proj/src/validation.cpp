#include <chb/validation.hpp>

#include <chb/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> sample_closed_interval(int n) {
    std::vector<double> s(static_cast<std::size_t>(n));
    const double edge = 1.0 - 1e-12;
    for (int k = 0; k < n; ++k) s[k] = -edge + 2.0 * edge * k / (n - 1);
    return s;
}

// Geometric sampling of [-L, L] dense near the origin.
std::vector<double> sample_real_line(double far) {
    std::vector<double> s;
    for (int k = 0; k <= 2000; ++k) s.push_back(-2.0 + 4.0 * k / 2000.0);
    for (double x = 2.0; x <= far; x *= 1.01) {
        s.push_back(x);
        s.push_back(-x);
    }
    std::sort(s.begin(), s.end());
    return s;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AssumptionCheck& c) { return c.passed || c.waived; });
}

const AssumptionCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.waived ? "WAIVED" : c.passed ? "PASS  " : "FAIL  ") << ' ' << c.name
           << " value=" << fmt(c.value);
        if (!c.detail.empty()) os << "  " << c.detail;
        os << '\n';
    }
    return os.str();
}

ValidationReport validate_assumptions(const PotentialSpec& potential, const MobilitySpec& mobility,
                                      const Kernel& kernel, const ScalarField& eta, double nu,
                                      const ValidationOptions& opt) {
    ValidationReport rep;
    auto add = [&rep](std::string name, bool ok, double value, std::string detail,
                      bool waived = false) {
        rep.checks.push_back({std::move(name), ok, waived, value, std::move(detail)});
    };

    bool params_ok = true;
    try {
        potential.validate();
        mobility.validate();
    } catch (const ConfigError& e) {
        params_ok = false;
        add("params", false, 0.0, e.what());
    }
    if (params_ok) add("params", true, 0.0, "");

    // [N] constant viscosity, non-negative permeability.
    double eta_min = kInf;
    bool eta_finite = eta.all_finite();
    for (double v : eta.values()) eta_min = std::min(eta_min, v);
    add("N.nu", std::isfinite(nu) && nu > 0.0, nu, "viscosity must be positive");
    add("N.eta", eta_finite && eta_min >= 0.0, eta_min, "min eta");

    // [J]
    const ScalarField& a = kernel.a();
    rep.a_min = kInf;
    rep.a_max = -kInf;
    for (double v : a.values()) {
        rep.a_min = std::min(rep.a_min, v);
        rep.a_max = std::max(rep.a_max, v);
    }
    double jmax = 0.0;
    for (double v : kernel.stencil()) jmax = std::max(jmax, std::abs(v));
    const double defect = kernel.evenness_defect();
    add("J.even", defect <= 1e-14 * std::max(jmax, 1.0), defect, "max |J(d) - J(-d)|");
    add("J.a_nonneg", rep.a_min >= 0.0, rep.a_min, "min a(x)");
    const double sj = kernel.sup_abs_integral();
    add("J.L1", std::isfinite(sj), sj, "sup_x int |J(x-y)| dy");
    const double sg = kernel.sup_gradient_integral();
    add("J.gradL1", std::isfinite(sg), sg, "sup_x int |grad J(x-y)| dy");

    if (!params_ok) return rep;

    const OperatorTables singular(potential, mobility, false);
    const OperatorTables regular(potential, mobility, true);
    const auto s = sample_closed_interval(opt.samples);

    // [A1] mobility degenerates exactly at the pure phases.
    {
        double mmin = kInf;
        bool monotone = true;
        for (double x : s) {
            mmin = std::min(mmin, singular.m(x));
            if (x >= 1.0 - opt.end_width && singular.dm(x) > 0.0) monotone = false;
            if (x <= -1.0 + opt.end_width && singular.dm(x) < 0.0) monotone = false;
        }
        const double m_end = std::max(std::abs(singular.m(1.0)), std::abs(singular.m(-1.0)));
        const bool degenerate_ok = m_end == 0.0 && mmin > 0.0 && monotone;
        if (potential.kind == PotentialKind::DoubleObstacle && !degenerate_ok) {
            add("A1", false, m_end,
                "mobility non-degenerate; admissible for the double obstacle potential", true);
        } else {
            add("A1", degenerate_ok, m_end, "m(+-1) must vanish with m > 0 inside");
        }
    }

    // [A2] lambda1 = m F1'' bounded below on [-1, 1].
    {
        double l1 = kInf;
        bool finite = true;
        for (double x : s) {
            double v = 0.0;
            try {
                v = singular.lambda1(x);
            } catch (const DomainError&) {
                finite = false;
                continue;
            }
            if (!std::isfinite(v)) finite = false;
            l1 = std::min(l1, v);
        }
        rep.alpha0 = l1;
        add("A2", finite && l1 > opt.positive_tol, l1, "alpha0 = min lambda1");
    }

    // [A3] F'' monotone near the ends.
    {
        bool ok = true;
        double worst = 0.0;
        double prev_r = -kInf, prev_l = kInf;
        for (double x : s) {
            if (x < 1.0 - opt.end_width && x > -1.0 + opt.end_width) continue;
            const double f2 = singular.d2F(x);
            if (x > 0.0) {
                if (prev_r > -kInf && f2 < prev_r - 1e-12 * std::abs(prev_r)) {
                    ok = false;
                    worst = std::min(worst, f2 - prev_r);
                }
                prev_r = f2;
            } else {
                if (prev_l < kInf && f2 > prev_l + 1e-12 * std::abs(prev_l)) {
                    ok = false;
                    worst = std::min(worst, prev_l - f2);
                }
                prev_l = f2;
            }
        }
        add("A3", ok, worst, "F'' monotone towards the pure phases");
    }

    // [A4] m (F'' + a) >= alpha1 using lambda = m F'' so the singular part is compensated.
    {
        double al = kInf;
        for (double x : s) {
            const double lam = singular.lambda(x);
            const double mm = singular.m(x);
            al = std::min({al, lam + mm * rep.a_min, lam + mm * rep.a_max});
        }
        rep.alpha1 = al;
        add("A4", al > opt.positive_tol, al, "alpha1 = min m (F'' + a)");
    }

    // [H1]-[H3] on the regularized potential over the real line.
    const auto line = sample_real_line(opt.far_field);
    {
        double c0 = kInf;
        for (double x : line) c0 = std::min(c0, regular.d2F(x) + rep.a_min);
        rep.c0 = c0;
        add("H1", c0 > opt.positive_tol, c0, "c0 = min F_delta'' + a");
    }
    {
        // Growth with q = 1/2: F'' + a >= c1 |s| - c2.
        double c1 = kInf;
        for (double x : line)
            if (std::abs(x) >= 2.0) c1 = std::min(c1, (regular.d2F(x) + rep.a_min) / std::abs(x));
        c1 *= 0.5;
        double c2 = 0.0;
        for (double x : line) c2 = std::max(c2, c1 * std::abs(x) - (regular.d2F(x) + rep.a_min));
        add("H2", c1 > 0.0 && std::isfinite(c2), c1, "c1 with q = 1/2, c2 = " + fmt(c2));
    }
    {
        // p = 3/2: |F'|^p <= c3 |F + 1|.
        double c3 = 0.0;
        bool ok = true;
        for (double x : line) {
            const double den = std::abs(regular.F(x) + 1.0);
            const double num = std::pow(std::abs(regular.dF(x)), 1.5);
            if (den <= 0.0) {
                if (num > 0.0) ok = false;
                continue;
            }
            c3 = std::max(c3, num / den);
        }
        add("H3", ok && std::isfinite(c3), c3, "c3 with p = 3/2");
    }
    return rep;
}

}  // namespace chb
