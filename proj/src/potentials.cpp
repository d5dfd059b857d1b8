#include <chb/potentials.hpp>

#include <chb/error.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace chb {

namespace {

constexpr double kQuadTol = 1e-12;

double sign(double r) { return r < 0.0 ? -1.0 : 1.0; }

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Unregularized logarithmic singular part and its derivatives, |r| < 1.
Jet3 log_f1_jet(double theta, double r) {
    const double p = 1.0 + r, q = 1.0 - r;
    const double pl = p > 0.0 ? p * std::log(p) : 0.0;
    const double ql = q > 0.0 ? q * std::log(q) : 0.0;
    const double one_m = p * q;
    return {0.5 * theta * (pl + ql), 0.5 * theta * std::log(p / q), theta / one_m,
            2.0 * theta * r / (one_m * one_m)};
}

// Cubic Taylor continuation of a jet taken at r0.
Jet3 taylor3(const Jet3& j, double t) {
    return {j[0] + j[1] * t + 0.5 * j[2] * t * t + j[3] * t * t * t / 6.0,
            j[1] + j[2] * t + 0.5 * j[3] * t * t, j[2] + j[3] * t, j[3]};
}

}  // namespace

std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::DoubleObstacle: return "double_obstacle";
        case PotentialKind::Logarithmic: return "logarithmic";
        case PotentialKind::PolynomialDoubleWell: return "polynomial";
    }
    return "?";
}

PotentialKind potential_kind_from_string(const std::string& s) {
    if (s == "double_obstacle" || s == "do") return PotentialKind::DoubleObstacle;
    if (s == "logarithmic" || s == "log") return PotentialKind::Logarithmic;
    if (s == "polynomial") return PotentialKind::PolynomialDoubleWell;
    throw ConfigError("unknown potential kind '" + s +
                      "' (expected double_obstacle, logarithmic or polynomial)");
}

void PotentialSpec::validate() const {
    if (!(delta > 0.0 && delta <= 0.5))
        throw ConfigError("potential delta must lie in (0, 0.5], got " + num(delta));
    if (kind == PotentialKind::Logarithmic) {
        if (!(theta > 0.0)) throw ConfigError("theta must be positive, got " + num(theta));
        if (!(theta_c > theta))
            throw ConfigError("theta_c (" + num(theta_c) + ") must exceed theta (" + num(theta) +
                              ")");
    }
}

double eval_beta_do(double delta, double r) { return beta_do_jet(delta, r)[0]; }

Jet3 beta_do_jet(double delta, double r) {
    const double s = sign(r);
    const double x = std::abs(r);
    Jet3 j{0.0, 0.0, 0.0, 0.0};
    if (x <= 1.0) return j;
    if (x < 1.0 + delta) {
        const double t = x - 1.0;
        const double d3 = delta * delta * delta;
        j = {t * t * t * t / d3, 4.0 * t * t * t / d3, 12.0 * t * t / d3, 24.0 * t / d3};
    } else {
        const double t = x - (1.0 + 0.5 * delta);
        const double d2 = delta * delta;
        j = {4.0 / d2 * t * t * t + t, 12.0 / d2 * t * t + 1.0, 24.0 / d2 * t, 24.0 / d2};
    }
    // Even extension: odd derivatives flip sign.
    j[1] *= s;
    j[3] *= s;
    return j;
}

Jet3 singular_part_jet(const PotentialSpec& spec, double r, bool regularized) {
    switch (spec.kind) {
        case PotentialKind::DoubleObstacle: {
            Jet3 j{0.5 * r * r, r, 1.0, 0.0};
            if (regularized) {
                const Jet3 b = beta_do_jet(spec.delta, r);
                for (int k = 0; k < 4; ++k) j[k] += b[k];
            } else if (std::abs(r) > 1.0) {
                throw DomainError("double obstacle potential is infinite at r = " + num(r));
            }
            return j;
        }
        case PotentialKind::Logarithmic: {
            const double edge = 1.0 - spec.delta;
            if (!regularized) {
                if (std::abs(r) >= 1.0)
                    throw DomainError("logarithmic potential undefined at |r| >= 1 (r = " +
                                      num(r) + ")");
                return log_f1_jet(spec.theta, r);
            }
            if (std::abs(r) <= edge) return log_f1_jet(spec.theta, r);
            const double r0 = sign(r) * edge;
            return taylor3(log_f1_jet(spec.theta, r0), r - r0);
        }
        case PotentialKind::PolynomialDoubleWell:
            return {0.25 * r * r * r * r, r * r * r, 3.0 * r * r, 6.0 * r};
    }
    return {};
}

Jet3 smooth_part_jet(const PotentialSpec& spec, double r) {
    switch (spec.kind) {
        case PotentialKind::DoubleObstacle: return {0.5 * (1.0 - 2.0 * r * r), -2.0 * r, -2.0, 0.0};
        case PotentialKind::Logarithmic:
            return {0.5 * spec.theta_c * (1.0 - r * r), -spec.theta_c * r, -spec.theta_c, 0.0};
        case PotentialKind::PolynomialDoubleWell: return {0.25 - 0.5 * r * r, -r, -1.0, 0.0};
    }
    return {};
}

Jet3 potential_jet(const PotentialSpec& spec, double r, bool regularized) {
    Jet3 a = singular_part_jet(spec, r, regularized);
    const Jet3 b = smooth_part_jet(spec, r);
    for (int k = 0; k < 4; ++k) a[k] += b[k];
    return a;
}

double eval_potential(const PotentialSpec& spec, double r, bool regularized) {
    if (spec.kind == PotentialKind::DoubleObstacle && !regularized && std::abs(r) > 1.0)
        return kInfinitePotential;
    return potential_jet(spec, r, regularized)[0];
}

std::string to_string(MobilityKind k) {
    switch (k) {
        case MobilityKind::Degenerate: return "degenerate";
        case MobilityKind::Cutoff: return "cutoff";
        case MobilityKind::Constant: return "constant";
    }
    return "?";
}

MobilityKind mobility_kind_from_string(const std::string& s) {
    if (s == "degenerate") return MobilityKind::Degenerate;
    if (s == "cutoff") return MobilityKind::Cutoff;
    if (s == "constant") return MobilityKind::Constant;
    throw ConfigError("unknown mobility kind '" + s +
                      "' (expected degenerate, cutoff or constant)");
}

void MobilitySpec::validate() const {
    if (kind == MobilityKind::Cutoff && !(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("cutoff mobility epsilon must lie in (0, 1), got " + num(epsilon));
    if (kind == MobilityKind::Constant && !(m0 > 0.0))
        throw ConfigError("constant mobility m0 must be positive, got " + num(m0));
}

std::array<double, 3> mobility_jet(const MobilitySpec& spec, double r) {
    switch (spec.kind) {
        case MobilityKind::Degenerate:
            if (std::abs(r) > 1.0) return {0.0, 0.0, 0.0};
            return {1.0 - r * r, -2.0 * r, -2.0};
        case MobilityKind::Cutoff:
            if (std::abs(r) > spec.epsilon)
                return {1.0 - spec.epsilon * spec.epsilon, 0.0, 0.0};
            return {1.0 - r * r, -2.0 * r, -2.0};
        case MobilityKind::Constant: return {spec.m0, 0.0, 0.0};
    }
    return {};
}

OperatorTables::OperatorTables(const PotentialSpec& potential, const MobilitySpec& mobility,
                               bool regularized)
    : potential_(potential), mobility_(mobility), regularized_(regularized) {
    potential_.validate();
    mobility_.validate();
}

double OperatorTables::F(double s) const { return eval_potential(potential_, s, regularized_); }
double OperatorTables::dF(double s) const { return potential_jet(potential_, s, regularized_)[1]; }
double OperatorTables::d2F(double s) const { return potential_jet(potential_, s, regularized_)[2]; }
double OperatorTables::d3F(double s) const { return potential_jet(potential_, s, regularized_)[3]; }
double OperatorTables::m(double s) const { return mobility_jet(mobility_, s)[0]; }
double OperatorTables::dm(double s) const { return mobility_jet(mobility_, s)[1]; }

double OperatorTables::lambda1(double s) const {
    const bool log_compensated = potential_.kind == PotentialKind::Logarithmic &&
                                 mobility_.kind == MobilityKind::Degenerate;
    if (log_compensated && !regularized_) {
        // (1 - s^2) * theta / (1 - s^2), continuous up to the endpoints.
        if (std::abs(s) > 1.0)
            throw DomainError("lambda undefined outside [-1, 1] for the logarithmic potential");
        return potential_.theta;
    }
    if (!regularized_ && std::abs(s) >= 1.0 && potential_.kind == PotentialKind::Logarithmic)
        throw DomainError("lambda undefined at s = " + num(s) +
                          ": F'' is singular and the mobility does not vanish");
    if (!regularized_ && potential_.kind == PotentialKind::DoubleObstacle && std::abs(s) > 1.0)
        throw DomainError("lambda undefined outside [-1, 1] for the double obstacle potential");
    return m(s) * singular_part_jet(potential_, s, regularized_)[2];
}

double OperatorTables::lambda2(double s) const {
    return m(s) * smooth_part_jet(potential_, s)[2];
}

double OperatorTables::lambda(double s) const { return lambda1(s) + lambda2(s); }

double OperatorTables::dlambda(double s) const {
    const auto mj = mobility_jet(mobility_, s);
    const Jet3 f2 = smooth_part_jet(potential_, s);
    double d = mj[1] * f2[2] + mj[0] * f2[3];
    const bool log_compensated = potential_.kind == PotentialKind::Logarithmic &&
                                 mobility_.kind == MobilityKind::Degenerate;
    if (log_compensated && !regularized_) {
        if (std::abs(s) > 1.0)
            throw DomainError("lambda undefined outside [-1, 1] for the logarithmic potential");
        return d;
    }
    lambda1(s);  // domain checks
    const Jet3 f1 = singular_part_jet(potential_, s, regularized_);
    d += mj[1] * f1[2] + mj[0] * f1[3];
    return d;
}

double OperatorTables::b(double s) const {
    const double x = std::abs(s), sg = sign(s);
    switch (mobility_.kind) {
        case MobilityKind::Degenerate:
            if (x >= 1.0) return sg * 2.0 / 3.0;
            return s - s * s * s / 3.0;
        case MobilityKind::Cutoff: {
            const double e = mobility_.epsilon;
            if (x <= e) return s - s * s * s / 3.0;
            return sg * (e - e * e * e / 3.0 + (1.0 - e * e) * (x - e));
        }
        case MobilityKind::Constant: return mobility_.m0 * s;
    }
    return 0.0;
}

namespace {

// Integrate f from 0 to s, splitting at points where the integrand loses smoothness.
template <class Fn>
double piecewise_integral(const Fn& f, double s, const std::vector<double>& kinks) {
    if (s == 0.0) return 0.0;
    std::vector<double> pts{0.0};
    for (double k : kinks) {
        for (double kk : {k, -k}) {
            if ((s > 0.0 && kk > 0.0 && kk < s) || (s < 0.0 && kk < 0.0 && kk > s))
                pts.push_back(kk);
        }
    }
    pts.push_back(s);
    if (s > 0.0) std::sort(pts.begin(), pts.end());
    else std::sort(pts.begin(), pts.end(), std::greater<>());
    double total = 0.0;
    const double tol = kQuadTol / static_cast<double>(pts.size());
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
        total += adaptive_simpson(f, pts[k], pts[k + 1], tol);
    return total;
}

}  // namespace

double OperatorTables::B(double s) const {
    const std::vector<double> kinks{mobility_.epsilon, 1.0 - potential_.delta, 1.0,
                                    1.0 + potential_.delta};
    return piecewise_integral([this](double t) { return lambda(t); }, s, kinks);
}

double OperatorTables::B1(double s) const {
    const std::vector<double> kinks{mobility_.epsilon, 1.0 - potential_.delta, 1.0,
                                    1.0 + potential_.delta};
    return piecewise_integral([this](double t) { return lambda1(t); }, s, kinks);
}

}  // namespace chb
