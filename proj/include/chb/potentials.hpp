#pragma once

#include <array>
#include <limits>
#include <string>

namespace chb {

enum class PotentialKind {
    DoubleObstacle,
    Logarithmic,
    /// 1/4 (r^2 - 1)^2, for debugging only (experimental).
    PolynomialDoubleWell,
};

std::string to_string(PotentialKind k);
PotentialKind potential_kind_from_string(const std::string& s);

/// Potential F = F1 + F2 (singular part F1, smooth part F2) and its C^3
/// regularization parameter delta in (0, 1/2].
///
///   double obstacle: F1 = r^2/2 + I_[-1,1],   F2 = (1 - 2 r^2)/2
///   logarithmic:     F1 = theta/2 ((1+r)log(1+r) + (1-r)log(1-r)),
///                    F2 = theta_c (1 - r^2)/2,   0 < theta < theta_c
struct PotentialSpec {
    PotentialKind kind = PotentialKind::Logarithmic;
    double theta = 0.1;
    double theta_c = 0.2;
    double delta = 0.05;

    /// Throws ConfigError when the parameters are outside their ranges.
    void validate() const;
};

/// Sentinel returned by eval_potential outside the obstacle.
inline constexpr double kInfinitePotential = std::numeric_limits<double>::infinity();

/// Value and first three derivatives.
using Jet3 = std::array<double, 4>;

/// F(r). Unregularized double obstacle returns kInfinitePotential for |r| > 1;
/// unregularized logarithmic throws DomainError for |r| >= 1.
double eval_potential(const PotentialSpec& spec, double r, bool regularized);

/// Derivatives 0..3 of the singular part F1 (regularized or not).
Jet3 singular_part_jet(const PotentialSpec& spec, double r, bool regularized);
/// Derivatives 0..3 of the smooth part F2.
Jet3 smooth_part_jet(const PotentialSpec& spec, double r);
/// Derivatives 0..3 of F = F1 + F2.
Jet3 potential_jet(const PotentialSpec& spec, double r, bool regularized);

/// Five-branch C^3 penalty that regularizes the obstacle indicator:
/// zero on [-1,1], quartic on 1 < |r| < 1+delta, cubic beyond.
double eval_beta_do(double delta, double r);
/// Derivatives 0..3 of eval_beta_do.
Jet3 beta_do_jet(double delta, double r);

enum class MobilityKind {
    /// m = 1 - r^2 on [-1,1], zero outside.
    Degenerate,
    /// 1 - r^2 for |r| <= epsilon, 1 - epsilon^2 beyond.
    Cutoff,
    /// m = m0.
    Constant,
};

std::string to_string(MobilityKind k);
MobilityKind mobility_kind_from_string(const std::string& s);

struct MobilitySpec {
    MobilityKind kind = MobilityKind::Degenerate;
    double epsilon = 0.9;
    double m0 = 1.0;

    void validate() const;
};

/// m, m', m''.
std::array<double, 3> mobility_jet(const MobilitySpec& spec, double r);

/// Evaluators for lambda = m F'', b = int_0^s m, B = int_0^s lambda and
/// B~(s; a) = B(s) + a b(s), built from closed-form branch derivatives.
/// Immutable; safe to share across threads.
class OperatorTables {
public:
    OperatorTables(const PotentialSpec& potential, const MobilitySpec& mobility,
                   bool regularized = true);

    const PotentialSpec& potential() const noexcept { return potential_; }
    const MobilitySpec& mobility() const noexcept { return mobility_; }
    bool regularized() const noexcept { return regularized_; }

    double F(double s) const;
    double dF(double s) const;
    double d2F(double s) const;
    double d3F(double s) const;
    double m(double s) const;
    double dm(double s) const;

    /// lambda(s) = m(s) F''(s). Throws DomainError where the product is
    /// undefined (unregularized singularity not compensated by m).
    double lambda(double s) const;
    double dlambda(double s) const;
    /// m F1'' (singular-part contribution).
    double lambda1(double s) const;
    /// m F2'' (smooth-part contribution).
    double lambda2(double s) const;

    /// b(s) = int_0^s m. Closed form.
    double b(double s) const;
    /// B(s) = int_0^s lambda, adaptive Simpson to 1e-12.
    double B(double s) const;
    /// int_0^s lambda1.
    double B1(double s) const;
    double Btilde(double s, double a) const { return B(s) + a * b(s); }
    /// d/ds B~ = m a + lambda: the implicit diffusion coefficient.
    double dBtilde(double s, double a) const { return m(s) * a + lambda(s); }
    /// d^2/ds^2 B~ = m' a + lambda'.
    double d2Btilde(double s, double a) const { return dm(s) * a + dlambda(s); }

private:
    PotentialSpec potential_;
    MobilitySpec mobility_;
    bool regularized_;
};

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 50);

}  // namespace chb

#include <chb/detail/quadrature.hpp>
