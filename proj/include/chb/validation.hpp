#pragma once

#include <chb/field.hpp>
#include <chb/kernel.hpp>
#include <chb/potentials.hpp>

#include <string>
#include <vector>

namespace chb {

struct AssumptionCheck {
    /// Tag such as "A4" or "J.even".
    std::string name;
    bool passed = false;
    /// Assumption not required for this configuration (reported, not failed).
    bool waived = false;
    /// Measured margin or constant; meaning depends on the check.
    double value = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double c0 = 0.0;
    double a_min = 0.0;
    double a_max = 0.0;

    bool all_passed() const;
    const AssumptionCheck* find(const std::string& name) const;
    /// One line per check.
    std::string summary() const;
};

struct ValidationOptions {
    /// Samples of s on [-1, 1] (endpoints pulled in by 1e-12).
    int samples = 4001;
    /// Positivity threshold for the measured constants.
    double positive_tol = 1e-12;
    /// Width of the end intervals used by the monotonicity checks.
    double end_width = 0.05;
    /// Sampling half-width on the real line for [H1]-[H3].
    double far_field = 100.0;
};

/// Checks [N], [J], [A1]-[A4] for the singular problem and [H1]-[H3] for
/// the delta-regularized potential, by sampling. Never throws for a failed
/// assumption: failures are carried in the report.
ValidationReport validate_assumptions(const PotentialSpec& potential, const MobilitySpec& mobility,
                                      const Kernel& kernel, const ScalarField& eta, double nu,
                                      const ValidationOptions& options = {});

}  // namespace chb
