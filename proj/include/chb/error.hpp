#pragma once

#include <stdexcept>
#include <string>

namespace chb {

/// Base class for every error raised by the library. `exit_code()` maps the
/// error family onto the CLI exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Malformed or inconsistent input: grid mismatch, bad parameter, unknown key.
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Structural assumption on coefficients violated (e.g. ellipticity margin).
class AssumptionError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Solver non-convergence or non-finite values.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual = 0.0)
        : Error(what), residual_(residual) {}
    int exit_code() const noexcept override { return 4; }
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Missing or incomplete stored data (trajectory snapshots, iterates).
class StateError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

}  // namespace chb
