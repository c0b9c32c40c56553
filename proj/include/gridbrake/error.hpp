#pragma once

#include <stdexcept>
#include <string>

namespace gridbrake {

/// Invalid user-supplied configuration (bad base, violated invariant, bad file).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario file problem with its 1-based line (0 when unknown).
class ScenarioFileError : public ConfigError {
public:
    ScenarioFileError(const std::string& what, int line) : ConfigError(what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-finite values or a numeric routine that failed.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Network solution failure. `iterations` and `residual` describe the last Newton iterate.
class SolverError : public NumericError {
public:
    SolverError(const std::string& what, int iterations, double residual)
        : NumericError(what), iterations_(iterations), residual_(residual) {}
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// Every voltage source is disconnected from some part of the network.
class IslandingError : public NumericError {
public:
    using NumericError::NumericError;
};

/// No equilibrium could be found for a scenario.
class InitializationError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Linearization requested away from an equilibrium.
class LinearizationError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace gridbrake
