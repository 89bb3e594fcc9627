#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gsmpc {

// Broad failure classes; the CLI maps these onto process exit codes.
enum class ErrorKind {
    input,           // malformed scenario, unknown key, unit violation
    domain,          // argument outside the function's domain
    numerical,       // singular system, non-convergence, breakdown
    solver_limit,    // node/time limit hit without an incumbent
    spec_violation,  // a verified trace violates a requirement
    io
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class SolverLimitError : public Error {
public:
    explicit SolverLimitError(const std::string& what) : Error(ErrorKind::solver_limit, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Flux/current system of the machine cannot be inverted.
class DegenerateMachineError : public NumericalError {
public:
    explicit DegenerateMachineError(const std::string& what)
        : NumericalError("degenerate machine parameters: " + what) {}
};

/// Newton iteration for the operating point did not converge.
class NoEquilibriumError : public NumericalError {
public:
    NoEquilibriumError(const std::string& what, double last_residual)
        : NumericalError("no equilibrium: " + what), residual_(last_residual) {}
    double last_residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Raised mid-integration; carries the simulation time of the failure.
class SimulationError : public NumericalError {
public:
    SimulationError(const std::string& what, double time)
        : NumericalError(what + " at t = " + std::to_string(time) + " s"), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class TimeScaleSeparationError : public NumericalError {
public:
    explicit TimeScaleSeparationError(const std::string& what)
        : NumericalError("time-scale separation violated: " + what) {}
};

class IllConditionedModesError : public NumericalError {
public:
    explicit IllConditionedModesError(const std::string& what)
        : NumericalError(what + "; inject reduced coefficients directly instead") {}
};

/// Syntax error in a temporal-logic formula, with 1-based position.
class ParseError : public InputError {
public:
    ParseError(const std::string& what, int line, int column)
        : InputError("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " +
                     what),
          line_(line),
          column_(column) {}
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

class UnknownVariableError : public InputError {
public:
    explicit UnknownVariableError(std::string name)
        : InputError("unknown trace variable '" + name + "'"), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

}  // namespace gsmpc
