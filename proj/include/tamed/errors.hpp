#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tamed {

/// Invalid problem definition or unknown built-in name.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed call: dimension mismatch, bad factor, out-of-range argument.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an algorithm does not hold (e.g. N <= cT
/// for the implicit scheme).
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-finite value where a finite one is required. Carries the input that
/// produced it.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::vector<double> input = {})
        : std::runtime_error(what), input_(std::move(input)) {}

    const std::vector<double>& input() const noexcept { return input_; }

private:
    std::vector<double> input_;
};

/// Nonlinear solve failed at a given time step.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::size_t step)
        : std::runtime_error(what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// A runtime-checked mathematical invariant was violated.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace tamed
