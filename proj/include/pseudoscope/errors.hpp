#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pseudoscope {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value violates an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Operand shapes do not agree (vector lengths, matrix sizes, symbol degree vs d).
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// A shift lies within the guard tolerance of a diagonal entry.
class NearSingularShift : public Error {
public:
    NearSingularShift(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}

    // Row of the triangular matrix whose diagonal entry collided with the shift.
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// An iterative method stopped before meeting its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Power iteration did not settle; carries the last iterate for inspection.
class PowerIterationError : public ConvergenceError {
public:
    PowerIterationError(const std::string& what,
                        std::vector<std::complex<double>> last_iterate,
                        double residual)
        : ConvergenceError(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

    const std::vector<std::complex<double>>& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<std::complex<double>> last_iterate_;
    double residual_;
};

// Simultaneous root iteration left some roots unconverged.
class RootConvergenceError : public ConvergenceError {
public:
    RootConvergenceError(const std::string& what, std::vector<bool> converged,
                         std::vector<std::complex<double>> iterates)
        : ConvergenceError(what), converged_(std::move(converged)), iterates_(std::move(iterates)) {}

    // converged()[k] is false for every root that missed the stopping rule.
    const std::vector<bool>& converged() const noexcept { return converged_; }
    const std::vector<std::complex<double>>& iterates() const noexcept { return iterates_; }

private:
    std::vector<bool> converged_;
    std::vector<std::complex<double>> iterates_;
};

// Invalid user-supplied configuration. line() is 0 when no file line applies.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// More than the permitted share of Monte Carlo trials failed.
class TrialFailureCap : public Error {
public:
    TrialFailureCap(const std::string& what, std::size_t failed, std::size_t total)
        : Error(what), failed_(failed), total_(total) {}

    std::size_t failed() const noexcept { return failed_; }
    std::size_t total() const noexcept { return total_; }

private:
    std::size_t failed_;
    std::size_t total_;
};

}  // namespace pseudoscope
