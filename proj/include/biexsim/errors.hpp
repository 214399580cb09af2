// errors.hpp: exception types shared by the solvers

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace biexsim {

/// Raised by the numerical solvers when a propagation cannot be completed.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public SolverError {
public:
    QuadratureError(const std::string& what, double achieved_error)
        : SolverError(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// The augmented density matrix for the requested memory length does not fit.
class MemoryBudgetError : public SolverError {
public:
    MemoryBudgetError(std::size_t required_bytes, std::size_t available_bytes)
        : SolverError("augmented density matrix needs " + std::to_string(required_bytes) +
                      " bytes, budget is " + std::to_string(available_bytes) + " bytes"),
          required_(required_bytes),
          available_(available_bytes) {}

    std::size_t required_bytes() const noexcept { return required_; }
    std::size_t available_bytes() const noexcept { return available_; }

private:
    std::size_t required_;
    std::size_t available_;
};

}  // namespace biexsim
