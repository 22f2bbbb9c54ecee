#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace csnewton {

// Base of every error thrown by the library.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// F (or f) returned NaN/Inf. For Jacobian assembly the offending column is kept.
class NonFiniteEvaluation : public SolverError {
public:
    explicit NonFiniteEvaluation(std::string where, std::optional<std::size_t> column = std::nullopt)
        : SolverError(column ? where + ": non-finite evaluation in column " + std::to_string(*column)
                             : where + ": non-finite evaluation"),
          column_(column) {}

    [[nodiscard]] std::optional<std::size_t> column() const noexcept { return column_; }

private:
    std::optional<std::size_t> column_;
};

class SingularMatrix : public SolverError {
public:
    explicit SingularMatrix(std::size_t pivot_index)
        : SolverError("singular matrix: pivot " + std::to_string(pivot_index) + " below threshold"),
          pivot_index_(pivot_index) {}

    [[nodiscard]] std::size_t pivot_index() const noexcept { return pivot_index_; }

private:
    std::size_t pivot_index_;
};

// Scalar iteration hit |Im f(x + ih)| / h < 1e-300.
class SingularDerivative : public SolverError {
public:
    using SolverError::SolverError;
};

class InsufficientHistory : public SolverError {
public:
    using SolverError::SolverError;
};

class DegenerateHistory : public SolverError {
public:
    using SolverError::SolverError;
};

class DimensionMismatch : public SolverError {
public:
    using SolverError::SolverError;
};

class InvalidArgument : public SolverError {
public:
    using SolverError::SolverError;
};

// Stage solve of an implicit Runge-Kutta step did not converge.
class StageSolveFailure : public SolverError {
public:
    StageSolveFailure(std::size_t step_index, const std::string& detail)
        : SolverError("stage solve failed at step " + std::to_string(step_index) + ": " + detail),
          step_index_(step_index) {}

    [[nodiscard]] std::size_t step_index() const noexcept { return step_index_; }

private:
    std::size_t step_index_;
};

}  // namespace csnewton
