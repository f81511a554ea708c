#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace distdom {

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class VarBound { nonnegative, free };

/// maximize objective . x  subject to  A x = b, x_j >= 0 unless free.
struct LinearProgram {
  std::vector<double> objective;
  Matrix a;
  std::vector<double> b;
  std::vector<VarBound> bounds;

  std::size_t num_vars() const noexcept { return objective.size(); }
  std::size_t num_rows() const noexcept { return b.size(); }
};

enum class LPStatus { optimal, infeasible, unbounded };

const char* to_string(LPStatus status);

struct LPSolution {
  LPStatus status = LPStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

/// Primal feasibility tolerance on A x - b and on the phase-one optimum.
inline constexpr double kFeasibilityTolerance = 1e-7;

/// Raised when the solver cannot certify its own optimum.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-phase dense tableau simplex with Bland's rule. Free variables that
/// occur in a single row are eliminated before the simplex runs; other free
/// variables are split into a difference of two nonnegative ones.
///
/// Throws std::invalid_argument on malformed dimensions and SolverError when
/// the returned optimum fails the residual check.
LPSolution solve(const LinearProgram& lp);

}  // namespace distdom
