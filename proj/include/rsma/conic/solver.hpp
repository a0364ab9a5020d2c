#pragma once

#include "rsma/conic/program.hpp"

#include <string_view>
#include <vector>

namespace rsma::conic {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter, kNumericalError };

std::string_view to_string(SolveStatus status);

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 200;
  /// Fraction of the distance to the cone boundary taken per step.
  double step_fraction = 0.99;
  /// Per-iteration progress on stderr.
  bool verbose = false;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::kNumericalError;
  std::vector<double> primal;
  /// c^T x evaluated on `primal`.
  double objective_value = 0.0;
  /// Dual bound -(b^T y + h^T z) for the returned multipliers.
  double dual_objective = 0.0;
  /// Row-wise relative residuals (see README for the scaling).
  double max_primal_residual = 0.0;
  double max_dual_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
};

/// Homogeneous self-dual embedding interior-point method. LP and SOC blocks
/// use Nesterov-Todd scaling; exponential cones use a primal-dual scaling
/// that falls back to mu times the barrier Hessian near the central path.
/// Never returns kOptimal unless all three measures are within tol.
ConicSolution solve(const ConicProgram& program, const SolverOptions& options = {});
inline ConicSolution solve(const ConicProgram& program, double tol, int max_iter) {
  return solve(program, SolverOptions{tol, max_iter});
}

}  // namespace rsma::conic
