#pragma once

/**
 * @file qp_solver.hpp
 * @brief Dense strictly convex QP solver.
 *
 *   minimize    1/2 x' P x + q' x
 *   subject to  lower <= C x <= upper      (entries may be infinite)
 *
 * Dual active-set method of Goldfarb and Idnani: start from the
 * unconstrained minimiser and repeatedly add the most violated constraint,
 * dropping active constraints whose multipliers would turn negative. Every
 * iterate is the exact minimiser over its active set, so the primal
 * objective is non-decreasing along the trace. Sized for a few hundred
 * variables and a few dozen constraint rows.
 */

#include <optional>
#include <string_view>
#include <vector>

#include "mpcfolio/qp_builder.hpp"

namespace mpcfolio {

enum class QpStatus { optimal, max_iterations, infeasible };

std::string_view to_string(QpStatus status);

struct KktResiduals {
  double stationarity = 0.0;     ///< ||P x + q + C' lambda||_inf
  double primal = 0.0;           ///< largest bound violation of C x
  double complementarity = 0.0;  ///< largest |lambda_i| times distance to its bound
};

struct QpSolverOptions {
  double tol = 1e-8;
  int max_iter = 50000;
  /// Previous solution; constraints active there seed the initial working set.
  std::optional<Vec> warm_start;
  bool record_trace = false;
};

struct QpSolution {
  Vec x;
  /// One multiplier per row of C: > 0 when the upper bound binds, < 0 for the lower bound.
  Vec multipliers;
  double objective = 0.0;
  QpStatus status = QpStatus::infeasible;
  KktResiduals kkt;
  int iterations = 0;
  bool warm_started = false;
  /// Objective after each primal step (only when record_trace is set).
  std::vector<double> objective_trace;
};

/// Throws InvalidArgument when P is not symmetric positive definite or shapes disagree.
QpSolution solve(const QpProblem& problem, const QpSolverOptions& options = {});

/// Residuals of the first-order optimality conditions at (x, multipliers).
KktResiduals kkt_residuals(const QpProblem& problem, const Vec& x, const Vec& multipliers);

/// True when all residuals are within tol (stationarity scaled by 1 + ||q||_inf).
bool kkt_satisfied(const QpProblem& problem, const KktResiduals& r, double tol);

}  // namespace mpcfolio
