#pragma once

/**
 * @file qp_builder.hpp
 * @brief Receding-horizon tracking objective as a dense quadratic program.
 *
 * Decision vector U = [u(k/k); u(k+1/k); ...; u(k+m-1/k)], each block of
 * length n + 1. Over the horizon the wealth obeys
 *   V(k+i) = A^i V(k) + sum_{s<i} A^{i-1-s} b(k+s+1) u(k+s/k),
 *   b(t) = [eta_1(t) - r1, ..., eta_n(t) - r1, r1 - r2],
 * and the tracking criterion is
 *   J = E sum_{i=1..m} [V(k+i)^2 - R1(i) V(k+i)]
 *       + sum_{i=0..m-1} du_i' R(k,i) du_i,        du_i = u(k+i/k) - u(k+i-1/k),
 * with R1(i) = 2 V0(k+i) + rho(k,i).
 *
 * Expanding J gives J = const + Y(U) with
 *   Y(U) = (2 V(k) G - F) U + U' (H + Rbar) U.
 * The solver works with 1/2 U' P U + q' U, so P = 2 (H + Rbar) and
 * q = (2 V(k) G - F)'.
 *
 * Only the first horizon block is constrained: S u(k/k) in [u_min, u_max].
 * Later blocks are free because their bounds depend on unrealised wealth.
 */

#include <vector>

#include "mpcfolio/forecast.hpp"
#include "mpcfolio/model.hpp"

namespace mpcfolio {

struct QpBuildContext {
  int horizon = 1;                      ///< m
  double growth = 1.0;                  ///< A = 1 + r1
  double lend_rate = 0.0;               ///< r1
  double borrow_rate = 0.0;             ///< r2
  std::vector<double> rho;              ///< rho(k, i), i = 1..m (index i - 1)
  std::vector<Mat> cost;                ///< R(k, i), i = 0..m (index i); R(k, m) only used by the printed-form variant
  std::vector<double> benchmark_path;   ///< V0(k + i), i = 1..m (index i - 1)

  /// Constant schedules: rho and R are the same for every horizon step.
  static QpBuildContext make(const MarketParams& market, int horizon, double benchmark_now,
                             double rho, const Mat& cost);
  static QpBuildContext make(const MarketParams& market, int horizon, double benchmark_now,
                             std::vector<double> rho, std::vector<Mat> cost);

  int block_size() const { return static_cast<int>(cost.front().rows()); }
  /// R1(k, t) = 2 V0(k + t) + rho(k, t), t in [1, m].
  double tracking_weight(int t) const;
  void validate() const;
};

struct QpProblem {
  Mat P;      ///< quadratic term, symmetric positive definite
  Vec q;      ///< linear term
  Mat C;      ///< constraint rows
  Vec lower;  ///< may hold -infinity
  Vec upper;  ///< may hold +infinity
};

/// Which form of the transaction-cost Hessian block matrix to build.
enum class RbarForm {
  exact,           ///< Hessian of the m-term cost sum; last diagonal block R(k, m-1)
  printed_literal  ///< last diagonal block R(k, m-1) + R(k, m), as typeset in the derivation
};

/// Where the previous-position term 2 R(k,0) u(k-1) enters the linear term.
enum class PrevTradeTerm {
  first_block,         ///< expansion of the i = 0 cost term (correct)
  every_block_literal  ///< subtracted from every block with the opposite sign, as typeset
};

struct QpBuildOptions {
  RbarForm rbar = RbarForm::exact;
  PrevTradeTerm prev_trade = PrevTradeTerm::first_block;
};

/// Q1(t) = A^2 Q1(t-1) + 1, Q1(0) = 1; returns t = 0..m-1.
std::vector<double> q1_recursion(int horizon, double growth);

/// Q2(t) = A Q2(t-1) + R1(m-t), Q2(0) = R1(m); returns t = 0..m-1.
/// `tracking_weight[t - 1]` holds R1(t).
std::vector<double> q2_recursion(int horizon, double growth,
                                 const std::vector<double>& tracking_weight);

/// E{b(k+t)} = [mean - r1, r1 - r2] as a column of length n + 1.
Vec expected_b(const Vec& mean, double lend_rate, double borrow_rate);

/// E{b(k+t)' b(k+f)}, an (n+1) x (n+1) matrix; t, f in [1, m].
Mat expected_outer_b(const MomentForecast& forecast, int t, int f, double lend_rate,
                     double borrow_rate);

Mat build_H(const QpBuildContext& ctx, const MomentForecast& forecast);
Vec build_G(const QpBuildContext& ctx, const MomentForecast& forecast);
Vec build_F(const QpBuildContext& ctx, const MomentForecast& forecast, const Vec& prev_control,
            PrevTradeTerm form = PrevTradeTerm::first_block);
Mat build_Rbar(const QpBuildContext& ctx, RbarForm form = RbarForm::exact);

/// Full QP for the state at k. Throws InvalidArgument when the first-block bounds are empty.
QpProblem assemble_qp(const PortfolioState& state, const QpBuildContext& ctx,
                      const MomentForecast& forecast, const ConstraintSpec& spec,
                      const QpBuildOptions& options = {});

/// Same QP built by forming the stacked horizon dynamics X = Psi V + Phi U explicitly
/// and taking expectations term by term. Independent of the block recursions; used to
/// cross-check assemble_qp().
QpProblem build_qp_oracle(const PortfolioState& state, const QpBuildContext& ctx,
                          const MomentForecast& forecast, const ConstraintSpec& spec);

/// First n + 1 entries of the stacked solution.
Vec extract_control(const Vec& stacked, int block_size);

/// 1/2 U' P U + q' U, which equals Y(U) for assembled problems.
double qp_objective(const QpProblem& problem, const Vec& u);

/// U-independent part of J: V^2 Psi'Psi - Delta1 Psi V + u(k-1)' R(k,0) u(k-1).
double objective_constant(const PortfolioState& state, const QpBuildContext& ctx);

}  // namespace mpcfolio
