#pragma once

/**
 * @file model.hpp
 * @brief Portfolio state, self-financing wealth dynamics and trading constraints.
 *
 * Control vector layout (length n + 1):
 *   u(0..n-1)  amounts held in the n risky assets (negative = short)
 *   u(n)       amount borrowed at the borrowing rate (>= 0)
 * The risk-free holding is implied by the budget identity
 *   u0 = V - sum(u_risky) + u_borrow.
 *
 * All monetary quantities are multiples of the initial wealth.
 */

#include <Eigen/Dense>

namespace mpcfolio {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct MarketParams {
  int n = 1;                       ///< number of risky assets
  double lend_rate = 0.0001;       ///< r1, earned on the risk-free holding
  double borrow_rate = 0.0002;     ///< r2, paid on borrowed amounts
  double benchmark_growth = 0.0015;  ///< mu0, per-period benchmark growth

  /// Throws InvalidArgument unless n >= 1, r1 < r2 and all rates are finite.
  void validate() const;
  /// A = 1 + r1, the per-period growth of wealth held at the lending rate.
  double growth_factor() const { return 1.0 + lend_rate; }
};

/**
 * Wealth-proportional bounds on the trading amounts.
 *
 * Risky asset i is bounded to [lower_fraction(i) V, upper_fraction(i) V];
 * borrowing to [0, upper_fraction(n) V]; the risk-free holding to
 * [0, riskfree_cap V].
 */
struct ConstraintSpec {
  Vec lower_fraction;   ///< beta, length n
  Vec upper_fraction;   ///< gamma, length n + 1 (last entry: borrowing)
  double riskfree_cap = 3.0;

  static ConstraintSpec uniform(int n, double lower, double upper, double riskfree_cap = 3.0);
  void validate(int n) const;
};

struct PortfolioState {
  int step = 0;
  double wealth = 1.0;
  double benchmark = 1.0;
  Vec prev_control;  ///< u(k-1), length n + 1

  /// State at k = 0: V(0) = V0(0) = wealth and no previous position.
  static PortfolioState initial(int n, double wealth = 1.0);
};

struct TradeDecision {
  Vec control;       ///< u(k), length n + 1
  double risk_free;  ///< u0(k) implied by the budget identity
  Vec trade;         ///< u(k) - u(k-1)
  double cost;       ///< trade' R(k,0) trade
};

/// Bound vectors for the n + 2 rows of constraint_matrix().
struct ControlBounds {
  Vec lower;
  Vec upper;
};

/// Risk-free holding implied by the budget identity.
double risk_free_holding(double wealth, const Vec& control);

/// Next-period wealth in the excess-return form A V + sum (eta_i - r1) u_i - (r2 - r1) u_borrow.
double wealth_step(double wealth, const Vec& control, const Vec& realized_returns,
                   const MarketParams& params);

/// Next-period wealth from gross asset growth with the risk-free holding made explicit.
/// Algebraically identical to wealth_step(); kept as an independent evaluation path.
double wealth_step_gross(double wealth, const Vec& control, const Vec& realized_returns,
                         const MarketParams& params);

double benchmark_step(double benchmark, double growth);

/// S = [[I_n, 0]; [-1', 1]; [0', 1]], shape (n + 2) x (n + 1).
Mat constraint_matrix(int n);

/// Bounds (u_min, u_max) for S u at wealth V. Throws WealthExhausted when V < 0.
ControlBounds constraint_bounds(double wealth, const ConstraintSpec& spec);

TradeDecision make_trade_decision(const PortfolioState& state, const Vec& control,
                                  const Mat& cost_matrix);

}  // namespace mpcfolio
