#include "mpcfolio/model.hpp"

#include <cmath>
#include <string>

#include "mpcfolio/errors.hpp"

namespace mpcfolio {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NonFiniteError(std::string(what) + " is not finite");
}

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteError(std::string(what) + " has non-finite entries");
}

void require_size(const Vec& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(v.size()));
  }
}

void check_step_inputs(double wealth, const Vec& control, const Vec& returns,
                       const MarketParams& params) {
  require_size(control, params.n + 1, "control");
  require_size(returns, params.n, "realized_returns");
  require_finite(wealth, "wealth");
  require_finite(control, "control");
  require_finite(returns, "realized_returns");
  if ((returns.array() <= -1.0).any()) {
    throw InvalidArgument("realized returns must exceed -1");
  }
}

}  // namespace

void MarketParams::validate() const {
  if (n < 1) throw InvalidArgument("number of risky assets must be >= 1");
  require_finite(lend_rate, "lend_rate");
  require_finite(borrow_rate, "borrow_rate");
  require_finite(benchmark_growth, "benchmark_growth");
  if (!(lend_rate < borrow_rate)) {
    throw InvalidArgument("lending rate must be strictly below the borrowing rate");
  }
}

ConstraintSpec ConstraintSpec::uniform(int n, double lower, double upper, double riskfree_cap) {
  ConstraintSpec spec;
  spec.lower_fraction = Vec::Constant(n, lower);
  spec.upper_fraction = Vec::Constant(n + 1, upper);
  spec.riskfree_cap = riskfree_cap;
  return spec;
}

void ConstraintSpec::validate(int n) const {
  require_size(lower_fraction, n, "lower_fraction");
  require_size(upper_fraction, n + 1, "upper_fraction");
  require_finite(lower_fraction, "lower_fraction");
  require_finite(upper_fraction, "upper_fraction");
  require_finite(riskfree_cap, "riskfree_cap");
  for (int i = 0; i < n; ++i) {
    if (lower_fraction(i) > upper_fraction(i)) {
      throw InvalidArgument("lower bound exceeds upper bound for asset " + std::to_string(i + 1));
    }
  }
  if (upper_fraction(n) < 0.0) throw InvalidArgument("borrowing cap must be >= 0");
  // u = 0 with the whole wealth in the risk-free asset has to be admissible.
  if (riskfree_cap < 1.0) throw InvalidArgument("risk-free cap fraction must be >= 1");
}

PortfolioState PortfolioState::initial(int n, double wealth) {
  PortfolioState s;
  s.step = 0;
  s.wealth = wealth;
  s.benchmark = wealth;
  s.prev_control = Vec::Zero(n + 1);
  return s;
}

double risk_free_holding(double wealth, const Vec& control) {
  const Eigen::Index n = control.size() - 1;
  return wealth - control.head(n).sum() + control(n);
}

double wealth_step(double wealth, const Vec& control, const Vec& realized_returns,
                   const MarketParams& params) {
  check_step_inputs(wealth, control, realized_returns, params);
  const int n = params.n;
  const double r1 = params.lend_rate;
  const double r2 = params.borrow_rate;
  double next = (1.0 + r1) * wealth;
  for (int i = 0; i < n; ++i) next += (realized_returns(i) - r1) * control(i);
  next -= (r2 - r1) * control(n);
  return next;
}

double wealth_step_gross(double wealth, const Vec& control, const Vec& realized_returns,
                         const MarketParams& params) {
  check_step_inputs(wealth, control, realized_returns, params);
  const int n = params.n;
  const double u0 = risk_free_holding(wealth, control);
  double next = 0.0;
  for (int i = 0; i < n; ++i) next += (1.0 + realized_returns(i)) * control(i);
  next += (1.0 + params.lend_rate) * u0;
  next -= (1.0 + params.borrow_rate) * control(n);
  return next;
}

double benchmark_step(double benchmark, double growth) {
  require_finite(benchmark, "benchmark");
  require_finite(growth, "benchmark growth");
  return (1.0 + growth) * benchmark;
}

Mat constraint_matrix(int n) {
  if (n < 1) throw InvalidArgument("constraint_matrix: n must be >= 1");
  Mat s = Mat::Zero(n + 2, n + 1);
  s.topLeftCorner(n, n).setIdentity();
  s.row(n).head(n).setConstant(-1.0);
  s(n, n) = 1.0;
  s(n + 1, n) = 1.0;
  return s;
}

ControlBounds constraint_bounds(double wealth, const ConstraintSpec& spec) {
  require_finite(wealth, "wealth");
  if (wealth < 0.0) throw WealthExhausted(wealth);
  const Eigen::Index n = spec.lower_fraction.size();
  ControlBounds b{Vec(n + 2), Vec(n + 2)};
  b.lower.head(n) = spec.lower_fraction * wealth;
  b.upper.head(n) = spec.upper_fraction.head(n) * wealth;
  b.lower(n) = -wealth;
  b.upper(n) = spec.riskfree_cap * wealth - wealth;
  b.lower(n + 1) = 0.0;
  b.upper(n + 1) = spec.upper_fraction(n) * wealth;
  return b;
}

TradeDecision make_trade_decision(const PortfolioState& state, const Vec& control,
                                  const Mat& cost_matrix) {
  require_size(control, state.prev_control.size(), "control");
  TradeDecision d;
  d.control = control;
  d.risk_free = risk_free_holding(state.wealth, control);
  d.trade = control - state.prev_control;
  d.cost = d.trade.dot(cost_matrix * d.trade);
  return d;
}

}  // namespace mpcfolio
