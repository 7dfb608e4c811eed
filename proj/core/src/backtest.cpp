#include "mpcfolio/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mpcfolio/errors.hpp"

namespace mpcfolio {

BacktestConfig BacktestConfig::defaults(int n) {
  BacktestConfig c;
  c.market.n = n;
  c.constraints = ConstraintSpec::uniform(n, -0.6, 3.0, 3.0);
  c.horizon = 10;
  c.rho.assign(static_cast<std::size_t>(c.horizon), 0.1);
  c.cost.assign(static_cast<std::size_t>(c.horizon + 1), 1e-4 * Mat::Identity(n + 1, n + 1));
  return c;
}

namespace {

void check_schedules(const std::vector<double>& rho, const std::vector<Mat>& cost, int horizon,
                     int n, const std::string& where) {
  if (rho.size() != static_cast<std::size_t>(horizon)) {
    throw InvalidArgument(where + ": rho schedule needs " + std::to_string(horizon) + " entries");
  }
  for (double r : rho) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument(where + ": rho must be positive");
  }
  if (cost.size() != static_cast<std::size_t>(horizon + 1)) {
    throw InvalidArgument(where + ": cost schedule needs R(k,0..m), " +
                          std::to_string(horizon + 1) + " matrices");
  }
  for (const auto& r : cost) {
    if (r.rows() != n + 1 || r.cols() != n + 1) {
      throw InvalidArgument(where + ": cost matrices must be (n+1) x (n+1)");
    }
    if (!r.allFinite()) throw InvalidArgument(where + ": cost matrix has non-finite entries");
    if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + r.cwiseAbs().maxCoeff())) {
      throw InvalidArgument(where + ": cost matrix is not symmetric");
    }
    if (Eigen::LLT<Mat>(r).info() != Eigen::Success) {
      throw InvalidArgument(where + ": cost matrix is not positive definite");
    }
  }
}

}  // namespace

void BacktestConfig::validate() const {
  market.validate();
  const int n = market.n;
  constraints.validate(n);
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  check_schedules(rho, cost, horizon, n, "schedule");
  for (const auto& o : overrides) {
    check_schedules(o.rho.value_or(rho), o.cost.value_or(cost), horizon, n,
                    "override from step " + std::to_string(o.from_step));
  }
  if (estimation_window < min_var2_rows(n)) {
    throw InvalidArgument("estimation_window must be >= " + std::to_string(min_var2_rows(n)) +
                          " for " + std::to_string(n) + " assets");
  }
  if (trend_window < 1 || trend_window > estimation_window) {
    throw InvalidArgument("trend_window must be in [1, estimation_window]");
  }
  if (start >= 0 && start < estimation_window) {
    throw InvalidArgument("start must be >= estimation_window");
  }
  if (end >= 0 && end <= first_step()) throw InvalidArgument("end must exceed start");
  if (!(initial_wealth > 0.0) || !std::isfinite(initial_wealth)) {
    throw InvalidArgument("initial_wealth must be positive");
  }
  if (mean_clamp && !(*mean_clamp > 0.0)) throw InvalidArgument("mean_clamp must be positive");
  if (!(solver.tol > 0.0) || solver.max_iter < 1) throw InvalidArgument("invalid solver settings");
}

BacktestSummary summarize(const std::vector<StepRecord>& records, double initial_wealth,
                          bool ruin) {
  BacktestSummary s;
  s.steps = static_cast<int>(records.size());
  s.ruin = ruin;
  s.terminal_wealth = records.empty() ? initial_wealth : records.back().wealth;
  s.terminal_benchmark = records.empty() ? initial_wealth : records.back().benchmark;
  double sq = 0.0;
  int beat = 0;
  for (const auto& r : records) {
    const double gap = r.wealth - r.benchmark;
    sq += gap * gap;
    s.total_cost += r.cost;
    if (gap > 0.0) ++beat;
  }
  if (!records.empty()) {
    s.tracking_rmse = std::sqrt(sq / static_cast<double>(records.size()));
    s.beat_fraction = static_cast<double>(beat) / static_cast<double>(records.size());
  }
  return s;
}

BacktestReport run_backtest(const BacktestConfig& config, const Mat& returns,
                            const std::vector<std::string>& dates,
                            const std::vector<std::string>& assets) {
  config.validate();
  const int n = config.market.n;
  if (returns.cols() != n) {
    throw DimensionError("returns have " + std::to_string(returns.cols()) +
                         " columns, config expects " + std::to_string(n));
  }
  if (!returns.allFinite()) throw DataError("returns contain non-finite values");
  if ((returns.array() <= -1.0).any()) throw DataError("returns must exceed -1");
  const int rows = static_cast<int>(returns.rows());
  if (!dates.empty() && dates.size() != static_cast<std::size_t>(rows)) {
    throw DimensionError("dates must label every return row");
  }
  const int start = config.first_step();
  const int end = config.end < 0 ? rows : config.end;
  if (end > rows) {
    throw DataError("end step " + std::to_string(end) + " exceeds the " + std::to_string(rows) +
                    " available return rows");
  }
  if (start >= end) {
    throw DataError("need more than " + std::to_string(start) +
                    " return rows for estimation plus at least one trading step");
  }

  BacktestReport report;
  report.initial_wealth = config.initial_wealth;
  if (assets.empty()) {
    for (int i = 1; i <= n; ++i) report.assets.push_back("asset" + std::to_string(i));
  } else {
    report.assets = assets;
  }

  const int window = config.estimation_window;
  auto fit = [&](int k) {
    Var2Model model = estimate_var2(returns.middleRows(k - window, window));
    const double radius = companion_spectral_radius(model.lag1, model.lag2);
    if (radius >= 1.0) {
      report.warnings.push_back("step " + std::to_string(k) +
                                ": fitted VAR(2) is explosive (companion spectral radius " +
                                std::to_string(radius) + ")");
    }
    return model;
  };
  Var2Model model = fit(start);

  QpBuildOptions build_opts;
  build_opts.rbar = config.rbar_paper_literal ? RbarForm::printed_literal : RbarForm::exact;
  MeanForecastOptions mean_opts;
  mean_opts.clamp = config.mean_clamp;

  PortfolioState state = PortfolioState::initial(n, config.initial_wealth);
  state.step = start;
  std::optional<Vec> last_plan;
  double last_plan_wealth = state.wealth;
  bool ruin = false;

  for (int k = start; k < end; ++k) {
    if (!(state.wealth > 0.0)) {
      ruin = true;
      break;
    }
    if (config.reestimate && k > start) model = fit(k);

    // Forecast inputs: rows strictly before k.
    const Vec intercept =
        trend_adjusted_intercept(model, returns.middleRows(k - config.trend_window, config.trend_window));
    const Vec eta_k = returns.row(k - 1).transpose();
    const Vec eta_km1 = returns.row(k - 2).transpose();
    const auto means = predict_means(model, intercept, eta_k, eta_km1, config.horizon, mean_opts);
    const MomentForecast forecast = predict_second_moments(model, means);

    const std::vector<double>* rho = &config.rho;
    const std::vector<Mat>* cost = &config.cost;
    int rho_from = -1;
    int cost_from = -1;
    for (const auto& o : config.overrides) {
      if (o.from_step > k) continue;
      if (o.rho && o.from_step >= rho_from) {
        rho = &*o.rho;
        rho_from = o.from_step;
      }
      if (o.cost && o.from_step >= cost_from) {
        cost = &*o.cost;
        cost_from = o.from_step;
      }
    }
    const QpBuildContext ctx =
        QpBuildContext::make(config.market, config.horizon, state.benchmark, *rho, *cost);
    const QpProblem qp = assemble_qp(state, ctx, forecast, config.constraints, build_opts);

    QpSolverOptions solver_opts = config.solver;
    if (last_plan) solver_opts.warm_start = *last_plan * (state.wealth / last_plan_wealth);
    const QpSolution sol = solve(qp, solver_opts);
    if (sol.status != QpStatus::optimal) {
      report.outcome = BacktestOutcome::solver_failure;
      report.failed_step = k;
      report.message = "solver returned " + std::string(to_string(sol.status)) + " at step " +
                       std::to_string(k);
      break;
    }
    last_plan = sol.x;
    last_plan_wealth = state.wealth;

    const Vec control = extract_control(sol.x, n + 1);
    const TradeDecision decision = make_trade_decision(state, control, ctx.cost[0]);
    const Vec realized = returns.row(k).transpose();

    StepRecord rec;
    rec.k = k;
    rec.date = dates.empty() ? std::string() : dates[static_cast<std::size_t>(k)];
    rec.wealth_before = state.wealth;
    rec.benchmark_before = state.benchmark;
    rec.wealth = wealth_step(state.wealth, control, realized, config.market);
    rec.benchmark = benchmark_step(state.benchmark, config.market.benchmark_growth);
    rec.control = control;
    rec.risk_free = decision.risk_free;
    rec.trade = decision.trade;
    rec.cost = decision.cost;
    rec.status = sol.status;
    rec.solver_iterations = sol.iterations;
    rec.realized_returns = realized;
    report.records.push_back(rec);

    state.step = k + 1;
    state.wealth = rec.wealth;
    state.benchmark = rec.benchmark;
    state.prev_control = control;
    if (!(state.wealth > 0.0)) {
      ruin = true;
      break;
    }
  }

  if (ruin) {
    report.outcome = BacktestOutcome::ruin;
    report.failed_step = state.step;
    report.message = "portfolio wealth exhausted at step " + std::to_string(state.step);
  }
  report.summary = summarize(report.records, config.initial_wealth, ruin);
  return report;
}

Mat simulate_synthetic(const SyntheticSpec& spec, int length, std::uint64_t seed) {
  const Var2Model& m = spec.model;
  const int n = m.dim();
  if (n < 1) throw InvalidArgument("synthetic model has no assets");
  if (m.lag1.rows() != n || m.lag1.cols() != n || m.lag2.rows() != n || m.lag2.cols() != n ||
      m.innovation_cov.rows() != n || m.innovation_cov.cols() != n) {
    throw DimensionError("synthetic model matrices must be n x n");
  }
  if (length < 0 || spec.burn_in < 0) throw InvalidArgument("length and burn_in must be >= 0");
  const double radius = companion_spectral_radius(m.lag1, m.lag2);
  if (radius >= 1.0 && !spec.allow_unstable) {
    throw InvalidArgument("synthetic VAR(2) is not stable (spectral radius " +
                          std::to_string(radius) + "); set allow_unstable to simulate anyway");
  }

  // Innovation factor: Cholesky, or a symmetric square root for singular covariances.
  Mat factor;
  Eigen::LLT<Mat> llt(m.innovation_cov);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(m.innovation_cov);
    if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff())) {
      throw InvalidArgument("innovation covariance is not positive semidefinite");
    }
    factor = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  Vec level = m.intercept;
  if (radius < 1.0) {
    level = (Mat::Identity(n, n) - m.lag1 - m.lag2).partialPivLu().solve(m.intercept);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec prev2 = level;
  Vec prev1 = level;
  Vec z(n);
  Mat out(length, n);
  const int total = spec.burn_in + length;
  for (int t = 0; t < total; ++t) {
    for (int i = 0; i < n; ++i) z(i) = normal(rng);
    Vec next = m.intercept + m.lag1 * prev1 + m.lag2 * prev2 + factor * z;
    if (t >= spec.burn_in) out.row(t - spec.burn_in) = next.transpose();
    prev2 = std::move(prev1);
    prev1 = std::move(next);
  }
  return out;
}

}  // namespace mpcfolio
