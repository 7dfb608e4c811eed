#pragma once

/**
 * @file backtest.hpp
 * @brief Receding-horizon trading loop over a return history.
 *
 * Indexing: row t of the return matrix is the return over (t, t+1], known
 * from time t+1 on. The decision at time k sees rows [0, k) only and is
 * exposed to row k. Decisions run for k in [start, end).
 *
 * Forecast policy: VAR(2) coefficients and innovation covariance are fitted
 * once on the `estimation_window` rows before `start` (or refitted every step
 * when `reestimate` is set); the intercept is re-centred every step on the
 * mean of the last `trend_window` rows.
 */

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mpcfolio/forecast.hpp"
#include "mpcfolio/qp_solver.hpp"

namespace mpcfolio {

/// Replaces the rho and/or R schedule from decision time `from_step` on.
struct ScheduleOverride {
  int from_step = 0;
  std::optional<std::vector<double>> rho;  ///< rho(k, i), i = 1..m
  std::optional<std::vector<Mat>> cost;    ///< R(k, i), i = 0..m
};

struct BacktestConfig {
  MarketParams market;
  ConstraintSpec constraints;
  int horizon = 10;
  std::vector<double> rho;  ///< rho(k, i), i = 1..m
  std::vector<Mat> cost;    ///< R(k, i), i = 0..m
  std::vector<ScheduleOverride> overrides;
  int estimation_window = 200;
  int trend_window = 2;
  int start = -1;  ///< first decision time; -1 means estimation_window
  int end = -1;    ///< one past the last decision time; -1 means all rows
  double initial_wealth = 1.0;
  bool reestimate = false;
  std::optional<double> mean_clamp;
  bool rbar_paper_literal = false;
  std::uint64_t seed = 0;
  QpSolverOptions solver;

  /// Reference defaults for n assets: m = 10, rho = 0.1, R = 1e-4 I, beta = -0.6, gamma = 3.
  static BacktestConfig defaults(int n);
  /// Throws InvalidArgument naming the first violated invariant.
  void validate() const;
  int first_step() const { return start < 0 ? estimation_window : start; }
};

struct StepRecord {
  int k = 0;
  std::string date;              ///< date at the end of the period (k, k+1]
  double wealth_before = 0.0;    ///< V(k)
  double benchmark_before = 0.0; ///< V0(k)
  double wealth = 0.0;           ///< V(k+1)
  double benchmark = 0.0;        ///< V0(k+1)
  Vec control;                   ///< u(k)
  double risk_free = 0.0;        ///< u0(k)
  Vec trade;
  double cost = 0.0;
  QpStatus status = QpStatus::optimal;
  int solver_iterations = 0;
  Vec realized_returns;          ///< eta(k+1)
};

enum class BacktestOutcome { completed, ruin, solver_failure };

struct BacktestSummary {
  double terminal_wealth = 0.0;
  double terminal_benchmark = 0.0;
  double tracking_rmse = 0.0;
  double total_cost = 0.0;
  double beat_fraction = 0.0;
  int steps = 0;
  bool ruin = false;
};

struct BacktestReport {
  std::vector<std::string> assets;
  double initial_wealth = 1.0;
  std::vector<StepRecord> records;
  BacktestSummary summary;
  BacktestOutcome outcome = BacktestOutcome::completed;
  std::string message;  ///< diagnostic for ruin or solver failure
  int failed_step = -1;
  std::vector<std::string> warnings;
};

/**
 * Runs the loop. `dates[t]`, when given, labels return row t.
 * Ruin and solver failures stop the loop and are reported in the outcome;
 * malformed inputs throw.
 */
BacktestReport run_backtest(const BacktestConfig& config, const Mat& returns,
                            const std::vector<std::string>& dates = {},
                            const std::vector<std::string>& assets = {});

BacktestSummary summarize(const std::vector<StepRecord>& records, double initial_wealth,
                          bool ruin);

/// Gaussian VAR(2) generator settings.
struct SyntheticSpec {
  Var2Model model;
  int burn_in = 200;
  bool allow_unstable = false;
};

/// `length` return rows of the VAR(2) after `burn_in` discarded steps, seeded deterministically.
Mat simulate_synthetic(const SyntheticSpec& spec, int length, std::uint64_t seed);

/// Writes steps.csv, summary.txt, wealth.csv, allocations.csv and returns.csv into `out_dir`.
void emit_report(const BacktestReport& report, const std::filesystem::path& out_dir);

}  // namespace mpcfolio
