#pragma once

// JSON run configuration for the command-line tool.
//
// Top-level sections (all optional unless noted):
//   market       lend_rate, borrow_rate, benchmark_growth
//   constraints  asset_lower, asset_upper (number or per-asset array), borrow_cap, riskfree_cap
//   mpc          horizon (required for backtests), rho (number or per-step array),
//                transaction_cost, rbar_paper_literal, overrides
//   forecast     estimation_window, trend_window, reestimate, mean_clamp
//   backtest     start, end, initial_wealth
//   solver       tol, max_iter
//   seed         unsigned integer
//   synthetic    length, burn_in, start_date, allow_unstable, intercept, lag1, lag2, innovation_cov
//   manifest     written by the tool; ignored on input
//
// transaction_cost takes a number c (c * I), a diagonal array of length n+1, an
// (n+1) x (n+1) matrix, or an array of m+1 such matrices for R(k,0..m).

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpcfolio/backtest.hpp"

namespace mpcfolio::cli {

/// All problems found while reading a config, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Number, per-entry array, or explicit list, resolved once n and m are known.
using ScalarOrList = std::variant<double, std::vector<double>>;

/// Cost matrix spec before n is known.
struct CostSpec {
  enum class Kind { scalar, diagonal, matrix, schedule } kind = Kind::scalar;
  double scalar = 1e-4;
  std::vector<double> diagonal;
  std::vector<std::vector<double>> matrix;
  std::vector<std::vector<std::vector<double>>> schedule;
};

struct OverrideSpec {
  int from_step = 0;
  std::optional<ScalarOrList> rho;
  std::optional<CostSpec> cost;
};

struct SyntheticConfig {
  int length = 1500;
  int burn_in = 200;
  std::string start_date = "2020-01-01";
  bool allow_unstable = false;
  Var2Model model;
};

struct RunConfig {
  MarketParams market;
  ScalarOrList asset_lower = -0.6;
  ScalarOrList asset_upper = 3.0;
  double borrow_cap = 3.0;
  double riskfree_cap = 3.0;

  std::optional<int> horizon;
  ScalarOrList rho = 0.1;
  CostSpec cost;
  bool rbar_paper_literal = false;
  std::vector<OverrideSpec> overrides;

  int estimation_window = 200;
  int trend_window = 2;
  bool reestimate = false;
  std::optional<double> mean_clamp;

  int start = -1;
  int end = -1;
  double initial_wealth = 1.0;

  double solver_tol = 1e-8;
  int solver_max_iter = 50000;

  std::uint64_t seed = 0;
  SyntheticConfig synthetic;
};

/// Five-asset VAR(2) used when the config has no synthetic model.
Var2Model default_synthetic_model();

/// Parses and type-checks a config document. Throws ConfigError listing every problem.
/// `require_horizon` is set for commands that run the controller.
RunConfig parse_config(const nlohmann::json& doc, bool require_horizon = true);
RunConfig load_config(const std::string& path, bool require_horizon = true);

/// Engine configuration for n assets. Throws ConfigError when shapes or values do not fit.
BacktestConfig resolve_backtest(const RunConfig& config, int n);

/// Fully materialised config (every default written out) for `n` assets.
/// When `n` is zero the asset-dependent entries are written as given.
nlohmann::json resolved_json(const RunConfig& config, int n);

}  // namespace mpcfolio::cli
