#include "commands.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "mpcfolio/backtest.hpp"
#include "mpcfolio/errors.hpp"
#include "mpcfolio/price_data.hpp"
#include "run_config.hpp"

namespace mpcfolio::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void report_config_error(const ConfigError& e, std::ostream& log) {
  log << "config error:\n";
  for (const auto& p : e.problems()) log << "  " << p << '\n';
}

void report_data_error(const DataError& e, const std::string& source, std::ostream& log) {
  log << "data error: " << source;
  if (e.line() > 0) log << ":" << e.line();
  log << ": " << e.what() << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

RunConfig load_with_seed(const std::string& config_path, bool require_horizon,
                         const CommonOptions& options) {
  RunConfig config = load_config(config_path, require_horizon);
  if (options.seed) config.seed = *options.seed;
  return config;
}

json manifest_json(const RunConfig& config, int n, json inputs) {
  json doc = resolved_json(config, n);
  doc["manifest"] = {{"tool_version", kToolVersion}, {"inputs", std::move(inputs)}};
  return doc;
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 init failed");
  }
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

int cmd_backtest(const std::string& config_path, const std::string& prices_path,
                 const std::string& out_dir, const CommonOptions& options, std::ostream& log) {
  RunConfig config;
  PriceTable table;
  try {
    config = load_with_seed(config_path, true, options);
  } catch (const ConfigError& e) {
    report_config_error(e, log);
    return exit_config;
  }
  try {
    table = load_prices(prices_path);
  } catch (const DataError& e) {
    report_data_error(e, prices_path, log);
    return exit_data;
  }
  const int n = static_cast<int>(table.assets.size());

  BacktestConfig bt;
  try {
    bt = resolve_backtest(config, n);
  } catch (const ConfigError& e) {
    report_config_error(e, log);
    return exit_config;
  }

  Mat returns;
  std::vector<std::string> dates;
  try {
    returns = prices_to_returns(table.prices);
  } catch (const DataError& e) {
    report_data_error(e, prices_path, log);
    return exit_data;
  }
  // Return row t covers (t, t+1] and carries the closing date of t+1.
  if (table.dates.size() > 1) dates.assign(table.dates.begin() + 1, table.dates.end());

  const int first = bt.first_step();
  const int last = bt.end < 0 ? static_cast<int>(returns.rows()) : bt.end;
  if (first < min_var2_rows(n) || first > last || last > returns.rows()) {
    log << "data error: " << prices_path << ": " << returns.rows() << " return rows cannot support "
        << "decisions from " << first << " to " << last << " with " << n << " assets (at least "
        << min_var2_rows(n) << " estimation rows are needed)\n";
    return exit_data;
  }

  if (options.verbose) {
    log << "backtest: " << n << " assets, " << returns.rows() << " return rows, decisions "
        << first << ".." << last << ", horizon " << bt.horizon << '\n';
  }

  BacktestReport report;
  try {
    report = run_backtest(bt, returns, dates, table.assets);
  } catch (const RankDeficientError& e) {
    log << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const DataError& e) {
    report_data_error(e, prices_path, log);
    return exit_data;
  } catch (const InvalidArgument& e) {
    log << "config error:\n  " << e.what() << '\n';
    return exit_config;
  }

  fs::create_directories(out_dir);
  emit_report(report, out_dir);
  const json inputs = {{"prices", {{"path", prices_path}, {"sha256", sha256_file(prices_path)}}},
                       {"config", {{"path", config_path}, {"sha256", sha256_file(config_path)}}}};
  write_text(fs::path(out_dir) / "manifest.json", manifest_json(config, n, inputs).dump(2) + "\n");

  for (const auto& w : report.warnings) log << "warning: " << w << '\n';
  if (options.verbose || report.outcome != BacktestOutcome::completed) {
    log << "steps " << report.summary.steps << ", terminal wealth "
        << format_double(report.summary.terminal_wealth) << ", benchmark "
        << format_double(report.summary.terminal_benchmark) << ", tracking rmse "
        << format_double(report.summary.tracking_rmse) << '\n';
  }
  switch (report.outcome) {
    case BacktestOutcome::completed:
      return exit_ok;
    case BacktestOutcome::solver_failure:
      log << "solver failure at step " << report.failed_step << ": " << report.message << '\n';
      return exit_solver;
    case BacktestOutcome::ruin:
      log << "ruin at step " << report.failed_step << ": " << report.message << '\n';
      return exit_ruin;
  }
  return exit_io;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const CommonOptions& options, std::ostream& log) {
  RunConfig config;
  try {
    config = load_with_seed(config_path, false, options);
  } catch (const ConfigError& e) {
    report_config_error(e, log);
    return exit_config;
  }
  const SyntheticConfig& syn = config.synthetic;
  const int n = syn.model.dim();

  PriceTable table;
  for (int i = 0; i < n; ++i) table.assets.push_back("asset" + std::to_string(i + 1));
  table.prices = Mat(syn.length, n);
  if (syn.length > 0) {
    Mat returns;
    try {
      returns = simulate_synthetic({syn.model, syn.burn_in, syn.allow_unstable}, syn.length - 1,
                                   config.seed);
    } catch (const Error& e) {
      log << "config error:\n  synthetic: " << e.what() << '\n';
      return exit_config;
    }
    table.prices.row(0).setConstant(100.0);
    for (int t = 1; t < syn.length; ++t) {
      table.prices.row(t) = table.prices.row(t - 1).cwiseProduct((1.0 + returns.row(t - 1).array()).matrix());
    }
    if ((table.prices.array() <= 0.0).any()) {
      log << "data error: simulated prices reached zero; reduce innovation_cov\n";
      return exit_data;
    }
    table.dates = business_days(syn.start_date, static_cast<std::size_t>(syn.length));
  }

  const fs::path out(out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ostringstream text;
  write_prices(text, table);
  write_text(out, text.str());
  if (options.verbose) log << "simulate: wrote " << syn.length << " rows for " << n << " assets\n";
  return exit_ok;
}

int cmd_calibrate(const std::string& prices_path, int window, const std::string& out_path,
                  const CommonOptions& options, std::ostream& log) {
  PriceTable table;
  Mat returns;
  try {
    table = load_prices(prices_path);
    returns = prices_to_returns(table.prices);
  } catch (const DataError& e) {
    report_data_error(e, prices_path, log);
    return exit_data;
  }
  const int n = static_cast<int>(table.assets.size());
  const int available = static_cast<int>(returns.rows());
  if (window < 0) window = available;
  if (window > available) {
    log << "data error: window " << window << " exceeds the " << available
        << " return rows in " << prices_path << '\n';
    return exit_data;
  }
  if (window < min_var2_rows(n)) {
    log << "data error: window " << window << " is too short; a VAR(2) on " << n
        << " assets needs at least " << min_var2_rows(n) << " return rows\n";
    return exit_data;
  }

  Var2Model model;
  try {
    model = estimate_var2(returns.bottomRows(window));
  } catch (const RankDeficientError& e) {
    log << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const DataError& e) {
    log << "data error: " << e.what() << '\n';
    return exit_data;
  }

  std::ostringstream out;
  out << "block,i";
  for (const auto& a : table.assets) out << ',' << a;
  out << '\n';
  auto row = [&](const char* block, int i, const auto& values) {
    out << block << ',' << i;
    for (Eigen::Index j = 0; j < values.size(); ++j) out << ',' << format_double(values(j));
    out << '\n';
  };
  row("intercept", 0, model.intercept);
  for (int i = 0; i < n; ++i) row("lag1", i, model.lag1.row(i));
  for (int i = 0; i < n; ++i) row("lag2", i, model.lag2.row(i));
  for (int i = 0; i < n; ++i) row("sigma", i, model.innovation_cov.row(i));

  const fs::path path(out_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text(path, out.str());
  if (options.verbose) {
    log << "calibrate: " << window << " rows, " << model.n_obs << " regression rows, spectral radius "
        << format_double(companion_spectral_radius(model.lag1, model.lag2)) << '\n';
  }
  return exit_ok;
}

}  // namespace mpcfolio::cli
