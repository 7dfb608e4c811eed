#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace mpcfolio::cli;

  CLI::App app{"Receding-horizon portfolio tracking: backtest, simulate and calibrate"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonOptions common;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string prices_path;
  std::string out_path;
  int window = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_flag("--verbose,-v", common.verbose, "Print progress details");
  };

  CLI::App* backtest = app.add_subcommand("backtest", "Run the controller over a price file");
  backtest->add_option("--config", config_path, "JSON run configuration")->required();
  backtest->add_option("--prices", prices_path, "Price CSV (date,<asset>...)")->required();
  backtest->add_option("--out", out_path, "Output directory")->required();
  add_common(backtest);

  CLI::App* simulate = app.add_subcommand("simulate", "Write synthetic VAR(2) prices");
  simulate->add_option("--config", config_path, "JSON run configuration")->required();
  simulate->add_option("--out", out_path, "Output price CSV")->required();
  add_common(simulate);

  CLI::App* calibrate = app.add_subcommand("calibrate", "Fit a VAR(2) to a price file");
  calibrate->add_option("--prices", prices_path, "Price CSV (date,<asset>...)")->required();
  calibrate->add_option("--window", window, "Trailing return rows to fit (default: all)");
  calibrate->add_option("--out", out_path, "Output CSV")->required();
  add_common(calibrate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  for (CLI::App* sub : {backtest, simulate, calibrate}) {
    if (sub->count("--seed") > 0) common.seed = seed;
  }

  try {
    if (*backtest) return cmd_backtest(config_path, prices_path, out_path, common, std::cerr);
    if (*simulate) return cmd_simulate(config_path, out_path, common, std::cerr);
    if (*calibrate) return cmd_calibrate(prices_path, window, out_path, common, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_io;
  }
  return exit_config;
}
