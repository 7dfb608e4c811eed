#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace mpcfolio::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  exit_ok = 0,
  exit_io = 1,
  exit_config = 2,
  exit_data = 3,
  exit_solver = 4,
  exit_ruin = 5,
};

struct CommonOptions {
  std::optional<std::uint64_t> seed;  ///< overrides the config seed
  bool verbose = false;
};

/// Runs the controller over a price file and writes the report plus manifest.json into out_dir.
int cmd_backtest(const std::string& config_path, const std::string& prices_path,
                 const std::string& out_dir, const CommonOptions& options, std::ostream& log);

/// Writes a synthetic price file drawn from the config's VAR(2) model.
int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const CommonOptions& options, std::ostream& log);

/// Fits a VAR(2) on the last `window` returns of a price file and writes the estimates.
/// Layout: header `block,i,<asset...>`; blocks intercept (one row), lag1, lag2 and sigma (n rows each).
int cmd_calibrate(const std::string& prices_path, int window, const std::string& out_path,
                  const CommonOptions& options, std::ostream& log);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace mpcfolio::cli
