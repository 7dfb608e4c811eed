#include <fstream>
#include <string>

#include "mpcfolio/backtest.hpp"
#include "mpcfolio/errors.hpp"
#include "mpcfolio/price_data.hpp"

namespace mpcfolio {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

std::string control_header(int n) {
  std::string h;
  for (int i = 1; i <= n; ++i) h += ",u_" + std::to_string(i);
  return h + ",u_borrow,u_riskfree";
}

void write_controls(std::ostream& out, const StepRecord& r) {
  for (Eigen::Index i = 0; i < r.control.size(); ++i) out << ',' << format_double(r.control(i));
  out << ',' << format_double(r.risk_free);
}

}  // namespace

void emit_report(const BacktestReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  const int n = static_cast<int>(report.assets.size());

  {
    const auto path = out_dir / "steps.csv";
    auto out = open_for_write(path);
    out << "k,date,V,V0" << control_header(n) << ",cost,status\n";
    for (const auto& r : report.records) {
      out << r.k << ',' << r.date << ',' << format_double(r.wealth) << ','
          << format_double(r.benchmark);
      write_controls(out, r);
      out << ',' << format_double(r.cost) << ',' << to_string(r.status) << '\n';
    }
    close_checked(out, path);
  }
  {
    const auto path = out_dir / "wealth.csv";
    auto out = open_for_write(path);
    out << "k,date,V,V0\n";
    for (const auto& r : report.records) {
      out << r.k << ',' << r.date << ',' << format_double(r.wealth) << ','
          << format_double(r.benchmark) << '\n';
    }
    close_checked(out, path);
  }
  {
    const auto path = out_dir / "allocations.csv";
    auto out = open_for_write(path);
    out << "k,date" << control_header(n) << '\n';
    for (const auto& r : report.records) {
      out << r.k << ',' << r.date;
      write_controls(out, r);
      out << '\n';
    }
    close_checked(out, path);
  }
  {
    const auto path = out_dir / "returns.csv";
    auto out = open_for_write(path);
    out << "k,date";
    for (int i = 1; i <= n; ++i) out << ",eta_" << i;
    out << '\n';
    for (const auto& r : report.records) {
      out << r.k << ',' << r.date;
      for (Eigen::Index i = 0; i < r.realized_returns.size(); ++i) {
        out << ',' << format_double(r.realized_returns(i));
      }
      out << '\n';
    }
    close_checked(out, path);
  }
  {
    const auto path = out_dir / "summary.txt";
    auto out = open_for_write(path);
    const auto& s = report.summary;
    out << "terminal_wealth=" << format_double(s.terminal_wealth) << '\n'
        << "terminal_benchmark=" << format_double(s.terminal_benchmark) << '\n'
        << "tracking_rmse=" << format_double(s.tracking_rmse) << '\n'
        << "total_cost=" << format_double(s.total_cost) << '\n'
        << "beat_fraction=" << format_double(s.beat_fraction) << '\n'
        << "steps=" << s.steps << '\n'
        << "ruin=" << (s.ruin ? 1 : 0) << '\n';
    close_checked(out, path);
  }
}

}  // namespace mpcfolio
