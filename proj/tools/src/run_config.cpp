#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "mpcfolio/errors.hpp"
#include "mpcfolio/price_data.hpp"

namespace mpcfolio::cli {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration:";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

// Collects type errors while walking the document.
class Reader {
 public:
  std::vector<std::string> problems;

  void fail(const std::string& path, const std::string& what) { problems.push_back(path + ": " + what); }

  // Object section; unknown keys are reported.
  const json* section(const json& parent, const std::string& key, const std::string& path,
                      const std::set<std::string>& allowed) {
    if (!parent.contains(key)) return nullptr;
    const json& s = parent.at(key);
    if (!s.is_object()) {
      fail(path, "expected an object");
      return nullptr;
    }
    check_keys(s, path, allowed);
    return &s;
  }

  void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& item : obj.items()) {
      if (!allowed.count(item.key())) fail(path + "." + item.key(), "unknown key");
    }
  }

  void number(const json* obj, const std::string& key, const std::string& path, double& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_number()) {
      fail(path + "." + key, "expected a number");
      return;
    }
    out = v.get<double>();
    if (!std::isfinite(out)) fail(path + "." + key, "must be finite");
  }

  void integer(const json* obj, const std::string& key, const std::string& path, int& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return;
    }
    const auto wide = v.get<long long>();
    if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max()) {
      fail(path + "." + key, "out of range");
      return;
    }
    out = static_cast<int>(wide);
  }

  void boolean(const json* obj, const std::string& key, const std::string& path, bool& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_boolean()) {
      fail(path + "." + key, "expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  void string(const json* obj, const std::string& key, const std::string& path, std::string& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_string()) {
      fail(path + "." + key, "expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  std::optional<std::vector<double>> vector(const json& v, const std::string& path) {
    if (!v.is_array()) {
      fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        fail(path + "[" + std::to_string(i) + "]", "expected a number");
        return std::nullopt;
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::optional<std::vector<std::vector<double>>> matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) {
      fail(path, "expected a non-empty array of rows");
      return std::nullopt;
    }
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto row = vector(v[i], path + "[" + std::to_string(i) + "]");
      if (!row) return std::nullopt;
      out.push_back(std::move(*row));
    }
    for (const auto& row : out) {
      if (row.size() != out.front().size()) {
        fail(path, "rows have different lengths");
        return std::nullopt;
      }
    }
    return out;
  }

  std::optional<ScalarOrList> scalar_or_list(const json& v, const std::string& path) {
    if (v.is_number()) return ScalarOrList(v.get<double>());
    if (auto list = vector(v, path)) return ScalarOrList(std::move(*list));
    return std::nullopt;
  }

  std::optional<CostSpec> cost(const json& v, const std::string& path) {
    CostSpec c;
    if (v.is_number()) {
      c.kind = CostSpec::Kind::scalar;
      c.scalar = v.get<double>();
      return c;
    }
    if (!v.is_array() || v.empty()) {
      fail(path, "expected a number, a diagonal, a matrix or a list of matrices");
      return std::nullopt;
    }
    if (v[0].is_number()) {
      auto d = vector(v, path);
      if (!d) return std::nullopt;
      c.kind = CostSpec::Kind::diagonal;
      c.diagonal = std::move(*d);
      return c;
    }
    if (v[0].is_array() && !v[0].empty() && v[0][0].is_array()) {
      c.kind = CostSpec::Kind::schedule;
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto m = matrix(v[i], path + "[" + std::to_string(i) + "]");
        if (!m) return std::nullopt;
        c.schedule.push_back(std::move(*m));
      }
      return c;
    }
    auto m = matrix(v, path);
    if (!m) return std::nullopt;
    c.kind = CostSpec::Kind::matrix;
    c.matrix = std::move(*m);
    return c;
  }
};

Mat to_mat(const std::vector<std::vector<double>>& rows) {
  Mat m(static_cast<Eigen::Index>(rows.size()),
        rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json list_json(const ScalarOrList& v) {
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  return std::get<std::vector<double>>(v);
}

json cost_json(const CostSpec& c) {
  switch (c.kind) {
    case CostSpec::Kind::scalar:
      return c.scalar;
    case CostSpec::Kind::diagonal:
      return c.diagonal;
    case CostSpec::Kind::matrix:
      return c.matrix;
    case CostSpec::Kind::schedule:
      return c.schedule;
  }
  return nullptr;
}

std::vector<double> expand(const ScalarOrList& v, std::size_t count, const std::string& path,
                           std::vector<std::string>& problems) {
  if (std::holds_alternative<double>(v)) return std::vector<double>(count, std::get<double>(v));
  const auto& list = std::get<std::vector<double>>(v);
  if (list.size() != count) {
    problems.push_back(path + ": expected " + std::to_string(count) + " entries, found " +
                       std::to_string(list.size()));
    return std::vector<double>(count, 0.0);
  }
  return list;
}

std::vector<Mat> expand_cost(const CostSpec& c, int n, int m, const std::string& path,
                             std::vector<std::string>& problems) {
  const int d = n + 1;
  const auto count = static_cast<std::size_t>(m + 1);
  auto shape_error = [&](const std::string& what) {
    problems.push_back(path + ": " + what);
    return std::vector<Mat>(count, Mat::Identity(d, d));
  };
  switch (c.kind) {
    case CostSpec::Kind::scalar:
      return std::vector<Mat>(count, c.scalar * Mat::Identity(d, d));
    case CostSpec::Kind::diagonal: {
      if (c.diagonal.size() != static_cast<std::size_t>(d)) {
        return shape_error("diagonal needs " + std::to_string(d) + " entries (assets plus borrowing)");
      }
      Vec diag(d);
      for (int i = 0; i < d; ++i) diag(i) = c.diagonal[static_cast<std::size_t>(i)];
      return std::vector<Mat>(count, Mat(diag.asDiagonal()));
    }
    case CostSpec::Kind::matrix: {
      const Mat r = to_mat(c.matrix);
      if (r.rows() != d || r.cols() != d) {
        return shape_error("matrix must be " + std::to_string(d) + " x " + std::to_string(d));
      }
      return std::vector<Mat>(count, r);
    }
    case CostSpec::Kind::schedule: {
      if (c.schedule.size() != count) {
        return shape_error("schedule needs " + std::to_string(count) + " matrices R(k,0..m)");
      }
      std::vector<Mat> out;
      for (const auto& rows : c.schedule) {
        Mat r = to_mat(rows);
        if (r.rows() != d || r.cols() != d) {
          return shape_error("matrix must be " + std::to_string(d) + " x " + std::to_string(d));
        }
        out.push_back(std::move(r));
      }
      return out;
    }
  }
  return {};
}

void read_synthetic(Reader& rd, const json& doc, SyntheticConfig& syn) {
  const json* s = rd.section(doc, "synthetic", "synthetic",
                             {"length", "burn_in", "start_date", "allow_unstable", "intercept",
                              "lag1", "lag2", "innovation_cov"});
  rd.integer(s, "length", "synthetic", syn.length);
  rd.integer(s, "burn_in", "synthetic", syn.burn_in);
  rd.string(s, "start_date", "synthetic", syn.start_date);
  rd.boolean(s, "allow_unstable", "synthetic", syn.allow_unstable);
  if (syn.length < 0) rd.fail("synthetic.length", "must be >= 0");
  if (syn.burn_in < 0) rd.fail("synthetic.burn_in", "must be >= 0");
  if (!is_iso_date(syn.start_date)) rd.fail("synthetic.start_date", "expected YYYY-MM-DD");

  const bool any_model = s && (s->contains("intercept") || s->contains("lag1") ||
                               s->contains("lag2") || s->contains("innovation_cov"));
  if (!any_model) return;
  bool ok = true;
  for (const char* key : {"intercept", "lag1", "lag2", "innovation_cov"}) {
    if (!s->contains(key)) {
      rd.fail(std::string("synthetic.") + key, "required when any model entry is given");
      ok = false;
    }
  }
  if (!ok) return;
  auto nu = rd.vector(s->at("intercept"), "synthetic.intercept");
  auto a1 = rd.matrix(s->at("lag1"), "synthetic.lag1");
  auto a2 = rd.matrix(s->at("lag2"), "synthetic.lag2");
  auto sig = rd.matrix(s->at("innovation_cov"), "synthetic.innovation_cov");
  if (!nu || !a1 || !a2 || !sig) return;
  const auto n = static_cast<Eigen::Index>(nu->size());
  Var2Model m;
  m.intercept = Eigen::Map<const Vec>(nu->data(), n);
  m.lag1 = to_mat(*a1);
  m.lag2 = to_mat(*a2);
  m.innovation_cov = to_mat(*sig);
  for (const auto& [name, mat] : {std::pair<const char*, const Mat*>{"lag1", &m.lag1},
                                  {"lag2", &m.lag2},
                                  {"innovation_cov", &m.innovation_cov}}) {
    if (mat->rows() != n || mat->cols() != n) {
      rd.fail(std::string("synthetic.") + name,
              "must be " + std::to_string(n) + " x " + std::to_string(n));
      ok = false;
    }
  }
  if (n < 1) {
    rd.fail("synthetic.intercept", "needs at least one asset");
    ok = false;
  }
  if (ok) syn.model = std::move(m);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_lines(problems)), problems_(std::move(problems)) {}

Var2Model default_synthetic_model() {
  const int n = 5;
  Var2Model m;
  const Vec mean = (Vec(n) << 0.0025, 0.0015, 0.001, 0.0005, 0.0).finished();
  m.lag1 = Mat::Zero(n, n);
  m.lag1.diagonal() << 0.08, 0.05, 0.03, -0.02, 0.04;
  m.lag2 = Mat::Zero(n, n);
  m.lag2.diagonal() << -0.04, 0.02, -0.03, 0.01, 0.0;
  m.intercept = (Mat::Identity(n, n) - m.lag1 - m.lag2) * mean;
  const Vec vol = (Vec(n) << 0.012, 0.014, 0.011, 0.013, 0.015).finished();
  Mat corr = Mat::Constant(n, n, 0.3);
  corr.diagonal().setOnes();
  m.innovation_cov = vol.asDiagonal() * corr * vol.asDiagonal();
  return m;
}

RunConfig parse_config(const json& doc, bool require_horizon) {
  Reader rd;
  RunConfig c;
  c.synthetic.model = default_synthetic_model();
  if (!doc.is_object()) throw ConfigError({"<root>: expected a JSON object"});
  rd.check_keys(doc, "<root>",
                {"market", "constraints", "mpc", "forecast", "backtest", "solver", "seed",
                 "synthetic", "manifest"});

  const json* market = rd.section(doc, "market", "market", {"lend_rate", "borrow_rate", "benchmark_growth"});
  rd.number(market, "lend_rate", "market", c.market.lend_rate);
  rd.number(market, "borrow_rate", "market", c.market.borrow_rate);
  rd.number(market, "benchmark_growth", "market", c.market.benchmark_growth);
  if (!(c.market.lend_rate < c.market.borrow_rate)) {
    rd.fail("market.borrow_rate", "must exceed market.lend_rate");
  }

  const json* cons = rd.section(doc, "constraints", "constraints",
                                {"asset_lower", "asset_upper", "borrow_cap", "riskfree_cap"});
  if (cons) {
    for (auto [key, target] : {std::pair<const char*, ScalarOrList*>{"asset_lower", &c.asset_lower},
                               {"asset_upper", &c.asset_upper}}) {
      if (!cons->contains(key)) continue;
      if (auto v = rd.scalar_or_list(cons->at(key), std::string("constraints.") + key)) *target = *v;
    }
  }
  rd.number(cons, "borrow_cap", "constraints", c.borrow_cap);
  rd.number(cons, "riskfree_cap", "constraints", c.riskfree_cap);
  if (c.borrow_cap < 0.0) rd.fail("constraints.borrow_cap", "must be >= 0");
  if (c.riskfree_cap < 1.0) rd.fail("constraints.riskfree_cap", "must be >= 1");

  const json* mpc = rd.section(doc, "mpc", "mpc",
                               {"horizon", "rho", "transaction_cost", "rbar_paper_literal", "overrides"});
  if (mpc && mpc->contains("horizon")) {
    int h = 0;
    rd.integer(mpc, "horizon", "mpc", h);
    if (h < 1) {
      rd.fail("mpc.horizon", "must be >= 1");
    } else {
      c.horizon = h;
    }
  } else if (require_horizon) {
    rd.fail("mpc.horizon", "required key is missing");
  }
  if (mpc && mpc->contains("rho")) {
    if (auto v = rd.scalar_or_list(mpc->at("rho"), "mpc.rho")) c.rho = *v;
  }
  if (mpc && mpc->contains("transaction_cost")) {
    if (auto v = rd.cost(mpc->at("transaction_cost"), "mpc.transaction_cost")) c.cost = *v;
  }
  rd.boolean(mpc, "rbar_paper_literal", "mpc", c.rbar_paper_literal);
  if (mpc && mpc->contains("overrides")) {
    const json& list = mpc->at("overrides");
    if (!list.is_array()) {
      rd.fail("mpc.overrides", "expected an array");
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "mpc.overrides[" + std::to_string(i) + "]";
        if (!list[i].is_object()) {
          rd.fail(path, "expected an object");
          continue;
        }
        rd.check_keys(list[i], path, {"from_step", "rho", "transaction_cost"});
        OverrideSpec o;
        if (!list[i].contains("from_step")) rd.fail(path + ".from_step", "required key is missing");
        rd.integer(&list[i], "from_step", path, o.from_step);
        if (list[i].contains("rho")) o.rho = rd.scalar_or_list(list[i].at("rho"), path + ".rho");
        if (list[i].contains("transaction_cost")) {
          o.cost = rd.cost(list[i].at("transaction_cost"), path + ".transaction_cost");
        }
        c.overrides.push_back(std::move(o));
      }
    }
  }

  const json* fc = rd.section(doc, "forecast", "forecast",
                              {"estimation_window", "trend_window", "reestimate", "mean_clamp"});
  rd.integer(fc, "estimation_window", "forecast", c.estimation_window);
  rd.integer(fc, "trend_window", "forecast", c.trend_window);
  rd.boolean(fc, "reestimate", "forecast", c.reestimate);
  if (fc && fc->contains("mean_clamp") && !fc->at("mean_clamp").is_null()) {
    double clamp = 0.5;
    rd.number(fc, "mean_clamp", "forecast", clamp);
    if (!(clamp > 0.0)) rd.fail("forecast.mean_clamp", "must be positive");
    c.mean_clamp = clamp;
  }
  if (c.estimation_window < 1) rd.fail("forecast.estimation_window", "must be positive");
  if (c.trend_window < 1) rd.fail("forecast.trend_window", "must be positive");
  if (c.trend_window > c.estimation_window) {
    rd.fail("forecast.trend_window", "must not exceed forecast.estimation_window");
  }

  const json* bt = rd.section(doc, "backtest", "backtest", {"start", "end", "initial_wealth"});
  rd.integer(bt, "start", "backtest", c.start);
  rd.integer(bt, "end", "backtest", c.end);
  rd.number(bt, "initial_wealth", "backtest", c.initial_wealth);
  if (!(c.initial_wealth > 0.0)) rd.fail("backtest.initial_wealth", "must be positive");
  if (c.start < -1) rd.fail("backtest.start", "must be -1 (automatic) or a row index");
  if (c.end < -1) rd.fail("backtest.end", "must be -1 (all rows) or a row index");

  const json* sv = rd.section(doc, "solver", "solver", {"tol", "max_iter"});
  rd.number(sv, "tol", "solver", c.solver_tol);
  rd.integer(sv, "max_iter", "solver", c.solver_max_iter);
  if (!(c.solver_tol > 0.0)) rd.fail("solver.tol", "must be positive");
  if (c.solver_max_iter < 1) rd.fail("solver.max_iter", "must be >= 1");

  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (s.is_number_unsigned()) {
      c.seed = s.get<std::uint64_t>();
    } else if (s.is_number_integer() && s.get<long long>() >= 0) {
      c.seed = static_cast<std::uint64_t>(s.get<long long>());
    } else {
      rd.fail("seed", "expected a non-negative integer");
    }
  }

  read_synthetic(rd, doc, c.synthetic);

  if (!rd.problems.empty()) throw ConfigError(rd.problems);
  return c;
}

RunConfig load_config(const std::string& path, bool require_horizon) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open config file"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path + ": " + e.what()});
  }
  return parse_config(doc, require_horizon);
}

BacktestConfig resolve_backtest(const RunConfig& c, int n) {
  std::vector<std::string> problems;
  if (!c.horizon) problems.push_back("mpc.horizon: required key is missing");
  const int m = c.horizon.value_or(1);
  BacktestConfig b;
  b.market = c.market;
  b.market.n = n;
  b.constraints.lower_fraction = Vec(n);
  b.constraints.upper_fraction = Vec(n + 1);
  const auto lo = expand(c.asset_lower, static_cast<std::size_t>(n), "constraints.asset_lower", problems);
  const auto hi = expand(c.asset_upper, static_cast<std::size_t>(n), "constraints.asset_upper", problems);
  for (int i = 0; i < n; ++i) {
    b.constraints.lower_fraction(i) = lo[static_cast<std::size_t>(i)];
    b.constraints.upper_fraction(i) = hi[static_cast<std::size_t>(i)];
  }
  b.constraints.upper_fraction(n) = c.borrow_cap;
  b.constraints.riskfree_cap = c.riskfree_cap;
  b.horizon = m;
  b.rho = expand(c.rho, static_cast<std::size_t>(m), "mpc.rho", problems);
  b.cost = expand_cost(c.cost, n, m, "mpc.transaction_cost", problems);
  for (std::size_t i = 0; i < c.overrides.size(); ++i) {
    const std::string path = "mpc.overrides[" + std::to_string(i) + "]";
    const OverrideSpec& o = c.overrides[i];
    ScheduleOverride so;
    so.from_step = o.from_step;
    if (o.rho) so.rho = expand(*o.rho, static_cast<std::size_t>(m), path + ".rho", problems);
    if (o.cost) so.cost = expand_cost(*o.cost, n, m, path + ".transaction_cost", problems);
    b.overrides.push_back(std::move(so));
  }
  b.estimation_window = c.estimation_window;
  b.trend_window = c.trend_window;
  b.start = c.start;
  b.end = c.end;
  b.initial_wealth = c.initial_wealth;
  b.reestimate = c.reestimate;
  b.mean_clamp = c.mean_clamp;
  b.rbar_paper_literal = c.rbar_paper_literal;
  b.seed = c.seed;
  b.solver.tol = c.solver_tol;
  b.solver.max_iter = c.solver_max_iter;
  if (!problems.empty()) throw ConfigError(problems);
  try {
    b.validate();
  } catch (const Error& e) {
    throw ConfigError({e.what()});
  }
  return b;
}

json resolved_json(const RunConfig& c, int n) {
  json doc;
  doc["market"] = {{"lend_rate", c.market.lend_rate},
                   {"borrow_rate", c.market.borrow_rate},
                   {"benchmark_growth", c.market.benchmark_growth}};

  json mpc;
  json overrides = json::array();
  if (n > 0 && c.horizon) {
    const BacktestConfig b = resolve_backtest(c, n);
    doc["constraints"] = {{"asset_lower", vec_json(b.constraints.lower_fraction)},
                          {"asset_upper", vec_json(b.constraints.upper_fraction.head(n))},
                          {"borrow_cap", c.borrow_cap},
                          {"riskfree_cap", c.riskfree_cap}};
    mpc["rho"] = b.rho;
    json sched = json::array();
    for (const auto& r : b.cost) sched.push_back(mat_json(r));
    mpc["transaction_cost"] = std::move(sched);
    for (const auto& o : b.overrides) {
      json item = {{"from_step", o.from_step}};
      if (o.rho) item["rho"] = *o.rho;
      if (o.cost) {
        json s = json::array();
        for (const auto& r : *o.cost) s.push_back(mat_json(r));
        item["transaction_cost"] = std::move(s);
      }
      overrides.push_back(std::move(item));
    }
  } else {
    doc["constraints"] = {{"asset_lower", list_json(c.asset_lower)},
                          {"asset_upper", list_json(c.asset_upper)},
                          {"borrow_cap", c.borrow_cap},
                          {"riskfree_cap", c.riskfree_cap}};
    mpc["rho"] = list_json(c.rho);
    mpc["transaction_cost"] = cost_json(c.cost);
    for (const auto& o : c.overrides) {
      json item = {{"from_step", o.from_step}};
      if (o.rho) item["rho"] = list_json(*o.rho);
      if (o.cost) item["transaction_cost"] = cost_json(*o.cost);
      overrides.push_back(std::move(item));
    }
  }
  if (c.horizon) mpc["horizon"] = *c.horizon;
  mpc["rbar_paper_literal"] = c.rbar_paper_literal;
  mpc["overrides"] = std::move(overrides);
  doc["mpc"] = std::move(mpc);

  doc["forecast"] = {{"estimation_window", c.estimation_window},
                     {"trend_window", c.trend_window},
                     {"reestimate", c.reestimate},
                     {"mean_clamp", c.mean_clamp ? json(*c.mean_clamp) : json(nullptr)}};
  doc["backtest"] = {{"start", c.start}, {"end", c.end}, {"initial_wealth", c.initial_wealth}};
  doc["solver"] = {{"tol", c.solver_tol}, {"max_iter", c.solver_max_iter}};
  doc["seed"] = c.seed;
  const SyntheticConfig& s = c.synthetic;
  doc["synthetic"] = {{"length", s.length},
                      {"burn_in", s.burn_in},
                      {"start_date", s.start_date},
                      {"allow_unstable", s.allow_unstable},
                      {"intercept", vec_json(s.model.intercept)},
                      {"lag1", mat_json(s.model.lag1)},
                      {"lag2", mat_json(s.model.lag2)},
                      {"innovation_cov", mat_json(s.model.innovation_cov)}};
  return doc;
}

}  // namespace mpcfolio::cli
