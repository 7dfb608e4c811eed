#include <benchmark/benchmark.h>

#include "mpcfolio/mpcfolio.hpp"

namespace {

using namespace mpcfolio;

Var2Model bench_model(int n) {
  Var2Model m;
  m.intercept = Vec::Constant(n, 0.0008);
  m.lag1 = 0.1 * Mat::Identity(n, n);
  m.lag2 = -0.05 * Mat::Identity(n, n);
  Mat corr = Mat::Constant(n, n, 0.3);
  corr.diagonal().setOnes();
  m.innovation_cov = 1.5e-4 * corr;
  return m;
}

struct Fixture {
  MarketParams market{5, 0.0001, 0.0002, 0.0015};
  Var2Model model = bench_model(5);
  Mat returns = simulate_synthetic({model, 100, false}, 400, 3);
  PortfolioState state = PortfolioState::initial(5);
  ConstraintSpec spec = ConstraintSpec::uniform(5, -0.6, 3.0);

  MomentForecast forecast(int m) const {
    const Vec eta_k = returns.row(returns.rows() - 1).transpose();
    const Vec eta_km1 = returns.row(returns.rows() - 2).transpose();
    return predict_second_moments(model, predict_means(model, model.intercept, eta_k, eta_km1, m));
  }
  QpBuildContext context(int m) const {
    return QpBuildContext::make(market, m, state.benchmark, 0.1, 1e-4 * Mat::Identity(6, 6));
  }
};

void BM_Forecast(benchmark::State& st) {
  const Fixture fx;
  const int m = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(fx.forecast(m));
}
BENCHMARK(BM_Forecast)->Arg(5)->Arg(10);

void BM_EstimateVar2(benchmark::State& st) {
  const Fixture fx;
  const Mat window = fx.returns.bottomRows(200);
  for (auto _ : st) benchmark::DoNotOptimize(estimate_var2(window));
}
BENCHMARK(BM_EstimateVar2);

void BM_AssembleQp(benchmark::State& st) {
  const Fixture fx;
  const int m = static_cast<int>(st.range(0));
  const MomentForecast f = fx.forecast(m);
  const QpBuildContext ctx = fx.context(m);
  for (auto _ : st) benchmark::DoNotOptimize(assemble_qp(fx.state, ctx, f, fx.spec));
}
BENCHMARK(BM_AssembleQp)->Arg(1)->Arg(5)->Arg(10);

void BM_AssembleQpOracle(benchmark::State& st) {
  const Fixture fx;
  const MomentForecast f = fx.forecast(10);
  const QpBuildContext ctx = fx.context(10);
  for (auto _ : st) benchmark::DoNotOptimize(build_qp_oracle(fx.state, ctx, f, fx.spec));
}
BENCHMARK(BM_AssembleQpOracle);

void BM_Solve(benchmark::State& st) {
  const Fixture fx;
  const int m = static_cast<int>(st.range(0));
  const QpProblem qp = assemble_qp(fx.state, fx.context(m), fx.forecast(m), fx.spec);
  for (auto _ : st) benchmark::DoNotOptimize(solve(qp));
}
BENCHMARK(BM_Solve)->Arg(1)->Arg(5)->Arg(10);

void BM_BacktestStep(benchmark::State& st) {
  const Fixture fx;
  BacktestConfig c = BacktestConfig::defaults(5);
  c.estimation_window = 200;
  c.end = 201;
  for (auto _ : st) benchmark::DoNotOptimize(run_backtest(c, fx.returns));
}
BENCHMARK(BM_BacktestStep)->Unit(benchmark::kMicrosecond);

void BM_Backtest200Steps(benchmark::State& st) {
  const Fixture fx;
  BacktestConfig c = BacktestConfig::defaults(5);
  c.estimation_window = 200;
  for (auto _ : st) benchmark::DoNotOptimize(run_backtest(c, fx.returns));
}
BENCHMARK(BM_Backtest200Steps)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
