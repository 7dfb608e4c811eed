#include "mpcfolio/qp_builder.hpp"

#include <cmath>
#include <string>

#include "mpcfolio/errors.hpp"

namespace mpcfolio {

QpBuildContext QpBuildContext::make(const MarketParams& market, int horizon,
                                    double benchmark_now, double rho, const Mat& cost) {
  return make(market, horizon, benchmark_now,
              std::vector<double>(static_cast<std::size_t>(std::max(horizon, 0)), rho),
              std::vector<Mat>(static_cast<std::size_t>(std::max(horizon, 0) + 1), cost));
}

QpBuildContext QpBuildContext::make(const MarketParams& market, int horizon,
                                    double benchmark_now, std::vector<double> rho,
                                    std::vector<Mat> cost) {
  QpBuildContext ctx;
  ctx.horizon = horizon;
  ctx.growth = market.growth_factor();
  ctx.lend_rate = market.lend_rate;
  ctx.borrow_rate = market.borrow_rate;
  ctx.rho = std::move(rho);
  ctx.cost = std::move(cost);
  ctx.benchmark_path.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
  double v0 = benchmark_now;
  for (int i = 1; i <= horizon; ++i) {
    v0 = benchmark_step(v0, market.benchmark_growth);
    ctx.benchmark_path.push_back(v0);
  }
  ctx.validate();
  return ctx;
}

double QpBuildContext::tracking_weight(int t) const {
  if (t < 1 || t > horizon) throw InvalidArgument("tracking_weight: step out of horizon");
  return 2.0 * benchmark_path[t - 1] + rho[t - 1];
}

void QpBuildContext::validate() const {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  const auto m = static_cast<std::size_t>(horizon);
  if (rho.size() != m) throw DimensionError("rho schedule must have one entry per horizon step");
  if (benchmark_path.size() != m) throw DimensionError("benchmark path length must equal horizon");
  if (cost.size() < m) throw DimensionError("cost schedule must cover steps 0..m-1");
  const Eigen::Index d = cost.front().rows();
  for (std::size_t i = 0; i < cost.size(); ++i) {
    const Mat& r = cost[i];
    if (r.rows() != d || r.cols() != d) throw DimensionError("cost matrices must share one square shape");
    if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + r.cwiseAbs().maxCoeff())) {
      throw InvalidArgument("cost matrix R(k," + std::to_string(i) + ") is not symmetric");
    }
    Eigen::LLT<Mat> llt(r);
    if (llt.info() != Eigen::Success) {
      throw InvalidArgument("cost matrix R(k," + std::to_string(i) + ") is not positive definite");
    }
  }
  for (int t = 1; t <= horizon; ++t) {
    if (!(tracking_weight(t) > 0.0)) throw InvalidArgument("tracking weight R1 must be positive");
  }
}

std::vector<double> q1_recursion(int horizon, double growth) {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  std::vector<double> q(static_cast<std::size_t>(horizon));
  q[0] = 1.0;
  for (int t = 1; t < horizon; ++t) q[t] = growth * growth * q[t - 1] + 1.0;
  return q;
}

std::vector<double> q2_recursion(int horizon, double growth,
                                 const std::vector<double>& tracking_weight) {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (tracking_weight.size() != static_cast<std::size_t>(horizon)) {
    throw DimensionError("q2_recursion: need R1(t) for t = 1..m");
  }
  std::vector<double> q(static_cast<std::size_t>(horizon));
  q[0] = tracking_weight[horizon - 1];
  for (int t = 1; t < horizon; ++t) q[t] = growth * q[t - 1] + tracking_weight[horizon - t - 1];
  return q;
}

Vec expected_b(const Vec& mean, double lend_rate, double borrow_rate) {
  const Eigen::Index n = mean.size();
  Vec b(n + 1);
  b.head(n) = mean.array() - lend_rate;
  b(n) = lend_rate - borrow_rate;
  return b;
}

Mat expected_outer_b(const MomentForecast& forecast, int t, int f, double lend_rate,
                     double borrow_rate) {
  const int m = forecast.horizon();
  if (t < 1 || f < 1 || t > m || f > m) {
    throw InvalidArgument("expected_outer_b: step index outside [1, " + std::to_string(m) + "]");
  }
  const Eigen::Index n = forecast.dim();
  const Vec& mt = forecast.mean(t);
  const Vec& mf = forecast.mean(f);
  const Vec ones = Vec::Ones(n);
  const double gap = lend_rate - borrow_rate;

  Mat out(n + 1, n + 1);
  out.topLeftCorner(n, n) = forecast.second_moment(t, f) -
                            lend_rate * (mt * ones.transpose() + ones * mf.transpose()) +
                            lend_rate * lend_rate * Mat::Ones(n, n);
  out.col(n).head(n) = (mt - lend_rate * ones) * gap;
  out.row(n).head(n) = gap * (mf - lend_rate * ones).transpose();
  out(n, n) = gap * gap;
  return out;
}

namespace {

void check_forecast(const QpBuildContext& ctx, const MomentForecast& forecast) {
  if (forecast.horizon() != ctx.horizon) {
    throw DimensionError("forecast horizon " + std::to_string(forecast.horizon()) +
                         " does not match build horizon " + std::to_string(ctx.horizon));
  }
  if (forecast.dim() + 1 != ctx.block_size()) {
    throw DimensionError("forecast dimension does not match cost matrix size");
  }
}

std::vector<double> tracking_weights(const QpBuildContext& ctx) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(ctx.horizon));
  for (int t = 1; t <= ctx.horizon; ++t) w.push_back(ctx.tracking_weight(t));
  return w;
}

}  // namespace

Mat build_H(const QpBuildContext& ctx, const MomentForecast& forecast) {
  check_forecast(ctx, forecast);
  const int m = ctx.horizon;
  const int d = ctx.block_size();
  const auto q1 = q1_recursion(m, ctx.growth);
  Mat h(m * d, m * d);
  for (int t = 1; t <= m; ++t) {
    h.block((t - 1) * d, (t - 1) * d, d, d) =
        q1[m - t] * expected_outer_b(forecast, t, t, ctx.lend_rate, ctx.borrow_rate);
    for (int f = t + 1; f <= m; ++f) {
      const Mat blk = std::pow(ctx.growth, f - t) * q1[m - f] *
                      expected_outer_b(forecast, t, f, ctx.lend_rate, ctx.borrow_rate);
      h.block((t - 1) * d, (f - 1) * d, d, d) = blk;
      h.block((f - 1) * d, (t - 1) * d, d, d) = blk.transpose();
    }
  }
  return h;
}

Vec build_G(const QpBuildContext& ctx, const MomentForecast& forecast) {
  check_forecast(ctx, forecast);
  const int m = ctx.horizon;
  const int d = ctx.block_size();
  const auto q1 = q1_recursion(m, ctx.growth);
  Vec g(m * d);
  for (int t = 1; t <= m; ++t) {
    g.segment((t - 1) * d, d) = std::pow(ctx.growth, t) * q1[m - t] *
                                expected_b(forecast.mean(t), ctx.lend_rate, ctx.borrow_rate);
  }
  return g;
}

Vec build_F(const QpBuildContext& ctx, const MomentForecast& forecast, const Vec& prev_control,
            PrevTradeTerm form) {
  check_forecast(ctx, forecast);
  const int m = ctx.horizon;
  const int d = ctx.block_size();
  if (prev_control.size() != d) throw DimensionError("prev_control must have length n + 1");
  const auto q2 = q2_recursion(m, ctx.growth, tracking_weights(ctx));
  const Vec carry = 2.0 * ctx.cost[0] * prev_control;
  Vec f(m * d);
  for (int t = 1; t <= m; ++t) {
    f.segment((t - 1) * d, d) =
        q2[m - t] * expected_b(forecast.mean(t), ctx.lend_rate, ctx.borrow_rate);
    if (form == PrevTradeTerm::every_block_literal) f.segment((t - 1) * d, d) -= carry;
  }
  if (form == PrevTradeTerm::first_block) f.head(d) += carry;
  return f;
}

Mat build_Rbar(const QpBuildContext& ctx, RbarForm form) {
  const int m = ctx.horizon;
  const int d = ctx.block_size();
  if (form == RbarForm::printed_literal && ctx.cost.size() < static_cast<std::size_t>(m + 1)) {
    throw DimensionError("printed-form Rbar needs R(k, 0..m)");
  }
  Mat r = Mat::Zero(m * d, m * d);
  for (int i = 0; i < m; ++i) {
    Mat diag = ctx.cost[i];
    if (i + 1 < m || form == RbarForm::printed_literal) diag += ctx.cost[i + 1];
    r.block(i * d, i * d, d, d) = diag;
    if (i + 1 < m) {
      r.block(i * d, (i + 1) * d, d, d) = -ctx.cost[i + 1];
      r.block((i + 1) * d, i * d, d, d) = -ctx.cost[i + 1];
    }
  }
  return r;
}

namespace {

void attach_constraints(QpProblem& qp, const PortfolioState& state, const ConstraintSpec& spec,
                        int n, int dim) {
  const ControlBounds b = constraint_bounds(state.wealth, spec);
  for (int i = 0; i < n + 2; ++i) {
    if (b.lower(i) > b.upper(i)) {
      throw InvalidArgument("constraint row " + std::to_string(i + 1) + " has empty bounds");
    }
  }
  qp.C = Mat::Zero(n + 2, dim);
  qp.C.leftCols(n + 1) = constraint_matrix(n);
  qp.lower = b.lower;
  qp.upper = b.upper;
}

}  // namespace

QpProblem assemble_qp(const PortfolioState& state, const QpBuildContext& ctx,
                      const MomentForecast& forecast, const ConstraintSpec& spec,
                      const QpBuildOptions& options) {
  check_forecast(ctx, forecast);
  const int n = forecast.dim();
  const int dim = ctx.horizon * (n + 1);

  const Mat h = build_H(ctx, forecast);
  const Mat rbar = build_Rbar(ctx, options.rbar);
  const Vec g = build_G(ctx, forecast);
  const Vec f = build_F(ctx, forecast, state.prev_control, options.prev_trade);

  QpProblem qp;
  qp.P = 2.0 * (h + rbar);
  qp.P = (0.5 * (qp.P + qp.P.transpose())).eval();
  qp.q = 2.0 * state.wealth * g - f;
  attach_constraints(qp, state, spec, n, dim);
  return qp;
}

QpProblem build_qp_oracle(const PortfolioState& state, const QpBuildContext& ctx,
                          const MomentForecast& forecast, const ConstraintSpec& spec) {
  check_forecast(ctx, forecast);
  const int m = ctx.horizon;
  const int n = forecast.dim();
  const int d = n + 1;
  const int dim = m * d;
  const double a = ctx.growth;

  // b(t) = M eta(t) + c
  Mat lift = Mat::Zero(d, n);
  lift.topRows(n).setIdentity();
  Vec shift = Vec::Constant(d, -ctx.lend_rate);
  shift(n) = ctx.lend_rate - ctx.borrow_rate;

  Vec psi(m);
  for (int i = 0; i < m; ++i) psi(i) = std::pow(a, i + 1);

  // E{Phi}: row i (V(k+i)), column block j: A^{i-j} E{b(k+j)} for j <= i.
  Mat e_phi = Mat::Zero(m, dim);
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= i; ++j) {
      const Vec eb = lift * forecast.mean(j) + shift;
      e_phi.block(i - 1, (j - 1) * d, 1, d) = std::pow(a, i - j) * eb.transpose();
    }
  }

  // E{Phi' Phi} = sum over rows i of E{Phi_i' Phi_i}.
  Mat e_phtph = Mat::Zero(dim, dim);
  for (int i = 1; i <= m; ++i) {
    for (int t = 1; t <= i; ++t) {
      for (int f = 1; f <= i; ++f) {
        const Mat ebb = lift * forecast.second_moment(t, f) * lift.transpose() +
                        lift * forecast.mean(t) * shift.transpose() +
                        shift * forecast.mean(f).transpose() * lift.transpose() +
                        shift * shift.transpose();
        e_phtph.block((t - 1) * d, (f - 1) * d, d, d) +=
            std::pow(a, i - t) * std::pow(a, i - f) * ebb;
      }
    }
  }

  Vec delta1(m);
  for (int i = 1; i <= m; ++i) delta1(i - 1) = 2.0 * ctx.benchmark_path[i - 1] + ctx.rho[i - 1];

  // Differencing operator D: (D U)_i = u_i - u_{i-1}, the u(k-1) part handled by L.
  Mat diff = Mat::Identity(dim, dim);
  for (int i = 1; i < m; ++i) diff.block(i * d, (i - 1) * d, d, d) = -Mat::Identity(d, d);
  Mat cost_diag = Mat::Zero(dim, dim);
  for (int i = 0; i < m; ++i) cost_diag.block(i * d, i * d, d, d) = ctx.cost[i];
  const Mat rbar = diff.transpose() * cost_diag * diff;

  Vec l = Vec::Zero(dim);
  l.head(d) = 2.0 * ctx.cost[0] * state.prev_control;

  const Vec g = e_phi.transpose() * psi;
  const Vec f = e_phi.transpose() * delta1 + l;

  QpProblem qp;
  qp.P = 2.0 * (e_phtph + rbar);
  qp.P = (0.5 * (qp.P + qp.P.transpose())).eval();
  qp.q = 2.0 * state.wealth * g - f;
  attach_constraints(qp, state, spec, n, dim);
  return qp;
}

Vec extract_control(const Vec& stacked, int block_size) {
  if (block_size < 1 || stacked.size() < block_size || stacked.size() % block_size != 0) {
    throw DimensionError("extract_control: stacked length " + std::to_string(stacked.size()) +
                         " is not a multiple of block size " + std::to_string(block_size));
  }
  return stacked.head(block_size);
}

double qp_objective(const QpProblem& problem, const Vec& u) {
  return 0.5 * u.dot(problem.P * u) + problem.q.dot(u);
}

double objective_constant(const PortfolioState& state, const QpBuildContext& ctx) {
  double c = 0.0;
  for (int i = 1; i <= ctx.horizon; ++i) {
    const double ai = std::pow(ctx.growth, i);
    c += state.wealth * state.wealth * ai * ai - ctx.tracking_weight(i) * ai * state.wealth;
  }
  c += state.prev_control.dot(ctx.cost[0] * state.prev_control);
  return c;
}

}  // namespace mpcfolio
