#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mpcfolio/errors.hpp"
#include "mpcfolio/model.hpp"

namespace mpcfolio {
namespace {

MarketParams paper_market(int n) {
  MarketParams p;
  p.n = n;
  p.lend_rate = 0.0001;
  p.borrow_rate = 0.0002;
  p.benchmark_growth = 0.0015;
  return p;
}

TEST(MarketParams, RejectsLendingRateAtOrAboveBorrowing) {
  MarketParams p = paper_market(2);
  p.borrow_rate = p.lend_rate;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.n = 0;
  p.borrow_rate = 0.0002;
  EXPECT_THROW(p.validate(), InvalidArgument);
  EXPECT_NO_THROW(paper_market(3).validate());
}

TEST(WealthStep, NoExposureEarnsLendingRate) {
  const auto p = paper_market(3);
  const Vec u = Vec::Zero(4);
  const Vec eta = (Vec(3) << 0.05, -0.03, 0.2).finished();
  EXPECT_DOUBLE_EQ(wealth_step(1.0, u, eta, p), 1.0001);
}

TEST(WealthStep, SingleRiskyPosition) {
  const auto p = paper_market(2);
  const Vec u = (Vec(3) << 1.0, 0.0, 0.0).finished();
  const Vec eta = (Vec(2) << 0.01, 0.5).finished();
  EXPECT_NEAR(wealth_step(1.0, u, eta, p), 1.01, 1e-15);
  EXPECT_NEAR(wealth_step_gross(1.0, u, eta, p), 1.01, 1e-15);
}

TEST(WealthStep, BorrowingOnlyPaysRateGap) {
  const auto p = paper_market(2);
  const Vec u = (Vec(3) << 0.0, 0.0, 1.0).finished();
  const Vec eta = Vec::Zero(2);
  EXPECT_NEAR(wealth_step(1.0, u, eta, p), 1.0, 1e-15);
  // Risk-free holding is V + borrowed = 2.
  EXPECT_DOUBLE_EQ(risk_free_holding(1.0, u), 2.0);
  EXPECT_NEAR(wealth_step_gross(1.0, u, eta, p), 1.0, 1e-15);
}

TEST(WealthStep, DimensionAndFiniteChecks) {
  const auto p = paper_market(2);
  EXPECT_THROW(wealth_step(1.0, Vec::Zero(2), Vec::Zero(2), p), DimensionError);
  EXPECT_THROW(wealth_step(1.0, Vec::Zero(3), Vec::Zero(3), p), DimensionError);
  Vec bad = Vec::Zero(2);
  bad(0) = std::nan("");
  EXPECT_THROW(wealth_step(1.0, Vec::Zero(3), bad, p), NonFiniteError);
  EXPECT_THROW(wealth_step(INFINITY, Vec::Zero(3), Vec::Zero(2), p), NonFiniteError);
  bad(0) = -1.0;
  EXPECT_THROW(wealth_step(1.0, Vec::Zero(3), bad, p), InvalidArgument);
}

TEST(WealthStep, ExcessAndGrossFormsAgreeOnRandomDraws) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wealth(0.1, 5.0);
  std::normal_distribution<double> pos(0.0, 2.0);
  std::uniform_real_distribution<double> ret(-0.3, 0.3);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 6;
    const auto p = paper_market(n);
    const double v = wealth(rng);
    Vec u(n + 1);
    for (int i = 0; i <= n; ++i) u(i) = pos(rng);
    u(n) = std::abs(u(n));
    Vec eta(n);
    for (int i = 0; i < n; ++i) eta(i) = ret(rng);
    const double a = wealth_step(v, u, eta, p);
    const double b = wealth_step_gross(v, u, eta, p);
    const double scale = std::abs(v) + u.cwiseAbs().sum() * 1.3;
    ASSERT_LE(std::abs(a - b), 1e-12 * scale) << "trial " << trial;
  }
}

TEST(SelfFinancing, RiskFreeHoldingClosesTheBudget) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> pos(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 5;
    PortfolioState s = PortfolioState::initial(n, 1.0 + std::abs(pos(rng)));
    Vec u(n + 1);
    for (int i = 0; i <= n; ++i) u(i) = pos(rng);
    const TradeDecision d = make_trade_decision(s, u, Mat::Identity(n + 1, n + 1));
    const double rebuilt = u.head(n).sum() + d.risk_free - u(n);
    EXPECT_NEAR(rebuilt, s.wealth, 1e-9 * s.wealth);
    EXPECT_NEAR(d.cost, u.squaredNorm(), 1e-12);
  }
}

TEST(BenchmarkStep, Growth) {
  EXPECT_DOUBLE_EQ(benchmark_step(1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(benchmark_step(1.0, 0.0015), 1.0015);
  EXPECT_DOUBLE_EQ(benchmark_step(benchmark_step(2.0, 0.0015), 0.0015), 2.0 * 1.0015 * 1.0015);
  double v = 1.0;
  for (int k = 0; k < 500; ++k) {
    const double next = benchmark_step(v, 0.0015);
    ASSERT_GT(next, v);
    v = next;
  }
}

TEST(ConstraintMatrix, SmallCases) {
  Mat expected1(3, 2);
  expected1 << 1, 0, -1, 1, 0, 1;
  EXPECT_EQ(constraint_matrix(1), expected1);
  Mat expected2(4, 3);
  expected2 << 1, 0, 0, 0, 1, 0, -1, -1, 1, 0, 0, 1;
  EXPECT_EQ(constraint_matrix(2), expected2);
  for (int n = 1; n <= 8; ++n) {
    const Mat s = constraint_matrix(n);
    EXPECT_EQ(s.rows(), n + 2);
    EXPECT_EQ(s.cols(), n + 1);
  }
}

TEST(ConstraintBounds, PaperFractionsAtUnitWealth) {
  const auto spec = ConstraintSpec::uniform(5, -0.6, 3.0, 3.0);
  const ControlBounds b = constraint_bounds(1.0, spec);
  for (int i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(b.lower(i), -0.6);
    EXPECT_DOUBLE_EQ(b.upper(i), 3.0);
  }
  EXPECT_DOUBLE_EQ(b.lower(5), -1.0);
  EXPECT_DOUBLE_EQ(b.upper(5), 2.0);
  EXPECT_DOUBLE_EQ(b.lower(6), 0.0);
  EXPECT_DOUBLE_EQ(b.upper(6), 3.0);
}

TEST(ConstraintBounds, ScalesWithWealth) {
  const auto spec = ConstraintSpec::uniform(1, -0.6, 3.0, 3.0);
  const ControlBounds b = constraint_bounds(2.0, spec);
  EXPECT_TRUE(b.lower.isApprox((Vec(3) << -1.2, -2.0, 0.0).finished()));
  EXPECT_TRUE(b.upper.isApprox((Vec(3) << 6.0, 4.0, 6.0).finished()));

  const ControlBounds z = constraint_bounds(0.0, spec);
  EXPECT_TRUE(z.lower.isZero());
  EXPECT_TRUE(z.upper.isZero());
  EXPECT_THROW(constraint_bounds(-0.1, spec), WealthExhausted);
}

TEST(ConstraintSpec, Validation) {
  auto spec = ConstraintSpec::uniform(2, -0.6, 3.0, 3.0);
  EXPECT_NO_THROW(spec.validate(2));
  EXPECT_THROW(spec.validate(3), DimensionError);
  spec.lower_fraction(1) = 4.0;
  EXPECT_THROW(spec.validate(2), InvalidArgument);
  spec = ConstraintSpec::uniform(2, -0.6, 3.0, 0.5);
  EXPECT_THROW(spec.validate(2), InvalidArgument);
  spec = ConstraintSpec::uniform(2, -0.6, 3.0, 3.0);
  spec.upper_fraction(2) = -1.0;
  EXPECT_THROW(spec.validate(2), InvalidArgument);
}

// S u lands inside [u_min, u_max] exactly when the per-variable inequalities hold.
TEST(ConstraintBounds, MatrixFormMatchesScalarInequalities) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-2.0, 4.0);
  const int n = 3;
  const auto spec = ConstraintSpec::uniform(n, -0.6, 3.0, 3.0);
  const Mat s = constraint_matrix(n);
  int inside = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const double v = 1.5;
    Vec u(n + 1);
    for (int i = 0; i <= n; ++i) u(i) = pos(rng);
    const ControlBounds b = constraint_bounds(v, spec);
    const Vec su = s * u;
    const bool matrix_ok =
        ((su - b.lower).array() >= 0.0).all() && ((b.upper - su).array() >= 0.0).all();
    bool scalar_ok = true;
    for (int i = 0; i < n; ++i) scalar_ok &= (u(i) >= -0.6 * v && u(i) <= 3.0 * v);
    const double u0 = risk_free_holding(v, u);
    scalar_ok &= (u0 >= 0.0 && u0 <= 3.0 * v);
    scalar_ok &= (u(n) >= 0.0 && u(n) <= 3.0 * v);
    ASSERT_EQ(matrix_ok, scalar_ok);
    inside += matrix_ok;
  }
  EXPECT_GT(inside, 0);
}

}  // namespace
}  // namespace mpcfolio
