#pragma once

// Test-only reference computations. Nothing here calls the block recursions or
// the active-set solver; each routine evaluates its quantity from first principles.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "mpcfolio/mpcfolio.hpp"

namespace mpcfolio::testing {

/// Joint Gaussian law of (eta(k+1), ..., eta(k+m)) used to realise a stochastic forecast.
struct JointReturnLaw {
  std::vector<Vec> means;  ///< m vectors of length n
  Mat covariance;          ///< (m n) x (m n)
  Mat factor;              ///< covariance square root, set by factorize()

  void factorize();

  MomentForecast forecast() const;
  /// One draw of the stacked path; row i of the result is eta(k+i+1).
  Mat draw(std::mt19937_64& rng) const;
};

JointReturnLaw random_return_law(int n, int m, std::mt19937_64& rng, double vol = 0.02);

/// Random strictly positive-definite symmetric matrix with eigenvalues in [lo, hi].
Mat random_spd(int d, std::mt19937_64& rng, double lo, double hi);

struct QpInstance {
  PortfolioState state;
  QpBuildContext ctx;
  ConstraintSpec spec;
  MarketParams market;
};

/// Random state/context pair. `cost_scale` sets the size of the R(k, i) eigenvalues.
QpInstance random_qp_instance(int n, int m, std::mt19937_64& rng, double cost_scale = 1e-2);

/// Tracking criterion sum_i [V(k+i)^2 - R1(i) V(k+i)] + sum_i du_i' R(k,i) du_i along one
/// return path, simulating wealth with wealth_step_gross().
double simulated_objective(const QpInstance& inst, const Mat& path, const Vec& stacked_u);

/// Transaction-cost sum alone.
double transaction_cost_sum(const QpBuildContext& ctx, const Vec& prev_control, const Vec& stacked_u);

/// Central-difference gradient and Hessian.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h);
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double h);

/// Sample mean and standard error of a scalar statistic.
struct SampleStat {
  double mean = 0.0;
  double std_error = 0.0;
};
SampleStat mean_and_se(const std::vector<double>& xs);

/// Monte-Carlo estimates of E{eta(k+i) eta(k+j)'} for a VAR(2) started from (eta_k, eta_km1).
struct MomentSamples {
  std::vector<Mat> mean;       ///< row-major over (i, j), i, j in [0, m)
  std::vector<Mat> std_error;
};
MomentSamples sample_var2_moments(const Var2Model& model, const Vec& intercept, const Vec& eta_k,
                                  const Vec& eta_km1, int m, int paths, std::uint64_t seed);

/// Random VAR(2) with companion spectral radius exactly `radius`.
Var2Model random_stable_var2(int n, double radius, std::mt19937_64& rng, double vol = 0.02);

/// Accelerated projected (proximal) gradient on the dual of a QP, primal recovered
/// from the multipliers. Slow but simple; used as a reference objective.
struct ReferenceSolution {
  Vec x;
  double objective = 0.0;
  long iterations = 0;
};
ReferenceSolution projected_gradient_reference(const QpProblem& qp, long max_iter = 1000000,
                                               double tol = 1e-13);

/// Random strictly convex QP with a nonempty feasible set.
QpProblem random_feasible_qp(int dim, int rows, std::mt19937_64& rng);

/// Gaussian two-sided quantile for a family of `count` comparisons at the error rate of
/// a single 3-sigma test.
double family_threshold(int count);

}  // namespace mpcfolio::testing
