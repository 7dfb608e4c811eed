#include "mpcfolio/forecast.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "mpcfolio/errors.hpp"

namespace mpcfolio {

MomentForecast::MomentForecast(std::vector<Vec> means, std::vector<Mat> second_moments)
    : means_(std::move(means)), second_(std::move(second_moments)) {
  const std::size_t m = means_.size();
  if (second_.size() != m * m) {
    throw DimensionError("MomentForecast: expected " + std::to_string(m * m) +
                         " second-moment blocks, got " + std::to_string(second_.size()));
  }
  const Eigen::Index n = means_.empty() ? 0 : means_.front().size();
  for (const auto& v : means_) {
    if (v.size() != n) throw DimensionError("MomentForecast: mean vectors differ in length");
  }
  for (const auto& t : second_) {
    if (t.rows() != n || t.cols() != n) {
      throw DimensionError("MomentForecast: second-moment block has wrong shape");
    }
  }
}

const Vec& MomentForecast::mean(int i) const {
  if (i < 1 || i > horizon()) throw InvalidArgument("forecast step out of horizon");
  return means_[i - 1];
}

const Mat& MomentForecast::second_moment(int i, int j) const {
  const int m = horizon();
  if (i < 1 || i > m || j < 1 || j > m) throw InvalidArgument("forecast step out of horizon");
  return second_[static_cast<std::size_t>((i - 1) * m + (j - 1))];
}

MomentForecast deterministic_forecast(const std::vector<Vec>& means) {
  const std::size_t m = means.size();
  std::vector<Mat> second;
  second.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) second.push_back(means[i] * means[j].transpose());
  }
  return MomentForecast(means, std::move(second));
}

int min_var2_rows(int n) { return 2 * n + 2 + 10; }

Var2Model estimate_var2(const Mat& returns) {
  const Eigen::Index rows = returns.rows();
  const int n = static_cast<int>(returns.cols());
  if (n < 1) throw DimensionError("estimate_var2: no asset columns");
  if (rows < min_var2_rows(n)) {
    throw DataError("estimate_var2: need at least " + std::to_string(min_var2_rows(n)) +
                    " return rows for " + std::to_string(n) + " assets, got " +
                    std::to_string(rows));
  }
  if (!returns.allFinite()) throw NonFiniteError("estimate_var2: returns contain non-finite values");

  // Zero-variance columns make every lag regressor collinear with the intercept.
  std::vector<int> flat;
  for (int j = 0; j < n; ++j) {
    const auto col = returns.col(j);
    if (col.maxCoeff() == col.minCoeff()) flat.push_back(j);
  }
  if (!flat.empty()) {
    std::string names;
    for (int j : flat) names += (names.empty() ? "" : ", ") + std::to_string(j + 1);
    throw RankDeficientError("estimate_var2: constant return series for asset(s) " + names, flat);
  }

  const Eigen::Index t_eff = rows - 2;
  const Eigen::Index k = 2 * n + 1;
  Mat x(t_eff, k);
  Mat y(t_eff, n);
  for (Eigen::Index t = 0; t < t_eff; ++t) {
    y.row(t) = returns.row(t + 2);
    x(t, 0) = 1.0;
    x.row(t).segment(1, n) = returns.row(t + 1);
    x.row(t).segment(1 + n, n) = returns.row(t);
  }

  Eigen::ColPivHouseholderQR<Mat> qr(x);
  if (qr.rank() < k) {
    std::set<int> assets;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index p = qr.rank(); p < k; ++p) {
      const int col = perm(p);
      if (col > 0) assets.insert((col - 1) % n);
    }
    std::vector<int> bad(assets.begin(), assets.end());
    std::string names;
    for (int j : bad) names += (names.empty() ? "" : ", ") + std::to_string(j + 1);
    throw RankDeficientError("estimate_var2: collinear lagged regressors for asset(s) " + names,
                             bad);
  }

  const Mat beta = qr.solve(y);  // k x n
  const Mat resid = y - x * beta;
  const double dof = static_cast<double>(t_eff - k);

  Var2Model model;
  model.intercept = beta.row(0).transpose();
  model.lag1 = beta.middleRows(1, n).transpose();
  model.lag2 = beta.middleRows(1 + n, n).transpose();
  Mat sigma = resid.transpose() * resid / dof;
  model.innovation_cov = 0.5 * (sigma + sigma.transpose());
  model.n_obs = static_cast<int>(t_eff);
  return model;
}

Vec trend_adjusted_intercept(const Var2Model& model, const Mat& recent_returns) {
  const int n = model.dim();
  if (recent_returns.rows() < 1) throw InvalidArgument("trend window must contain at least one row");
  if (recent_returns.cols() != n) throw DimensionError("trend window column count mismatch");
  const Vec mean = recent_returns.colwise().mean().transpose();
  const Mat factor = Mat::Identity(n, n) - model.lag1 - model.lag2;
  return factor * mean;
}

std::vector<Vec> predict_means(const Var2Model& model, const Vec& intercept, const Vec& eta_k,
                               const Vec& eta_km1, int horizon,
                               const MeanForecastOptions& options) {
  const int n = model.dim();
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (intercept.size() != n || eta_k.size() != n || eta_km1.size() != n) {
    throw DimensionError("predict_means: vector length mismatch");
  }
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(horizon));
  Vec prev2 = eta_km1;
  Vec prev1 = eta_k;
  for (int h = 1; h <= horizon; ++h) {
    Vec next = intercept + model.lag1 * prev1 + model.lag2 * prev2;
    if (options.clamp) next = next.cwiseMax(-*options.clamp).cwiseMin(*options.clamp);
    out.push_back(next);
    prev2 = std::move(prev1);
    prev1 = std::move(next);
  }
  return out;
}

std::vector<Mat> ma_coefficients(const Var2Model& model, int horizon) {
  const int n = model.dim();
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  std::vector<Mat> phi;
  phi.reserve(static_cast<std::size_t>(horizon));
  phi.push_back(Mat::Identity(n, n));
  if (horizon > 1) phi.push_back(model.lag1);
  for (int s = 2; s < horizon; ++s) {
    phi.push_back(model.lag1 * phi[s - 1] + model.lag2 * phi[s - 2]);
  }
  return phi;
}

MomentForecast predict_second_moments(const Var2Model& model, const std::vector<Vec>& means) {
  const int m = static_cast<int>(means.size());
  if (m < 1) throw InvalidArgument("predict_second_moments: empty mean sequence");
  const int n = model.dim();
  const auto phi = ma_coefficients(model, m);

  // psi[s] = Phi_s Sigma, reused across all (i, j) pairs.
  std::vector<Mat> psi;
  psi.reserve(phi.size());
  for (const auto& p : phi) psi.push_back(p * model.innovation_cov);

  std::vector<Mat> second(static_cast<std::size_t>(m * m));
  for (int i = 1; i <= m; ++i) {
    for (int j = i; j <= m; ++j) {
      Mat cov = Mat::Zero(n, n);
      for (int s = 1; s <= i; ++s) cov.noalias() += psi[i - s] * phi[j - s].transpose();
      if (i == j) cov = (0.5 * (cov + cov.transpose())).eval();
      Mat theta = cov + means[i - 1] * means[j - 1].transpose();
      second[static_cast<std::size_t>((j - 1) * m + (i - 1))] = theta.transpose();
      second[static_cast<std::size_t>((i - 1) * m + (j - 1))] = std::move(theta);
    }
  }
  return MomentForecast(means, std::move(second));
}

double companion_spectral_radius(const Mat& lag1, const Mat& lag2) {
  const Eigen::Index n = lag1.rows();
  Mat companion = Mat::Zero(2 * n, 2 * n);
  companion.topLeftCorner(n, n) = lag1;
  companion.topRightCorner(n, n) = lag2;
  companion.bottomLeftCorner(n, n).setIdentity();
  Eigen::EigenSolver<Mat> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace mpcfolio
