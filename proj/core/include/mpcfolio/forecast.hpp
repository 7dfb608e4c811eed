#pragma once

/**
 * @file forecast.hpp
 * @brief VAR(2) return model: least-squares fit and horizon moment forecasts.
 *
 * Model: eta(t+1) = nu + A1 eta(t) + A2 eta(t-1) + w(t+1),  Cov(w) = Sigma.
 *
 * Forecast moments are conditional on the information at the decision time
 * with the fitted parameters treated as exact. Second moments come from the
 * moving-average form of the forecast error:
 *   Cov(eta(k+i), eta(k+j)) = sum_{s=1}^{min(i,j)} Phi_{i-s} Sigma Phi_{j-s}'.
 */

#include <optional>
#include <vector>

#include "mpcfolio/model.hpp"

namespace mpcfolio {

struct Var2Model {
  Vec intercept;       ///< nu
  Mat lag1;            ///< A1
  Mat lag2;            ///< A2
  Mat innovation_cov;  ///< Sigma, symmetric PSD
  int n_obs = 0;       ///< regression rows used in the fit

  int dim() const { return static_cast<int>(intercept.size()); }
};

/**
 * Conditional first and second moments of the returns over steps k+1..k+m.
 * Step offsets are one-based to match the horizon index.
 */
class MomentForecast {
 public:
  MomentForecast() = default;
  MomentForecast(std::vector<Vec> means, std::vector<Mat> second_moments);

  int horizon() const { return static_cast<int>(means_.size()); }
  int dim() const { return means_.empty() ? 0 : static_cast<int>(means_.front().size()); }

  /// E{eta(k+i)}, i in [1, m].
  const Vec& mean(int i) const;
  /// E{eta(k+i) eta(k+j)'}, i, j in [1, m].
  const Mat& second_moment(int i, int j) const;

  const std::vector<Vec>& means() const { return means_; }

 private:
  std::vector<Vec> means_;
  std::vector<Mat> second_;  // row-major over (i, j)
};

/// Forecast with no uncertainty: second moments are outer products of the means.
MomentForecast deterministic_forecast(const std::vector<Vec>& means);

/// Minimum number of return rows accepted by estimate_var2 for n assets.
int min_var2_rows(int n);

/// Multivariate OLS of eta(t+1) on (1, eta(t), eta(t-1)); rows of `returns` are time.
/// Innovation covariance uses the denominator (T - 2) - (2n + 1).
Var2Model estimate_var2(const Mat& returns);

/// (I - A1 - A2) times the column means of `recent_returns`.
Vec trend_adjusted_intercept(const Var2Model& model, const Mat& recent_returns);

struct MeanForecastOptions {
  /// When set, each predicted mean is clamped to [-cap, cap].
  std::optional<double> clamp;
};

/// h-step predictors E{eta(k+h)} for h = 1..m seeded with eta(k) and eta(k-1).
std::vector<Vec> predict_means(const Var2Model& model, const Vec& intercept, const Vec& eta_k,
                               const Vec& eta_km1, int horizon,
                               const MeanForecastOptions& options = {});

/// Phi_0 = I, Phi_1 = A1, Phi_s = A1 Phi_{s-1} + A2 Phi_{s-2}; returns Phi_0..Phi_{m-1}.
std::vector<Mat> ma_coefficients(const Var2Model& model, int horizon);

MomentForecast predict_second_moments(const Var2Model& model, const std::vector<Vec>& means);

/// Spectral radius of the VAR(2) companion matrix [[A1, A2]; [I, 0]].
double companion_spectral_radius(const Mat& lag1, const Mat& lag2);

}  // namespace mpcfolio
