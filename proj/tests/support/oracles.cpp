#include "oracles.hpp"

#include <cmath>

namespace mpcfolio::testing {

namespace {

Mat gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

MomentForecast JointReturnLaw::forecast() const {
  const int m = static_cast<int>(means.size());
  const int n = static_cast<int>(means.front().size());
  std::vector<Mat> second;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      second.push_back(covariance.block(i * n, j * n, n, n) + means[i] * means[j].transpose());
    }
  }
  return MomentForecast(means, std::move(second));
}

void JointReturnLaw::factorize() {
  Eigen::SelfAdjointEigenSolver<Mat> es(covariance);
  factor = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Mat JointReturnLaw::draw(std::mt19937_64& rng) const {
  const int m = static_cast<int>(means.size());
  const int n = static_cast<int>(means.front().size());
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec z(m * n);
  for (int i = 0; i < m * n; ++i) z(i) = normal(rng);
  const Vec flat = factor * z;
  Mat path(m, n);
  for (int i = 0; i < m; ++i) path.row(i) = (means[i] + flat.segment(i * n, n)).transpose();
  return path;
}

JointReturnLaw random_return_law(int n, int m, std::mt19937_64& rng, double vol) {
  JointReturnLaw law;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < m; ++i) {
    Vec mu(n);
    for (int a = 0; a < n; ++a) mu(a) = 0.001 + 0.005 * normal(rng);
    law.means.push_back(mu);
  }
  const Mat b = gaussian_matrix(m * n, m * n, rng);
  law.covariance = vol * vol * (b * b.transpose()) / static_cast<double>(m * n);
  law.covariance = (0.5 * (law.covariance + law.covariance.transpose())).eval();
  law.factorize();
  return law;
}

Mat random_spd(int d, std::mt19937_64& rng, double lo, double hi) {
  const Mat g = gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  const Mat q = qr.householderQ();
  Vec eig(d);
  for (int i = 0; i < d; ++i) eig(i) = uniform(rng, lo, hi);
  Mat out = q * eig.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

QpInstance random_qp_instance(int n, int m, std::mt19937_64& rng, double cost_scale) {
  QpInstance inst;
  inst.market.n = n;
  inst.market.lend_rate = uniform(rng, 0.0, 0.001);
  inst.market.borrow_rate = inst.market.lend_rate + uniform(rng, 1e-4, 1e-3);
  inst.market.benchmark_growth = uniform(rng, 0.0, 0.003);

  inst.state = PortfolioState::initial(n, uniform(rng, 0.5, 2.0));
  inst.state.benchmark = uniform(rng, 0.5, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i <= n; ++i) inst.state.prev_control(i) = 0.5 * normal(rng);
  inst.state.prev_control(n) = std::abs(inst.state.prev_control(n));

  std::vector<double> rho;
  for (int i = 0; i < m; ++i) rho.push_back(uniform(rng, 0.01, 0.5));
  std::vector<Mat> cost;
  for (int i = 0; i <= m; ++i) cost.push_back(random_spd(n + 1, rng, 0.1 * cost_scale, cost_scale));
  inst.ctx = QpBuildContext::make(inst.market, m, inst.state.benchmark, rho, cost);
  inst.spec = ConstraintSpec::uniform(n, -0.6, 3.0, 3.0);
  return inst;
}

double transaction_cost_sum(const QpBuildContext& ctx, const Vec& prev_control,
                            const Vec& stacked_u) {
  const int d = static_cast<int>(prev_control.size());
  double total = 0.0;
  Vec prev = prev_control;
  for (int i = 0; i < ctx.horizon; ++i) {
    const Vec u = stacked_u.segment(i * d, d);
    const Vec du = u - prev;
    total += du.dot(ctx.cost[i] * du);
    prev = u;
  }
  return total;
}

double simulated_objective(const QpInstance& inst, const Mat& path, const Vec& stacked_u) {
  const int d = inst.market.n + 1;
  double v = inst.state.wealth;
  double total = 0.0;
  for (int i = 0; i < inst.ctx.horizon; ++i) {
    const Vec u = stacked_u.segment(i * d, d);
    v = wealth_step_gross(v, u, path.row(i).transpose(), inst.market);
    const double r1 = 2.0 * inst.ctx.benchmark_path[i] + inst.ctx.rho[i];
    total += v * v - r1 * v;
  }
  return total + transaction_cost_sum(inst.ctx, inst.state.prev_control, stacked_u);
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    const double fp = f(xp);
    xp(i) = x(i) - h;
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  const Eigen::Index d = x.size();
  Mat hess(d, d);
  Vec xp = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      auto eval = [&](double si, double sj) {
        xp = x;
        xp(i) += si * h;
        xp(j) += sj * h;
        return f(xp);
      };
      const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

SampleStat mean_and_se(const std::vector<double>& xs) {
  SampleStat s;
  const double count = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= count;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std_error = std::sqrt(ss / (count - 1.0) / count);
  return s;
}

MomentSamples sample_var2_moments(const Var2Model& model, const Vec& intercept, const Vec& eta_k,
                                  const Vec& eta_km1, int m, int paths, std::uint64_t seed) {
  const int n = model.dim();
  Eigen::LLT<Mat> llt(model.innovation_cov);
  const Mat factor = llt.matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Mat> sum(static_cast<std::size_t>(m * m), Mat::Zero(n, n));
  std::vector<Mat> sumsq(static_cast<std::size_t>(m * m), Mat::Zero(n, n));
  std::vector<Vec> path(static_cast<std::size_t>(m));
  Vec z(n);
  for (int p = 0; p < paths; ++p) {
    Vec prev2 = eta_km1;
    Vec prev1 = eta_k;
    for (int h = 0; h < m; ++h) {
      for (int a = 0; a < n; ++a) z(a) = normal(rng);
      path[h] = intercept + model.lag1 * prev1 + model.lag2 * prev2 + factor * z;
      prev2 = prev1;
      prev1 = path[h];
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const Mat prod = path[i] * path[j].transpose();
        sum[i * m + j] += prod;
        sumsq[i * m + j] += prod.cwiseProduct(prod);
      }
    }
  }
  MomentSamples out;
  const double count = static_cast<double>(paths);
  for (int idx = 0; idx < m * m; ++idx) {
    const Mat mean = sum[idx] / count;
    const Mat var = (sumsq[idx] / count - mean.cwiseProduct(mean)) * (count / (count - 1.0));
    out.mean.push_back(mean);
    out.std_error.push_back((var.cwiseMax(0.0) / count).cwiseSqrt());
  }
  return out;
}

Var2Model random_stable_var2(int n, double radius, std::mt19937_64& rng, double vol) {
  Var2Model m;
  m.lag1 = 0.4 * gaussian_matrix(n, n, rng);
  m.lag2 = 0.3 * gaussian_matrix(n, n, rng);
  const double current = companion_spectral_radius(m.lag1, m.lag2);
  // Companion eigenvalues scale by s under (A1, A2) -> (s A1, s^2 A2).
  const double s = radius / current;
  m.lag1 *= s;
  m.lag2 *= s * s;
  std::normal_distribution<double> normal(0.0, 1.0);
  m.intercept = Vec(n);
  for (int i = 0; i < n; ++i) m.intercept(i) = 0.0005 + 0.0005 * normal(rng);
  const Mat b = gaussian_matrix(n, n, rng);
  m.innovation_cov = vol * vol * (b * b.transpose() / n + 0.5 * Mat::Identity(n, n));
  m.n_obs = 0;
  return m;
}

ReferenceSolution projected_gradient_reference(const QpProblem& qp, long max_iter, double tol) {
  Eigen::LLT<Mat> llt(qp.P);
  ReferenceSolution ref;
  const Vec x_free = -llt.solve(qp.q);
  const Eigen::Index k = qp.C.rows();
  if (k == 0) {
    ref.x = x_free;
    ref.objective = 0.5 * ref.x.dot(qp.P * ref.x) + qp.q.dot(ref.x);
    return ref;
  }
  // Dual over one multiplier per row: minimise 1/2 l' M l - c' l + sum_i s_i(l_i) with
  // s_i(l) = upper_i max(l, 0) - lower_i max(-l, 0), primal x = x_free - P^{-1} C' l.
  const Mat pinv_ct = llt.solve(qp.C.transpose());
  const Mat mm = qp.C * pinv_ct;
  const Vec c = qp.C * x_free;
  const double lipschitz = Eigen::SelfAdjointEigenSolver<Mat>(mm).eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(lipschitz, 1e-300);

  auto prox = [&](const Vec& v) {
    Vec out(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double hi = step * qp.upper(i);
      const double lo = step * qp.lower(i);
      if (v(i) > hi) {
        out(i) = v(i) - hi;
      } else if (v(i) < lo) {
        out(i) = v(i) - lo;
      } else {
        out(i) = 0.0;
      }
    }
    return out;
  };

  // FISTA with gradient-based restarts.
  Vec lam = Vec::Zero(k);
  Vec y = lam;
  double theta = 1.0;
  long it = 0;
  for (; it < max_iter; ++it) {
    const Vec next = prox(y - step * (mm * y - c));
    const double moved = (next - lam).cwiseAbs().maxCoeff();
    if ((y - next).dot(next - lam) > 0.0) {
      theta = 1.0;
      y = next;
    } else {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = next + ((theta - 1.0) / theta_next) * (next - lam);
      theta = theta_next;
    }
    lam = next;
    if (it % 16 == 0) {
      const Vec fixed = prox(lam - step * (mm * lam - c));
      if ((fixed - lam).cwiseAbs().maxCoeff() <= tol * (1.0 + lam.cwiseAbs().maxCoeff()) &&
          moved <= tol * (1.0 + lam.cwiseAbs().maxCoeff())) {
        break;
      }
    }
  }
  ref.iterations = it;
  ref.x = x_free - pinv_ct * lam;
  ref.objective = 0.5 * ref.x.dot(qp.P * ref.x) + qp.q.dot(ref.x);
  return ref;
}

QpProblem random_feasible_qp(int dim, int rows, std::mt19937_64& rng) {
  QpProblem qp;
  qp.P = random_spd(dim, rng, 0.05, 5.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  qp.q = Vec(dim);
  for (int i = 0; i < dim; ++i) qp.q(i) = 3.0 * normal(rng);
  qp.C = gaussian_matrix(rows, dim, rng);
  Vec feasible(dim);
  for (int i = 0; i < dim; ++i) feasible(i) = 0.3 * normal(rng);
  const Vec cx = qp.C * feasible;
  qp.lower = Vec(rows);
  qp.upper = Vec(rows);
  const double inf = std::numeric_limits<double>::infinity();
  std::uniform_int_distribution<int> kind(0, 9);
  for (int i = 0; i < rows; ++i) {
    const int kd = kind(rng);
    const double lo = cx(i) - uniform(rng, 0.0, 0.5);
    const double hi = cx(i) + uniform(rng, 0.0, 0.5);
    if (kd == 0) {
      qp.lower(i) = cx(i);
      qp.upper(i) = cx(i);
    } else if (kd == 1) {
      qp.lower(i) = -inf;
      qp.upper(i) = hi;
    } else if (kd == 2) {
      qp.lower(i) = lo;
      qp.upper(i) = inf;
    } else {
      qp.lower(i) = lo;
      qp.upper(i) = hi;
    }
  }
  return qp;
}

double family_threshold(int count) {
  const double alpha = std::erfc(3.0 / std::sqrt(2.0)) / static_cast<double>(std::max(count, 1));
  double lo = 0.0;
  double hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::sqrt(2.0)) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mpcfolio::testing
