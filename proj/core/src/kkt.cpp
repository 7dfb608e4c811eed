#include <algorithm>
#include <cmath>

#include "mpcfolio/errors.hpp"
#include "mpcfolio/qp_solver.hpp"

namespace mpcfolio {

KktResiduals kkt_residuals(const QpProblem& problem, const Vec& x, const Vec& multipliers) {
  if (x.size() != problem.P.rows() || multipliers.size() != problem.C.rows()) {
    throw DimensionError("kkt_residuals: size mismatch");
  }
  KktResiduals r;
  const Vec grad = problem.P * x + problem.q + problem.C.transpose() * multipliers;
  r.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;

  const Vec cx = problem.C * x;
  for (Eigen::Index i = 0; i < cx.size(); ++i) {
    const double lo = problem.lower(i);
    const double hi = problem.upper(i);
    r.primal = std::max({r.primal, lo - cx(i), cx(i) - hi});

    const double lam = multipliers(i);
    double gap = 0.0;
    if (lam > 0.0) {
      gap = std::isfinite(hi) ? std::abs(hi - cx(i)) : HUGE_VAL;
    } else if (lam < 0.0) {
      gap = std::isfinite(lo) ? std::abs(cx(i) - lo) : HUGE_VAL;
    }
    r.complementarity = std::max(r.complementarity, std::abs(lam) * gap);
  }
  return r;
}

bool kkt_satisfied(const QpProblem& problem, const KktResiduals& r, double tol) {
  const double qscale = problem.q.size() ? problem.q.cwiseAbs().maxCoeff() : 0.0;
  return r.stationarity <= tol * (1.0 + qscale) && r.primal <= tol && r.complementarity <= tol;
}

}  // namespace mpcfolio
