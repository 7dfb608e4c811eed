#include "mpcfolio/qp_solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mpcfolio/errors.hpp"

namespace mpcfolio {

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal:
      return "optimal";
    case QpStatus::max_iterations:
      return "max_iterations";
    case QpStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-sided constraint sign * C.row(row) x >= rhs.
struct Halfspace {
  Eigen::Index row;
  double sign;
  double rhs;
};

class DualActiveSet {
 public:
  DualActiveSet(const QpProblem& qp, const QpSolverOptions& opt) : qp_(qp), opt_(opt) {
    const Eigen::Index dim = qp.P.rows();
    llt_.compute(qp.P);
    if (llt_.info() != Eigen::Success) {
      throw InvalidArgument("QP Hessian is not positive definite");
    }
    linv_ = llt_.matrixL().solve(Mat::Identity(dim, dim));
    for (Eigen::Index i = 0; i < qp.C.rows(); ++i) {
      if (std::isfinite(qp.lower(i))) halfspaces_.push_back({i, 1.0, qp.lower(i)});
      if (std::isfinite(qp.upper(i))) halfspaces_.push_back({i, -1.0, -qp.upper(i)});
    }
    in_active_.assign(halfspaces_.size(), false);
  }

  QpSolution run() {
    QpSolution sol;
    x_ = -llt_.solve(qp_.q);
    refactor();
    if (opt_.warm_start) sol.warm_started = seed_from(*opt_.warm_start);

    int iter = 0;
    QpStatus status = QpStatus::optimal;
    if (opt_.record_trace) sol.objective_trace.push_back(objective());

    for (;;) {
      const int p = most_violated();
      if (p < 0) break;
      if (iter >= opt_.max_iter) {
        status = QpStatus::max_iterations;
        break;
      }
      double up = 0.0;  // multiplier of the constraint being added
      bool added = false;
      while (!added) {
        ++iter;
        const Vec np = normal(p);
        const Vec d = j_.transpose() * np;
        const Eigen::Index nact = static_cast<Eigen::Index>(active_.size());
        const Eigen::Index dim = x_.size();
        const Vec d2 = d.tail(dim - nact);
        Vec z = Vec::Zero(dim);
        if (d2.norm() > 1e-12 * std::max(1.0, d.norm())) z = j_.rightCols(dim - nact) * d2;
        Vec r = Vec::Zero(nact);
        if (nact > 0) r = r_.topLeftCorner(nact, nact).triangularView<Eigen::Upper>().solve(d.head(nact));

        double t1 = kInf;
        Eigen::Index drop = -1;
        for (Eigen::Index a = 0; a < nact; ++a) {
          if (r(a) > 1e-14) {
            const double ratio = u_(a) / r(a);
            if (ratio < t1) {
              t1 = ratio;
              drop = a;
            }
          }
        }
        double t2 = kInf;
        const double zn = z.dot(np);
        if (z.squaredNorm() > 0.0 && zn > 0.0) t2 = -slack(p) / zn;

        if (!std::isfinite(t1) && !std::isfinite(t2)) {
          status = QpStatus::infeasible;
          return finish(sol, status, iter);
        }
        if (!std::isfinite(t2)) {
          u_ -= t1 * r;
          up += t1;
          remove(drop);
          continue;
        }
        const double t = std::min(t1, t2);
        x_ += t * z;
        u_ -= t * r;
        up += t;
        if (opt_.record_trace) sol.objective_trace.push_back(objective());
        if (t2 <= t1) {
          add(p, up);
          added = true;
        } else {
          remove(drop);
        }
        if (iter >= opt_.max_iter && !added) break;
      }
      if (!added) {
        status = QpStatus::max_iterations;
        break;
      }
    }
    return finish(sol, status, iter);
  }

 private:
  Vec normal(int j) const {
    const Halfspace& h = halfspaces_[static_cast<std::size_t>(j)];
    return h.sign * qp_.C.row(h.row).transpose();
  }

  double slack(int j) const {
    const Halfspace& h = halfspaces_[static_cast<std::size_t>(j)];
    return h.sign * qp_.C.row(h.row).dot(x_) - h.rhs;
  }

  bool row_active(Eigen::Index row) const {
    for (int a : active_) {
      if (halfspaces_[static_cast<std::size_t>(a)].row == row) return true;
    }
    return false;
  }

  double objective() const { return 0.5 * x_.dot(qp_.P * x_) + qp_.q.dot(x_); }

  int most_violated() const {
    int best = -1;
    double worst = 0.0;
    for (std::size_t j = 0; j < halfspaces_.size(); ++j) {
      if (in_active_[j] || row_active(halfspaces_[j].row)) continue;
      const double s = slack(static_cast<int>(j));
      const double thr = 0.01 * opt_.tol * (1.0 + std::abs(halfspaces_[j].rhs));
      if (s < -thr) {
        const double norm = qp_.C.row(halfspaces_[j].row).norm();
        const double scaled = s / std::max(norm, 1e-300);
        if (best < 0 || scaled < worst) {
          best = static_cast<int>(j);
          worst = scaled;
        }
      }
    }
    return best;
  }

  // J = L^{-T} Q and R from the QR factorisation of L^{-1} N over the active normals.
  void refactor() {
    const Eigen::Index dim = x_.size();
    const Eigen::Index nact = static_cast<Eigen::Index>(active_.size());
    if (nact == 0) {
      j_ = linv_.transpose();
      r_.resize(0, 0);
      return;
    }
    Mat n(dim, nact);
    for (Eigen::Index a = 0; a < nact; ++a) n.col(a) = normal(active_[static_cast<std::size_t>(a)]);
    Eigen::HouseholderQR<Mat> qr(linv_ * n);
    const Mat q = qr.householderQ();
    j_ = linv_.transpose() * q;
    r_ = qr.matrixQR().topRows(nact).triangularView<Eigen::Upper>();
  }

  void add(int p, double multiplier) {
    active_.push_back(p);
    in_active_[static_cast<std::size_t>(p)] = true;
    u_.conservativeResize(u_.size() + 1);
    u_(u_.size() - 1) = multiplier;
    refactor();
  }

  void remove(Eigen::Index a) {
    const int j = active_[static_cast<std::size_t>(a)];
    in_active_[static_cast<std::size_t>(j)] = false;
    active_.erase(active_.begin() + a);
    const Eigen::Index tail = u_.size() - a - 1;
    if (tail > 0) u_.segment(a, tail) = u_.tail(tail).eval();
    u_.conservativeResize(u_.size() - 1);
    refactor();
  }

  // Working set taken from the constraints that bind at `start`. Accepted only when the
  // equality-constrained minimiser over that set has non-negative multipliers, which is a
  // valid starting state for the dual method.
  bool seed_from(const Vec& start) {
    if (start.size() != x_.size() || !start.allFinite()) return false;
    std::vector<int> cand;
    std::vector<bool> row_used(static_cast<std::size_t>(qp_.C.rows()), false);
    const Vec cx = qp_.C * start;
    for (std::size_t j = 0; j < halfspaces_.size(); ++j) {
      const Halfspace& h = halfspaces_[j];
      if (row_used[static_cast<std::size_t>(h.row)]) continue;
      const double s = h.sign * cx(h.row) - h.rhs;
      if (std::abs(s) <= 1e-7 * (1.0 + std::abs(h.rhs))) {
        cand.push_back(static_cast<int>(j));
        row_used[static_cast<std::size_t>(h.row)] = true;
      }
    }
    if (cand.empty()) return false;

    const Eigen::Index dim = x_.size();
    const Eigen::Index nact = static_cast<Eigen::Index>(cand.size());
    if (nact > dim) return false;
    Mat n(dim, nact);
    Vec b(nact);
    for (Eigen::Index a = 0; a < nact; ++a) {
      n.col(a) = normal(cand[static_cast<std::size_t>(a)]);
      b(a) = halfspaces_[static_cast<std::size_t>(cand[static_cast<std::size_t>(a)])].rhs;
    }
    Eigen::HouseholderQR<Mat> qr(linv_ * n);
    const Mat r = qr.matrixQR().topRows(nact).triangularView<Eigen::Upper>();
    const double rmax = r.diagonal().cwiseAbs().maxCoeff();
    if (r.diagonal().cwiseAbs().minCoeff() <= 1e-10 * std::max(rmax, 1.0)) return false;

    // x = x_unc + P^{-1} N u with (N' P^{-1} N) u = b - N' x_unc.
    const Vec rhs = b - n.transpose() * x_;
    const Vec w = r.transpose().triangularView<Eigen::Lower>().solve(rhs);
    const Vec u = r.triangularView<Eigen::Upper>().solve(w);
    if ((u.array() < 0.0).any()) return false;

    x_ += llt_.solve(n * u);
    active_ = cand;
    for (int j : cand) in_active_[static_cast<std::size_t>(j)] = true;
    u_ = u;
    refactor();
    return true;
  }

  QpSolution& finish(QpSolution& sol, QpStatus status, int iter) {
    sol.x = x_;
    sol.multipliers = Vec::Zero(qp_.C.rows());
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const Halfspace& h = halfspaces_[static_cast<std::size_t>(active_[a])];
      // sign * c' x >= rhs with multiplier u contributes -u * sign * c to the gradient balance.
      sol.multipliers(h.row) += -h.sign * u_(static_cast<Eigen::Index>(a));
    }
    sol.objective = objective();
    sol.iterations = iter;
    sol.kkt = kkt_residuals(qp_, sol.x, sol.multipliers);
    sol.status = status;
    return sol;
  }

  const QpProblem& qp_;
  const QpSolverOptions& opt_;
  Eigen::LLT<Mat> llt_;
  Mat linv_;
  std::vector<Halfspace> halfspaces_;
  std::vector<bool> in_active_;
  std::vector<int> active_;
  Vec u_;
  Vec x_;
  Mat j_;
  Mat r_;
};

void validate_problem(const QpProblem& qp) {
  const Eigen::Index dim = qp.P.rows();
  if (qp.P.cols() != dim || qp.q.size() != dim) throw DimensionError("QP: P and q sizes disagree");
  if (qp.C.rows() > 0 && qp.C.cols() != dim) throw DimensionError("QP: C column count mismatch");
  if (qp.lower.size() != qp.C.rows() || qp.upper.size() != qp.C.rows()) {
    throw DimensionError("QP: bound vectors must have one entry per constraint row");
  }
  if (!qp.P.allFinite() || !qp.q.allFinite() || !qp.C.allFinite()) {
    throw NonFiniteError("QP: non-finite problem data");
  }
  const double scale = 1.0 + qp.P.cwiseAbs().maxCoeff();
  if ((qp.P - qp.P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument("QP: P is not symmetric");
  }
}

}  // namespace

QpSolution solve(const QpProblem& problem, const QpSolverOptions& options) {
  validate_problem(problem);
  for (Eigen::Index i = 0; i < problem.C.rows(); ++i) {
    if (problem.lower(i) > problem.upper(i) || std::isnan(problem.lower(i)) ||
        std::isnan(problem.upper(i))) {
      QpSolution sol;
      sol.status = QpStatus::infeasible;
      sol.x = Vec::Zero(problem.P.rows());
      sol.multipliers = Vec::Zero(problem.C.rows());
      return sol;
    }
  }
  DualActiveSet solver(problem, options);
  return solver.run();
}

}  // namespace mpcfolio
