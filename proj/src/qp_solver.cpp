#include "portfolio/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "portfolio/errors.hpp"

namespace portfolio {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
// A step direction whose free component is this small relative to the whole
// is treated as zero: the constraint is dependent on the working set.
constexpr double kDependentRatio = 1e-12;

class GoldfarbIdnani {
 public:
  GoldfarbIdnani(const QuadraticProgram& qp, const QpOptions& options)
      : qp_(qp), n_(qp.dimension()), me_(qp.A_eq.rows()), mi_(qp.A_ineq.rows()) {
    max_iter_ = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(std::max<Index>(100 * n_, 1));
    tol_ = options.feasibility_tol;
  }

  QpSolution run() {
    factorize();
    add_equalities();
    add_inequalities();

    QpSolution sol;
    sol.x = x_;
    sol.objective = qp_objective(qp_, x_);
    sol.multipliers = VectorXd::Zero(me_ + mi_);
    for (Index k = 0; k < iq_; ++k) {
      sol.active_set.push_back(active_[static_cast<std::size_t>(k)]);
      sol.multipliers(active_[static_cast<std::size_t>(k)]) = u_(k);
    }
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.iterations = iterations_;
    return sol;
  }

 private:
  VectorXd normal(Index id) const {
    return id < me_ ? VectorXd(qp_.A_eq.row(id).transpose()) : VectorXd(qp_.A_ineq.row(id - me_).transpose());
  }
  double rhs(Index id) const { return id < me_ ? qp_.b_eq(id) : qp_.b_ineq(id - me_); }
  double slack(Index id) const { return normal(id).dot(x_) - rhs(id); }

  void factorize() {
    Eigen::LLT<MatrixXd> llt(qp_.D);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::NumericalBreakdown, "quadratic term is not positive definite");
    const MatrixXd L = llt.matrixL();
    if (L.diagonal().minCoeff() <= 0.0 || !L.allFinite())
      throw Error(ErrorCode::NumericalBreakdown, "quadratic term is not positive definite");
    // J = L^{-T}, so that J J' = D^{-1}.
    J_ = L.transpose().triangularView<Eigen::Upper>().solve(MatrixXd::Identity(n_, n_));
    R_ = MatrixXd::Zero(n_, n_);
    u_ = VectorXd::Zero(n_ + 1);
    active_.assign(static_cast<std::size_t>(n_ + 1), -1);
    in_active_.assign(static_cast<std::size_t>(me_ + mi_), false);
    iq_ = 0;
    r_norm_ = 1.0;
    // Unconstrained minimizer: the starting dual-feasible point.
    x_ = llt.solve(qp_.d);
  }

  // dv = J' np, z = J2 J2' np (primal direction), r = R^{-1} J1' np (dual direction).
  void step_direction(const VectorXd& np) {
    dv_ = J_.transpose() * np;
    z_ = J_.rightCols(n_ - iq_) * dv_.tail(n_ - iq_);
    r_ = R_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(dv_.head(iq_));
  }

  bool direction_is_zero() const {
    const double total = dv_.norm();
    return total == 0.0 || dv_.tail(n_ - iq_).norm() <= kDependentRatio * total;
  }

  bool add_constraint() {
    for (Index j = n_ - 1; j >= iq_ + 1; --j) {
      double cc = dv_(j - 1);
      double ss = dv_(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      dv_(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        dv_(j - 1) = -h;
      } else {
        dv_(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Index k = 0; k < n_; ++k) {
        const double t1 = J_(k, j - 1);
        const double t2 = J_(k, j);
        J_(k, j - 1) = t1 * cc + t2 * ss;
        J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
      }
    }
    ++iq_;
    R_.col(iq_ - 1).head(iq_) = dv_.head(iq_);
    if (std::abs(dv_(iq_ - 1)) <= kEps * r_norm_) return false;
    r_norm_ = std::max(r_norm_, std::abs(dv_(iq_ - 1)));
    return true;
  }

  void delete_constraint(Index id) {
    Index qq = -1;
    for (Index i = 0; i < iq_; ++i)
      if (active_[static_cast<std::size_t>(i)] == id) {
        qq = i;
        break;
      }
    if (qq < 0) throw Error(ErrorCode::NumericalBreakdown, "dropping a constraint that is not active");
    in_active_[static_cast<std::size_t>(id)] = false;

    for (Index i = qq; i < iq_ - 1; ++i) {
      active_[static_cast<std::size_t>(i)] = active_[static_cast<std::size_t>(i + 1)];
      u_(i) = u_(i + 1);
      R_.col(i) = R_.col(i + 1);
    }
    active_[static_cast<std::size_t>(iq_ - 1)] = active_[static_cast<std::size_t>(iq_)];
    u_(iq_ - 1) = u_(iq_);
    active_[static_cast<std::size_t>(iq_)] = -1;
    u_(iq_) = 0.0;
    R_.col(iq_ - 1).head(iq_).setZero();
    --iq_;
    if (iq_ == 0) return;

    for (Index j = qq; j < iq_; ++j) {
      double cc = R_(j, j);
      double ss = R_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R_(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Index k = j + 1; k < iq_; ++k) {
        const double t1 = R_(j, k);
        const double t2 = R_(j + 1, k);
        R_(j, k) = t1 * cc + t2 * ss;
        R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
      }
      for (Index k = 0; k < n_; ++k) {
        const double t1 = J_(k, j);
        const double t2 = J_(k, j + 1);
        J_(k, j) = t1 * cc + t2 * ss;
        J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
      }
    }
  }

  void add_equalities() {
    for (Index k = 0; k < me_; ++k) {
      const VectorXd np = normal(k);
      step_direction(np);
      const double s = np.dot(x_) - qp_.b_eq(k);
      if (direction_is_zero()) {
        if (std::abs(s) <= tol_ * (1.0 + std::abs(qp_.b_eq(k)))) continue;  // redundant
        throw Error(ErrorCode::Infeasible, fmt::format("equality constraint {} contradicts the others", k));
      }
      const double t2 = -s / z_.dot(np);
      x_ += t2 * z_;
      u_(iq_) = t2;
      u_.head(iq_) -= t2 * r_;
      active_[static_cast<std::size_t>(iq_)] = k;
      in_active_[static_cast<std::size_t>(k)] = true;
      if (!add_constraint())
        throw Error(ErrorCode::NumericalBreakdown, fmt::format("equality constraint {} is linearly dependent", k));
      ++eq_active_;
    }
  }

  // Most violated inactive inequality (lowest index on ties), or -1.
  Index select_violated() const {
    Index best = -1;
    double best_s = 0.0;
    for (Index k = 0; k < mi_; ++k) {
      const Index id = me_ + k;
      if (in_active_[static_cast<std::size_t>(id)]) continue;
      const double s = slack(id);
      const double tol = 1e-13 * (1.0 + std::abs(qp_.b_ineq(k)));
      if (s < -tol && s < best_s) {
        best_s = s;
        best = id;
      }
    }
    return best;
  }

  void add_inequalities() {
    const int inner_cap = static_cast<int>(10 * (n_ + me_ + mi_) + 10);
    for (;;) {
      const Index ip = select_violated();
      if (ip < 0) return;
      if (++iterations_ > max_iter_)
        throw Error(ErrorCode::MaxIterations, fmt::format("iteration cap {} reached", max_iter_));

      const VectorXd np = normal(ip);
      double s_ip = slack(ip);
      u_(iq_) = 0.0;
      active_[static_cast<std::size_t>(iq_)] = ip;

      for (int inner = 0;; ++inner) {
        if (inner > inner_cap) throw Error(ErrorCode::NumericalBreakdown, "active-set cycling");
        step_direction(np);

        // Largest dual step that keeps inequality multipliers nonnegative.
        double t1 = kInf;
        Index drop = -1;
        for (Index k = eq_active_; k < iq_; ++k) {
          if (r_(k) > 0.0) {
            const double ratio = u_(k) / r_(k);
            if (ratio < t1) {
              t1 = ratio;
              drop = active_[static_cast<std::size_t>(k)];
            }
          }
        }
        // Step that makes constraint ip binding.
        const double t2 = direction_is_zero() ? kInf : -s_ip / z_.dot(np);
        const double t = std::min(t1, t2);
        if (t == kInf)
          throw Error(ErrorCode::Infeasible, fmt::format("no point satisfies constraint {} with the working set", ip));

        if (t2 == kInf) {
          u_.head(iq_) -= t * r_;
          u_(iq_) += t;
          delete_constraint(drop);
          continue;
        }

        x_ += t * z_;
        u_.head(iq_) -= t * r_;
        u_(iq_) += t;

        if (t == t2) {
          in_active_[static_cast<std::size_t>(ip)] = true;
          if (!add_constraint())
            throw Error(ErrorCode::NumericalBreakdown, fmt::format("constraint {} is linearly dependent", ip));
          break;
        }
        delete_constraint(drop);
        s_ip = slack(ip);
      }
    }
  }

  const QuadraticProgram& qp_;
  Index n_, me_, mi_;
  int max_iter_ = 0;
  double tol_ = 1e-8;
  int iterations_ = 0;

  MatrixXd J_, R_;
  VectorXd x_, u_, dv_, z_, r_;
  std::vector<Index> active_;
  std::vector<bool> in_active_;
  Index iq_ = 0;
  Index eq_active_ = 0;
  double r_norm_ = 1.0;
};

void check_shapes(const QuadraticProgram& qp) {
  const Index n = qp.D.rows();
  if (n == 0 || qp.D.cols() != n) throw Error(ErrorCode::InvalidArgument, "D must be a nonempty square matrix");
  if (qp.d.size() != n) throw Error(ErrorCode::InvalidArgument, "linear term length differs from D");
  if (qp.A_eq.rows() > 0 && qp.A_eq.cols() != n) throw Error(ErrorCode::InvalidArgument, "A_eq width differs from D");
  if (qp.A_ineq.rows() > 0 && qp.A_ineq.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "A_ineq width differs from D");
  if (qp.b_eq.size() != qp.A_eq.rows()) throw Error(ErrorCode::InvalidArgument, "b_eq length differs from A_eq");
  if (qp.b_ineq.size() != qp.A_ineq.rows()) throw Error(ErrorCode::InvalidArgument, "b_ineq length differs from A_ineq");
  const double scale = std::max(1.0, qp.D.cwiseAbs().maxCoeff());
  if ((qp.D - qp.D.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorCode::InvalidArgument, "D is not symmetric");
}

// Re-solves the equality-constrained problem on the final working set with a
// null-space method, so active constraints hold to rounding error even when D
// is badly conditioned. Returns false when the working set is degenerate.
bool polish(const QuadraticProgram& qp, QpSolution& sol) {
  const Index n = qp.dimension();
  const Index me = qp.A_eq.rows();
  const auto k = static_cast<Index>(sol.active_set.size());
  if (k == 0 || k > n) return false;
  MatrixXd a(k, n);
  VectorXd b(k);
  for (Index r = 0; r < k; ++r) {
    const Index id = sol.active_set[static_cast<std::size_t>(r)];
    a.row(r) = id < me ? qp.A_eq.row(id) : qp.A_ineq.row(id - me);
    b(r) = id < me ? qp.b_eq(id) : qp.b_ineq(id - me);
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(a.transpose());
  if (qr.rank() < k) return false;
  const MatrixXd q = qr.householderQ();
  // Minimum-norm particular solution of a x = b.
  const VectorXd xp = a.transpose() * (a * a.transpose()).ldlt().solve(b);
  VectorXd x = xp;
  if (k < n) {
    const MatrixXd z = q.rightCols(n - k);
    const MatrixXd reduced = z.transpose() * qp.D * z;
    Eigen::LLT<MatrixXd> llt(reduced);
    if (llt.info() != Eigen::Success) return false;
    x = xp + z * llt.solve(z.transpose() * (qp.d - qp.D * xp));
  }
  const VectorXd g = qp.D * x - qp.d;
  const VectorXd u = a.transpose().colPivHouseholderQr().solve(g);
  for (Index r = 0; r < k; ++r)
    if (sol.active_set[static_cast<std::size_t>(r)] >= me && u(r) < -1e-8) return false;
  const double before = max_violation(qp, sol.x);
  const double after = max_violation(qp, x);
  if (!(after <= before)) return false;
  sol.x = x;
  sol.objective = qp_objective(qp, x);
  sol.multipliers.setZero();
  for (Index r = 0; r < k; ++r) sol.multipliers(sol.active_set[static_cast<std::size_t>(r)]) = u(r);
  return true;
}

}  // namespace

double qp_objective(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(qp.D * x) - qp.d.dot(x);
}

double max_violation(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  double v = 0.0;
  if (qp.A_eq.rows() > 0) v = std::max(v, (qp.A_eq * x - qp.b_eq).cwiseAbs().maxCoeff());
  if (qp.A_ineq.rows() > 0) v = std::max(v, (qp.b_ineq - qp.A_ineq * x).maxCoeff());
  return v;
}

double stationarity_residual(const QuadraticProgram& qp, const QpSolution& sol) {
  Eigen::VectorXd g = qp.D * sol.x - qp.d;
  const Index me = qp.A_eq.rows();
  if (me > 0) g -= qp.A_eq.transpose() * sol.multipliers.head(me);
  if (qp.A_ineq.rows() > 0) g -= qp.A_ineq.transpose() * sol.multipliers.tail(qp.A_ineq.rows());
  return g.norm();
}

QpSolution solve_qp(const QuadraticProgram& qp, const QpOptions& options) {
  check_shapes(qp);
  GoldfarbIdnani solver(qp, options);
  QpSolution sol = solver.run();
  polish(qp, sol);
  const double viol = max_violation(qp, sol.x);
  if (!(viol <= options.feasibility_tol))
    throw Error(ErrorCode::NumericalBreakdown,
                fmt::format("solution violates constraints by {:.3e} (tolerance {:.1e})", viol, options.feasibility_tol));
  return sol;
}

}  // namespace portfolio
