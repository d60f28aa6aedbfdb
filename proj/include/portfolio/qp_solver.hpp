#pragma once

#include <Eigen/Dense>
#include <vector>

namespace portfolio {

/// minimize  1/2 x'Dx - d'x
/// s.t.      A_eq x  = b_eq
///           A_ineq x >= b_ineq
///
/// Constraint matrices hold one constraint per row. D must be symmetric
/// positive definite (PSD inputs go through regularize() first).
struct QuadraticProgram {
  Eigen::MatrixXd D;
  Eigen::VectorXd d;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_ineq;
  Eigen::VectorXd b_ineq;

  Eigen::Index dimension() const { return D.rows(); }
};

struct QpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Binding constraints: equality k is id k, inequality k is id A_eq.rows() + k.
  std::vector<Eigen::Index> active_set;
  /// Lagrange multipliers indexed like active_set ids; zero for inactive rows.
  /// Stationarity: D x - d = A_eq' u_eq + A_ineq' u_ineq with u_ineq >= 0.
  Eigen::VectorXd multipliers;
  int iterations = 0;
};

struct QpOptions {
  double feasibility_tol = 1e-8;
  /// 0 selects the default cap of 100 * dimension.
  int max_iterations = 0;
};

/// Dual active-set method of Goldfarb and Idnani. Constraints are brought in
/// most-violated first with ties going to the lowest index, so repeated
/// solves are bit-identical.
///
/// Throws Error{Infeasible, MaxIterations, NumericalBreakdown, InvalidArgument}.
QpSolution solve_qp(const QuadraticProgram& qp, const QpOptions& options = {});

/// Objective value 1/2 x'Dx - d'x.
double qp_objective(const QuadraticProgram& qp, const Eigen::VectorXd& x);

/// Largest violation over all constraints (0 when feasible).
double max_violation(const QuadraticProgram& qp, const Eigen::VectorXd& x);

/// Norm of D x - d - A' u.
double stationarity_residual(const QuadraticProgram& qp, const QpSolution& sol);

}  // namespace portfolio
