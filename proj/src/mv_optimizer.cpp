#include "portfolio/mv_optimizer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "portfolio/errors.hpp"

namespace portfolio {

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

Portfolio make_portfolio(const RiskModel& model, const Eigen::VectorXd& weights, SparseViewRule rule) {
  if (weights.size() != model.num_assets()) throw Error(ErrorCode::InvalidArgument, "weight vector length mismatch");
  Portfolio p;
  p.assets = model.assets;
  p.weights = weights;
  p.kind = model.kind;
  p.expected_return = weights.dot(model.mu);
  p.risk = std::sqrt(std::max(0.0, weights.dot(model.sigma * weights)));
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double rounded = round_to(weights(i), rule.decimals);
    if (rounded > rule.threshold) {
      const auto idx = static_cast<std::size_t>(i);
      p.sparse_view.emplace_back(idx < model.assets.size() ? model.assets[idx] : std::to_string(i), rounded);
    }
  }
  return p;
}

Eigen::MatrixXd regularize(const Eigen::MatrixXd& sigma) {
  if (sigma.size() > 0 && min_eigenvalue(sigma) > 1e-12) return sigma;
  return sigma + 1e-11 * Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
}

std::pair<double, double> return_range(const RiskModel& model) {
  return {model.mu.minCoeff(), model.mu.maxCoeff()};
}

namespace {

// Weights at a bound can come back as +-1e-17; snap them to zero.
Eigen::VectorXd long_only(const QpSolution& sol) {
  return sol.x.unaryExpr([](double v) { return v < 1e-14 ? 0.0 : v; });
}

void simplex_constraints(QuadraticProgram& qp, Eigen::Index n) {
  qp.A_eq = Eigen::MatrixXd::Ones(1, n);
  qp.b_eq = Eigen::VectorXd::Ones(1);
  qp.A_ineq = Eigen::MatrixXd::Identity(n, n);
  qp.b_ineq = Eigen::VectorXd::Zero(n);
}

}  // namespace

QuadraticProgram markowitz_program(const RiskModel& model, const ObjectiveParams& params) {
  const auto n = model.num_assets();
  QuadraticProgram qp;
  qp.D = regularize(model.sigma);
  qp.d = Eigen::VectorXd::Zero(n);
  simplex_constraints(qp, n);
  if (params.target_return) {
    const double beta = *params.target_return;
    if (params.pin_return_equality) {
      qp.A_eq.conservativeResize(2, n);
      qp.A_eq.row(1) = model.mu.transpose();
      qp.b_eq.conservativeResize(2);
      qp.b_eq(1) = beta;
    } else {
      Eigen::MatrixXd a(n + 1, n);
      a.row(0) = model.mu.transpose();
      a.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
      Eigen::VectorXd b(n + 1);
      b(0) = beta;
      b.tail(n).setZero();
      qp.A_ineq = std::move(a);
      qp.b_ineq = std::move(b);
    }
  }
  return qp;
}

QuadraticProgram lambda_program(const RiskModel& model, double lambda) {
  const auto n = model.num_assets();
  QuadraticProgram qp;
  // 1/2 w'(2(1-lambda) Sigma) w - lambda mu'w
  qp.D = regularize(2.0 * (1.0 - lambda) * model.sigma);
  qp.d = lambda * model.mu;
  simplex_constraints(qp, n);
  return qp;
}

Portfolio markowitz_portfolio(const RiskModel& model, const ObjectiveParams& params) {
  if (model.num_assets() == 0) throw Error(ErrorCode::InvalidArgument, "empty risk model");
  if (params.target_return) {
    const auto [lo, hi] = return_range(model);
    const double beta = *params.target_return;
    if (!(beta >= lo && beta <= hi))
      throw Error(ErrorCode::TargetOutOfRange,
                  fmt::format("target return {:.10g} outside the attainable range [{:.10g}, {:.10g}]", beta, lo, hi));
  }
  return make_portfolio(model, long_only(solve_qp(markowitz_program(model, params))));
}

Portfolio lambda_portfolio(const RiskModel& model, double lambda) {
  if (model.num_assets() == 0) throw Error(ErrorCode::InvalidArgument, "empty risk model");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorCode::InvalidArgument, fmt::format("lambda {} outside [0, 1]", lambda));
  if (lambda == 1.0) {
    // Linear objective over the simplex: the optimum is a vertex.
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < model.num_assets(); ++i)
      if (model.mu(i) > model.mu(best)) best = i;
    return make_portfolio(model, Eigen::VectorXd::Unit(model.num_assets(), best));
  }
  return make_portfolio(model, long_only(solve_qp(lambda_program(model, lambda))));
}

double lambda_objective(const RiskModel& model, const Eigen::VectorXd& w, double lambda) {
  return (1.0 - lambda) * w.dot(model.sigma * w) - lambda * w.dot(model.mu);
}

}  // namespace portfolio
