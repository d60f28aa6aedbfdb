#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "portfolio/qp_solver.hpp"
#include "portfolio/risk_models.hpp"

namespace portfolio {

/// Which holdings appear in a portfolio's named view.
struct SparseViewRule {
  int decimals = 4;        // weights are rounded before filtering
  double threshold = 0.0;  // keep rounded weights strictly above this
};

inline constexpr SparseViewRule kExactSolverView{4, 0.0};
inline constexpr SparseViewRule kGaView{4, 0.005};

struct Portfolio {
  std::vector<std::string> assets;
  Eigen::VectorXd weights;
  double expected_return = 0.0;  // w' mu, per period
  double risk = 0.0;             // sqrt(w' Sigma w): std deviation or semi-deviation
  RiskKind kind = RiskKind::Variance;
  std::vector<std::pair<std::string, double>> sparse_view;  // in asset order
};

struct ObjectiveParams {
  std::optional<double> target_return;
  double lambda = 0.0;
  /// Attain the target with equality (frontier tracing) instead of >=.
  bool pin_return_equality = false;
};

/// Evaluates weights against a model and builds the named view.
Portfolio make_portfolio(const RiskModel& model, const Eigen::VectorXd& weights,
                         SparseViewRule rule = kExactSolverView);

double round_to(double value, int decimals);

/// Adds 1e-11 to the diagonal unless the matrix is safely positive definite
/// (smallest eigenvalue above 1e-12).
Eigen::MatrixXd regularize(const Eigen::MatrixXd& sigma);

/// Feasible expected-return range [min mu, max mu] of long-only portfolios.
std::pair<double, double> return_range(const RiskModel& model);

/// minimize w'Sigma w  s.t. 1'w = 1, w >= 0, and optionally mu'w >= beta (or = beta).
QuadraticProgram markowitz_program(const RiskModel& model, const ObjectiveParams& params);

/// minimize (1-lambda) w'Sigma w - lambda mu'w  s.t. 1'w = 1, w >= 0.
QuadraticProgram lambda_program(const RiskModel& model, double lambda);

/// Minimum-risk portfolio, optionally at a required expected return.
/// Throws Error{TargetOutOfRange} plus solver errors.
Portfolio markowitz_portfolio(const RiskModel& model, const ObjectiveParams& params = {});

/// Risk/return trade-off portfolio. lambda = 0 is the minimum-risk
/// portfolio, lambda = 1 puts everything on the highest-mean asset (first on ties).
Portfolio lambda_portfolio(const RiskModel& model, double lambda);

/// Value of (1-lambda) w'Sigma w - lambda mu'w.
double lambda_objective(const RiskModel& model, const Eigen::VectorXd& w, double lambda);

}  // namespace portfolio
