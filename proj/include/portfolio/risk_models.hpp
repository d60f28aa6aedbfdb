#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "portfolio/market_data.hpp"

namespace portfolio {

enum class RiskKind { Variance, Semivariance };

std::string to_string(RiskKind kind);
RiskKind parse_risk_kind(std::string_view text);  // "var" | "svar" (also full names)

/// Period counts used to annualize daily figures: expectations scale by the
/// in-sample count, realized returns by the evaluation-year count.
struct AnnualizationConvention {
  int daily_to_annual_expectation = 251;
  int evaluation_periods = 250;
};

/// Mean vector plus a symmetric PSD risk matrix (covariance or downside
/// semicovariance about `threshold_b`).
struct RiskModel {
  std::vector<std::string> assets;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  RiskKind kind = RiskKind::Variance;
  double threshold_b = 0.0;
  AnnualizationConvention convention;
  Eigen::Index observations = 0;

  Eigen::Index num_assets() const { return mu.size(); }
  /// Number of free entries in the risk matrix, N(N+1)/2.
  Eigen::Index parameter_count() const { return num_assets() * (num_assets() + 1) / 2; }
};

Eigen::VectorXd mean_returns(const ReturnsMatrix& r);

/// Sample covariance, divisor T-1. Throws InsufficientHistory when T < 2.
Eigen::MatrixXd covariance(const ReturnsMatrix& r);

/// Pearson correlation. Throws ZeroVariance naming the first constant column.
Eigen::MatrixXd correlation(const ReturnsMatrix& r);

/// Exogenous downside semicovariance about threshold B:
///   S_ij = (1/T) * sum_t min(R_it - B, 0) * min(R_jt - B, 0)
Eigen::MatrixXd semicovariance_estrada(const ReturnsMatrix& r, double threshold_b = 0.0);

/// Endogenous semivariance of the portfolio return series: mean over all T
/// periods of min(r_pt - B, 0)^2. Used to measure the quality of the
/// exogenous approximation, never optimized directly.
double semivariance_exact(const ReturnsMatrix& r, const Eigen::VectorXd& w, double threshold_b = 0.0);

RiskModel build_risk_model(const ReturnsMatrix& r, RiskKind kind = RiskKind::Variance, double threshold_b = 0.0,
                           AnnualizationConvention convention = {});

/// (M + M^T) / 2
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

/// min eigenvalue >= -1e-10 * max(diag) and non-negative diagonal.
bool is_psd(const Eigen::MatrixXd& m);

}  // namespace portfolio
