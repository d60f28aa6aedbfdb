#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "portfolio/market_data.hpp"
#include "portfolio/mv_optimizer.hpp"
#include "portfolio/rng.hpp"
#include "portfolio/risk_models.hpp"

namespace portfolio {

struct FrontierPoint {
  double risk = 0.0;
  double expected_return = 0.0;
  double parameter = 0.0;  // target return or lambda that produced the point
  Portfolio portfolio;
};

/// Minimum-variance set traced over `n_points` target returns spaced evenly
/// on [min mu + |min mu| * 0.005, max mu - max mu * 0.005], each target
/// rounded to 6 decimals and attained with equality. Includes the
/// inefficient lower branch.
std::vector<FrontierPoint> efficient_frontier(const RiskModel& model, int n_points = 40);

/// Efficient branch traced by sweeping lambda evenly over [0, 1].
std::vector<FrontierPoint> lambda_frontier(const RiskModel& model, int n_points = 40);

struct TwoAssetParams {
  double mu_a = 0.0;
  double mu_b = 0.0;
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  double rho = 0.0;
};

struct CurvePoint {
  double weight_a = 0.0;
  double risk = 0.0;
  double expected_return = 0.0;
};

/// sigma_p of the two-asset portfolio (w, 1-w). Evaluated as
///   (w s_a + (1-w) s_b)^2 - 2 w (1-w) s_a s_b (1 - rho)   for rho >= 0
///   (w s_a - (1-w) s_b)^2 + 2 w (1-w) s_a s_b (1 + rho)   for rho <  0
/// which are the same polynomial, written so that rho = +-1 is exact.
double two_asset_risk(double weight_a, const TwoAssetParams& p);

/// Derives (sigma_a, sigma_b, rho) from a 2x2 covariance. A correlation within
/// 1e-12 of +-1 is snapped to +-1.
TwoAssetParams two_asset_params(const Eigen::Vector2d& mu, const Eigen::Matrix2d& sigma);

/// w_a swept evenly over [0, 1]; the first point is w_a = 0.
std::vector<CurvePoint> two_asset_curve(const TwoAssetParams& p, int n_points = 30);
std::vector<CurvePoint> two_asset_curve(const Eigen::Vector2d& mu, const Eigen::Matrix2d& sigma, int n_points = 30);

struct CloudPoint {
  double risk = 0.0;
  double expected_return = 0.0;
};

/// Random long-only weights by sequential stick breaking: the first weight is
/// uniform on [0, 1], each following weight uniform on what is left, the last
/// takes the remainder, then coordinates are randomly permuted. Not uniform
/// on the simplex.
Eigen::VectorXd sample_stick_breaking(Eigen::Index n, Rng& rng);

std::vector<CloudPoint> random_portfolio_cloud(const RiskModel& model, int count = 10000, std::uint64_t seed = 1);

struct FitPair {
  double target = 0.0;
  double expected = 0.0;  // in-sample w' mu
  double realized = 0.0;  // out-of-sample w' mu_out
};

struct FitReport {
  double mean_error = 0.0;
  double mean_underestimation_error = 0.0;
  /// Expectations scaled by convention.daily_to_annual_expectation, realized
  /// returns by convention.evaluation_periods.
  double annual_mean_error = 0.0;
  double annual_underestimation_error = 0.0;
  std::vector<FitPair> pairs;
};

/// Realizes in-sample frontier portfolios on out-of-sample mean returns.
/// Targets run from the global minimum-risk return to max mu - max mu * 0.005.
/// Throws Error{AssetAlignment} when the asset lists differ.
FitReport frontier_fit(const RiskModel& in_sample, const ReturnsMatrix& out_of_sample, int n_points = 40);

/// Same, against precomputed out-of-sample mean returns.
FitReport frontier_fit(const RiskModel& in_sample, const std::vector<std::string>& out_assets,
                       const Eigen::VectorXd& out_means, int n_points = 40);

}  // namespace portfolio
