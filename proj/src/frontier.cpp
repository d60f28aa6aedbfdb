#include "portfolio/frontier.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "portfolio/errors.hpp"
#include "portfolio/rng.hpp"

namespace portfolio {
namespace {

void require_points(int n_points, int minimum) {
  if (n_points < minimum)
    throw Error(ErrorCode::InvalidArgument, fmt::format("need at least {} points, got {}", minimum, n_points));
}

// Evenly spaced grid from `lo` to `hi`, rounded to 6 decimals, kept inside
// the attainable return range.
std::vector<double> target_grid(double lo, double hi, int n_points, double min_mu, double max_mu) {
  std::vector<double> out(static_cast<std::size_t>(n_points));
  const double step = n_points > 1 ? (hi - lo) / (n_points - 1) : 0.0;
  for (int i = 0; i < n_points; ++i)
    out[static_cast<std::size_t>(i)] = std::clamp(round_to(lo + i * step, 6), min_mu, max_mu);
  return out;
}

FrontierPoint to_point(Portfolio p, double parameter) {
  FrontierPoint fp;
  fp.risk = p.risk;
  fp.expected_return = p.expected_return;
  fp.parameter = parameter;
  fp.portfolio = std::move(p);
  return fp;
}

}  // namespace

std::vector<FrontierPoint> efficient_frontier(const RiskModel& model, int n_points) {
  if (model.num_assets() < 2) throw Error(ErrorCode::InvalidArgument, "frontier needs at least 2 assets");
  require_points(n_points, 2);
  const auto [min_mu, max_mu] = return_range(model);
  const double lo = min_mu + std::abs(min_mu) * 0.005;
  const double hi = max_mu - max_mu * 0.005;
  std::vector<FrontierPoint> out;
  out.reserve(static_cast<std::size_t>(n_points));
  for (double target : target_grid(lo, hi, n_points, min_mu, max_mu)) {
    ObjectiveParams params;
    params.target_return = target;
    params.pin_return_equality = true;
    try {
      out.push_back(to_point(markowitz_portfolio(model, params), target));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("frontier target {:.6f}: {}", target, e.what()));
    }
  }
  return out;
}

std::vector<FrontierPoint> lambda_frontier(const RiskModel& model, int n_points) {
  if (model.num_assets() < 2) throw Error(ErrorCode::InvalidArgument, "frontier needs at least 2 assets");
  require_points(n_points, 2);
  std::vector<FrontierPoint> out;
  out.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double lambda = round_to(static_cast<double>(i) / (n_points - 1), 6);
    try {
      out.push_back(to_point(lambda_portfolio(model, lambda), lambda));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("frontier lambda {:.6f}: {}", lambda, e.what()));
    }
  }
  return out;
}

double two_asset_risk(double weight_a, const TwoAssetParams& p) {
  const double wa = weight_a;
  const double wb = 1.0 - weight_a;
  const double cross = 2.0 * wa * wb * p.sigma_a * p.sigma_b;
  double var = 0.0;
  if (p.rho >= 0.0) {
    const double s = wa * p.sigma_a + wb * p.sigma_b;
    var = s * s - cross * (1.0 - p.rho);
  } else {
    const double s = wa * p.sigma_a - wb * p.sigma_b;
    var = s * s + cross * (1.0 + p.rho);
  }
  return std::sqrt(std::max(0.0, var));
}

TwoAssetParams two_asset_params(const Eigen::Vector2d& mu, const Eigen::Matrix2d& sigma) {
  TwoAssetParams p;
  p.mu_a = mu(0);
  p.mu_b = mu(1);
  p.sigma_a = std::sqrt(std::max(0.0, sigma(0, 0)));
  p.sigma_b = std::sqrt(std::max(0.0, sigma(1, 1)));
  const double denom = p.sigma_a * p.sigma_b;
  p.rho = denom > 0.0 ? std::clamp(0.5 * (sigma(0, 1) + sigma(1, 0)) / denom, -1.0, 1.0) : 0.0;
  if (1.0 - std::abs(p.rho) < 1e-12) p.rho = p.rho > 0.0 ? 1.0 : -1.0;
  return p;
}

std::vector<CurvePoint> two_asset_curve(const TwoAssetParams& p, int n_points) {
  require_points(n_points, 2);
  std::vector<CurvePoint> out(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double w = i == n_points - 1 ? 1.0 : static_cast<double>(i) / (n_points - 1);
    auto& pt = out[static_cast<std::size_t>(i)];
    pt.weight_a = w;
    pt.risk = two_asset_risk(w, p);
    pt.expected_return = w * p.mu_a + (1.0 - w) * p.mu_b;
  }
  return out;
}

std::vector<CurvePoint> two_asset_curve(const Eigen::Vector2d& mu, const Eigen::Matrix2d& sigma, int n_points) {
  return two_asset_curve(two_asset_params(mu, sigma), n_points);
}

Eigen::VectorXd sample_stick_breaking(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  if (n == 0) return w;
  if (n == 1) {
    w(0) = 1.0;
    return w;
  }
  double used = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == 0)
      w(j) = rng.uniform01();
    else if (j == n - 1)
      w(j) = 1.0 - used;
    else
      w(j) = rng.uniform(0.0, 1.0 - used);
    used += w(j);
  }
  const auto perm = rng.permutation(static_cast<std::size_t>(n));
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) out(j) = w(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
  return out;
}

std::vector<CloudPoint> random_portfolio_cloud(const RiskModel& model, int count, std::uint64_t seed) {
  require_points(count, 1);
  Rng rng(seed);
  std::vector<CloudPoint> out(static_cast<std::size_t>(count));
  for (auto& pt : out) {
    const Eigen::VectorXd w = sample_stick_breaking(model.num_assets(), rng);
    pt.expected_return = w.dot(model.mu);
    pt.risk = std::sqrt(std::max(0.0, w.dot(model.sigma * w)));
  }
  return out;
}

FitReport frontier_fit(const RiskModel& in_sample, const std::vector<std::string>& out_assets,
                       const Eigen::VectorXd& out_means, int n_points) {
  if (out_assets != in_sample.assets || out_means.size() != in_sample.num_assets()) {
    std::vector<std::string> mismatched;
    const std::size_t n = std::max(out_assets.size(), in_sample.assets.size());
    for (std::size_t i = 0; i < n; ++i) {
      const std::string a = i < in_sample.assets.size() ? in_sample.assets[i] : "<none>";
      const std::string b = i < out_assets.size() ? out_assets[i] : "<none>";
      if (a != b) mismatched.push_back(fmt::format("column {}: '{}' vs '{}'", i + 1, a, b));
    }
    throw Error(ErrorCode::AssetAlignment,
                fmt::format("evaluation assets do not match the model: {}", fmt::join(mismatched, "; ")));
  }
  require_points(n_points, 2);

  const auto [min_mu, max_mu] = return_range(in_sample);
  const double lo = markowitz_portfolio(in_sample).expected_return;
  const double hi = max_mu - max_mu * 0.005;

  FitReport report;
  const double yearly_expected = in_sample.convention.daily_to_annual_expectation;
  const double yearly_realized = in_sample.convention.evaluation_periods;
  int under = 0;
  int annual_under = 0;
  for (double target : target_grid(lo, hi, n_points, min_mu, max_mu)) {
    ObjectiveParams params;
    params.target_return = target;
    const Portfolio p = markowitz_portfolio(in_sample, params);
    FitPair pair{target, p.expected_return, p.weights.dot(out_means)};
    const double gap = pair.expected - pair.realized;
    report.mean_error += std::abs(gap);
    if (gap > 0.0) {
      report.mean_underestimation_error += gap;
      ++under;
    }
    const double annual_gap = yearly_expected * pair.expected - yearly_realized * pair.realized;
    report.annual_mean_error += std::abs(annual_gap);
    if (annual_gap > 0.0) {
      report.annual_underestimation_error += annual_gap;
      ++annual_under;
    }
    report.pairs.push_back(pair);
  }
  const double count = static_cast<double>(report.pairs.size());
  report.mean_error /= count;
  report.annual_mean_error /= count;
  if (under > 0) report.mean_underestimation_error /= under;
  if (annual_under > 0) report.annual_underestimation_error /= annual_under;
  return report;
}

FitReport frontier_fit(const RiskModel& in_sample, const ReturnsMatrix& out_of_sample, int n_points) {
  if (out_of_sample.assets != in_sample.assets)
    return frontier_fit(in_sample, out_of_sample.assets, Eigen::VectorXd(), n_points);
  return frontier_fit(in_sample, out_of_sample.assets, mean_returns(out_of_sample), n_points);
}

}  // namespace portfolio
