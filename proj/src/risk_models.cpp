#include "portfolio/risk_models.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "portfolio/errors.hpp"

namespace portfolio {

std::string to_string(RiskKind kind) { return kind == RiskKind::Variance ? "var" : "svar"; }

RiskKind parse_risk_kind(std::string_view text) {
  if (text == "var" || text == "variance" || text == "Variance") return RiskKind::Variance;
  if (text == "svar" || text == "semivariance" || text == "Semivariance") return RiskKind::Semivariance;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown risk kind '{}' (expected var|svar)", text));
}

Eigen::VectorXd mean_returns(const ReturnsMatrix& r) {
  const auto t = r.periods();
  if (t < 1) throw Error(ErrorCode::InsufficientHistory, "mean of an empty return series");
  Eigen::VectorXd mu(r.num_assets());
  for (Eigen::Index j = 0; j < r.num_assets(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < t; ++i) s += r.values(i, j);
    mu(j) = s / static_cast<double>(t);
  }
  return mu;
}

Eigen::MatrixXd covariance(const ReturnsMatrix& r) {
  const auto t = r.periods();
  const auto n = r.num_assets();
  if (t < 2) throw Error(ErrorCode::InsufficientHistory, fmt::format("covariance needs T >= 2, got {}", t));
  const Eigen::VectorXd mu = mean_returns(r);
  Eigen::MatrixXd centered(t, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < t; ++i) centered(i, j) = r.values(i, j) - mu(j);

  // Fixed summation order per entry so results do not depend on vectorization.
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < t; ++i) s += centered(i, a) * centered(i, b);
      cov(a, b) = cov(b, a) = s / static_cast<double>(t - 1);
    }
  }
  return cov;
}

Eigen::MatrixXd correlation(const ReturnsMatrix& r) {
  const Eigen::MatrixXd cov = covariance(r);
  const auto n = cov.rows();
  Eigen::VectorXd sd(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(cov(j, j) > 0.0))
      throw Error(ErrorCode::ZeroVariance,
                  fmt::format("asset '{}' has zero variance", j < static_cast<Eigen::Index>(r.assets.size())
                                                                  ? r.assets[static_cast<std::size_t>(j)]
                                                                  : std::to_string(j)));
    sd(j) = std::sqrt(cov(j, j));
  }
  Eigen::MatrixXd rho(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    rho(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < n; ++b) rho(a, b) = rho(b, a) = std::clamp(cov(a, b) / (sd(a) * sd(b)), -1.0, 1.0);
  }
  return rho;
}

Eigen::MatrixXd semicovariance_estrada(const ReturnsMatrix& r, double threshold_b) {
  const auto t = r.periods();
  const auto n = r.num_assets();
  if (t < 1) throw Error(ErrorCode::InsufficientHistory, "semicovariance of an empty return series");
  Eigen::MatrixXd down(t, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < t; ++i) down(i, j) = std::min(r.values(i, j) - threshold_b, 0.0);

  Eigen::MatrixXd s(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < t; ++i) acc += down(i, a) * down(i, b);
      s(a, b) = s(b, a) = acc / static_cast<double>(t);
    }
  }
  return s;
}

double semivariance_exact(const ReturnsMatrix& r, const Eigen::VectorXd& w, double threshold_b) {
  const auto t = r.periods();
  if (w.size() != r.num_assets()) throw Error(ErrorCode::InvalidArgument, "weight vector length mismatch");
  if (t < 1) throw Error(ErrorCode::InsufficientHistory, "semivariance of an empty return series");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) {
    double rp = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) rp += w(j) * r.values(i, j);
    const double d = std::min(rp - threshold_b, 0.0);
    acc += d * d;
  }
  return acc / static_cast<double>(t);
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_psd(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return true;
  const double max_diag = m.diagonal().maxCoeff();
  if (m.diagonal().minCoeff() < 0.0) return false;
  return min_eigenvalue(m) >= -1e-10 * max_diag;
}

RiskModel build_risk_model(const ReturnsMatrix& r, RiskKind kind, double threshold_b,
                           AnnualizationConvention convention) {
  if (convention.daily_to_annual_expectation <= 0 || convention.evaluation_periods <= 0)
    throw Error(ErrorCode::InvalidArgument, "annualization period counts must be positive");
  RiskModel m;
  m.assets = r.assets;
  m.mu = mean_returns(r);
  m.kind = kind;
  m.threshold_b = threshold_b;
  m.convention = convention;
  m.observations = r.periods();
  m.sigma = symmetrize(kind == RiskKind::Variance ? covariance(r) : semicovariance_estrada(r, threshold_b));
  if (!is_psd(m.sigma))
    throw Error(ErrorCode::NumericalBreakdown,
                fmt::format("risk matrix is not positive semidefinite (min eigenvalue {})", min_eigenvalue(m.sigma)));
  return m;
}

}  // namespace portfolio
