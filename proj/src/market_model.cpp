#include "portfolio/market_model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "portfolio/errors.hpp"
#include "portfolio/mv_optimizer.hpp"

namespace portfolio {

Eigen::VectorXd MarketParams::lot_prices() const { return prices.cwiseProduct(lot_sizes.cast<double>()); }

MarketParams make_market(double capital, Eigen::VectorXd prices, double buy_cost, double sell_cost,
                         double risk_free_rate, int horizon, int lot_size) {
  MarketParams m;
  const auto n = prices.size();
  m.capital = capital;
  m.prices = std::move(prices);
  m.buy_cost_rates = Eigen::VectorXd::Constant(n, buy_cost);
  m.sell_cost_rates = Eigen::VectorXd::Constant(n, sell_cost);
  m.risk_free_rate = risk_free_rate;
  m.horizon = horizon;
  m.lot_sizes = Eigen::VectorXi::Constant(n, lot_size);
  return m;
}

std::vector<std::string> validate(const MarketParams& m) {
  const auto n = m.prices.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "market has no prices");
  if (m.buy_cost_rates.size() != n || m.sell_cost_rates.size() != n || m.lot_sizes.size() != n)
    throw Error(ErrorCode::InvalidArgument, "market vectors differ in length");
  if (!(m.capital > 0.0) || !std::isfinite(m.capital))
    throw Error(ErrorCode::InvalidArgument, fmt::format("capital must be positive, got {}", m.capital));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(m.prices(i) > 0.0) || !std::isfinite(m.prices(i)))
      throw Error(ErrorCode::InvalidArgument, fmt::format("price {} of asset {} is not positive", m.prices(i), i + 1));
    if (!(m.buy_cost_rates(i) >= 0.0) || !(m.sell_cost_rates(i) >= 0.0))
      throw Error(ErrorCode::InvalidArgument, fmt::format("negative cost rate for asset {}", i + 1));
    if (m.lot_sizes(i) < 1) throw Error(ErrorCode::InvalidArgument, fmt::format("lot size of asset {} below 1", i + 1));
  }
  if (m.horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 1 period");
  std::vector<std::string> warnings;
  const Eigen::VectorXd lot = m.lot_prices();
  if (m.capital < lot.minCoeff())
    warnings.push_back(fmt::format("capital {} is below the cheapest lot price {}; only cash is feasible", m.capital,
                                   lot.minCoeff()));
  return warnings;
}

Eigen::VectorXd buy_cost(const ShareVector& n, const MarketParams& m) {
  return n.cast<double>().cwiseProduct(m.lot_prices()).cwiseProduct(m.buy_cost_rates);
}

Eigen::VectorXd sell_cost(const ShareVector& n, const Eigen::VectorXd& mu, const MarketParams& m) {
  const Eigen::VectorXd p = m.lot_prices();
  Eigen::VectorXd out(n.size());
  for (Eigen::Index i = 0; i < n.size(); ++i)
    out(i) = n(i) * (p(i) + m.horizon * mu(i) * p(i)) * m.sell_cost_rates(i);
  return out;
}

double residual_cash(const ShareVector& n, const MarketParams& m) {
  const Eigen::VectorXd p = m.lot_prices();
  double spent = 0.0;
  for (Eigen::Index i = 0; i < n.size(); ++i) spent += n(i) * p(i) + n(i) * p(i) * m.buy_cost_rates(i);
  return m.capital - spent;
}

bool is_feasible(const ShareVector& n, const MarketParams& m) {
  return n.size() == m.num_assets() && (n.array() >= 0).all() && residual_cash(n, m) >= 0.0;
}

Eigen::VectorXd implied_weights(const ShareVector& n, const MarketParams& m) {
  return n.cast<double>().cwiseProduct(m.lot_prices()) / m.capital;
}

double net_portfolio_return(const ShareVector& n, const RiskModel& model, const MarketParams& m) {
  const Eigen::VectorXd p = m.lot_prices();
  double gross = 0.0;
  for (Eigen::Index i = 0; i < n.size(); ++i) gross += model.mu(i) * p(i) * n(i);
  const double selling = sell_cost(n, model.mu, m).sum();
  const double eps = residual_cash(n, m);
  return gross / m.capital - selling / (m.capital * m.horizon) + eps * m.risk_free_rate / m.capital;
}

double fitness(const ShareVector& n, const RiskModel& model, const MarketParams& m, double lambda) {
  const Eigen::VectorXd w = implied_weights(n, m);
  return lambda * net_portfolio_return(n, model, m) - (1.0 - lambda) * w.dot(model.sigma * w);
}

IntegerSolution evaluate_shares(const ShareVector& n, const RiskModel& model, const MarketParams& m, double lambda,
                                double weight_threshold) {
  IntegerSolution s;
  s.shares = n;
  s.implied_weights = implied_weights(n, m);
  s.residual = residual_cash(n, m);
  s.expected_return = net_portfolio_return(n, model, m);
  s.risk = std::sqrt(std::max(0.0, s.implied_weights.dot(model.sigma * s.implied_weights)));
  s.fitness = fitness(n, model, m, lambda);
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::string name = idx < model.assets.size() ? model.assets[idx] : std::to_string(i);
    const double rounded = round_to(s.implied_weights(i), 4);
    if (rounded > weight_threshold) s.weight_view.emplace_back(name, rounded);
    if (n(i) > 0) s.share_view.emplace_back(name, n(i));
  }
  return s;
}

}  // namespace portfolio
