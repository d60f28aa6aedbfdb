#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "portfolio/risk_models.hpp"

namespace portfolio {

/// Integer-share market: capital, current prices, proportional costs,
/// risk-free residual cash, horizon, and lot sizes.
struct MarketParams {
  double capital = 0.0;              // K
  Eigen::VectorXd prices;            // per share, current
  Eigen::VectorXd buy_cost_rates;    // c_b
  Eigen::VectorXd sell_cost_rates;   // c_s
  double risk_free_rate = 0.0;       // per period
  int horizon = 1;                   // T, periods until the holdings are sold
  Eigen::VectorXi lot_sizes;         // shares per lot

  Eigen::Index num_assets() const { return prices.size(); }
  /// Price of one tradable lot, p_i * L_i.
  Eigen::VectorXd lot_prices() const;
};

/// Broadcasts scalar cost rates / lot size over `prices`.
MarketParams make_market(double capital, Eigen::VectorXd prices, double buy_cost, double sell_cost,
                         double risk_free_rate, int horizon, int lot_size = 1);

/// Throws Error{InvalidArgument} on broken invariants. Returns warnings
/// (e.g. capital below the cheapest lot) for the caller to report.
std::vector<std::string> validate(const MarketParams& market);

using ShareVector = Eigen::VectorXi;  // counts in lot units

struct IntegerSolution {
  ShareVector shares;
  Eigen::VectorXd implied_weights;  // n_i p_i / K
  double residual = 0.0;            // epsilon, uninvested cash
  double expected_return = 0.0;     // net per-period return
  double risk = 0.0;                // sqrt(w' Sigma w)
  double fitness = 0.0;
  std::vector<std::pair<std::string, double>> weight_view;
  std::vector<std::pair<std::string, int>> share_view;
};

/// C_b,i = n_i p_i c_b,i
Eigen::VectorXd buy_cost(const ShareVector& n, const MarketParams& market);

/// C_s,i = n_i (p_i + T mu_i p_i) c_s,i, charged on the expected end-of-horizon value.
Eigen::VectorXd sell_cost(const ShareVector& n, const Eigen::VectorXd& mu, const MarketParams& market);

/// epsilon = K - sum(n_i p_i + C_b,i)
double residual_cash(const ShareVector& n, const MarketParams& market);

bool is_feasible(const ShareVector& n, const MarketParams& market);

Eigen::VectorXd implied_weights(const ShareVector& n, const MarketParams& market);

/// R_p = sum(mu_i p_i n_i)/K - sum(C_s,i)/(K T) + epsilon R_f / K
double net_portfolio_return(const ShareVector& n, const RiskModel& model, const MarketParams& market);

/// lambda R_p - (1 - lambda) w'Sigma w
double fitness(const ShareVector& n, const RiskModel& model, const MarketParams& market, double lambda);

/// Full evaluation of a share vector, with named views (weights above
/// `weight_threshold` after 4-decimal rounding, counts above zero).
IntegerSolution evaluate_shares(const ShareVector& n, const RiskModel& model, const MarketParams& market,
                                double lambda, double weight_threshold = 0.005);

}  // namespace portfolio
