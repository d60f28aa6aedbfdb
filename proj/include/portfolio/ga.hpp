#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "portfolio/frontier.hpp"
#include "portfolio/market_model.hpp"
#include "portfolio/mv_optimizer.hpp"
#include "portfolio/rng.hpp"

namespace portfolio {

struct GaParams {
  int generations = 500;
  /// Base mutation probability; unset selects 0.2 (weights) or 0.3 (shares).
  std::optional<double> base_mutation_rate;
  /// Even population size; 0 selects default_population(N).
  int population = 0;
  std::uint64_t seed = 1;
  double report_threshold = 0.005;
  /// Stop once the population mean is within 1% of the best, or the best has
  /// not improved for `stall_window` generations (never before that many).
  bool early_stop = false;
  int stall_window = 30;
};

struct GaTrace {
  std::vector<double> best_fitness_per_generation;
  std::vector<double> final_population_fitness;  // ascending
};

/// max(30, 2 * floor(n_assets / 2))
int default_population(Eigen::Index n_assets);

/// Fitness-proportional draw by inverting the cumulative sum with one uniform
/// variate. Fitness with a non-positive minimum is shifted by
/// (min - delta), delta = 1e-12 |min| + 1e-15; a flat vector is drawn uniformly.
std::size_t roulette_select(std::span<const double> fitness, Rng& rng);

struct CrossoverChildren {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
  bool valid = false;  // false when a child has no mass to renormalize
};

/// Exchanges the first `cut` genes (1 <= cut <= N-1) and renormalizes each
/// child onto the simplex.
CrossoverChildren crossover_continuous(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2, Eigen::Index cut);

/// Mutation probability at generation j of m: base + (j/m) * growth.
double mutation_probability(double base, int generation, int generations, double growth);

/// With probability base + (j/m) * 0.5, replaces one uniformly chosen gene
/// with a uniform draw on [0, 2]. The result is not renormalized.
Eigen::VectorXd mutate_continuous(Eigen::VectorXd w, int generation, const GaParams& params, Rng& rng);

/// lambda w'mu - (1 - lambda) w'Sigma w
double continuous_fitness(const RiskModel& model, const Eigen::VectorXd& w, double lambda);

/// Elitist GA over simplex weights for max lambda E(R) - (1-lambda) w'Sigma w.
std::pair<Portfolio, GaTrace> ga_lambda_portfolio(const RiskModel& model, double lambda, const GaParams& params);

/// Projects a share vector onto the budget while keeping its value
/// proportions: assets are visited by decreasing proportion (ascending index
/// on ties) and each gets floor(prop * K / (lot price * (1 + c_b))) lots,
/// capped by the capital still unspent. The result always has epsilon >= 0.
ShareVector repair_integer(const ShareVector& raw, const MarketParams& market);

/// Elitist GA over integer lot counts with costs, lots, and risk-free cash.
std::pair<IntegerSolution, GaTrace> ga_lambda_n_portfolio(const RiskModel& model, double lambda, const GaParams& params,
                                                          const MarketParams& market);

/// lambda swept evenly over [0, 1]; point i runs with seed derive_seed(params.seed, i).
/// With a market the integer binding is used; each point's expected return
/// is then the net return R_p.
std::vector<FrontierPoint> ga_frontier(const RiskModel& model, const GaParams& params,
                                       const std::optional<MarketParams>& market = std::nullopt, int n_points = 40);

}  // namespace portfolio
