#include "portfolio/ga.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>

#include "portfolio/errors.hpp"

namespace portfolio {

int default_population(Eigen::Index n_assets) {
  return std::max(30, static_cast<int>(2 * (n_assets / 2)));
}

std::size_t roulette_select(std::span<const double> fitness, Rng& rng) {
  const std::size_t n = fitness.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "roulette over an empty population");
  const auto [lo_it, hi_it] = std::minmax_element(fitness.begin(), fitness.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));

  const double shift = lo > 0.0 ? 0.0 : lo - (1e-12 * std::abs(lo) + 1e-15);
  double total = 0.0;
  for (double f : fitness) total += f - shift;
  const double r = rng.uniform01() * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += fitness[i] - shift;
    if (r < cumulative) return i;
  }
  return n - 1;
}

CrossoverChildren crossover_continuous(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2, Eigen::Index cut) {
  const auto n = w1.size();
  if (w2.size() != n) throw Error(ErrorCode::InvalidArgument, "crossover parents differ in length");
  if (cut < 1 || cut > n - 1) throw Error(ErrorCode::InvalidArgument, fmt::format("cut {} outside [1, {}]", cut, n - 1));
  CrossoverChildren out;
  out.first.resize(n);
  out.second.resize(n);
  out.first << w1.head(cut), w2.tail(n - cut);
  out.second << w2.head(cut), w1.tail(n - cut);
  const double s1 = out.first.sum();
  const double s2 = out.second.sum();
  out.valid = s1 > 0.0 && s2 > 0.0;
  if (s1 > 0.0) out.first /= s1;
  if (s2 > 0.0) out.second /= s2;
  return out;
}

double mutation_probability(double base, int generation, int generations, double growth) {
  return base + static_cast<double>(generation) / generations * growth;
}

Eigen::VectorXd mutate_continuous(Eigen::VectorXd w, int generation, const GaParams& params, Rng& rng) {
  const double rate = params.base_mutation_rate.value_or(0.2);
  if (rng.uniform01() < mutation_probability(rate, generation, params.generations, 0.5)) {
    const auto gene = rng.uniform_int(0, w.size() - 1);
    w(gene) = rng.uniform(0.0, 2.0);
  }
  return w;
}

double continuous_fitness(const RiskModel& model, const Eigen::VectorXd& w, double lambda) {
  return lambda * w.dot(model.mu) - (1.0 - lambda) * w.dot(model.sigma * w);
}

namespace {

void check_params(const GaParams& params, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorCode::InvalidArgument, fmt::format("lambda {} outside [0, 1]", lambda));
  if (params.generations < 1) throw Error(ErrorCode::InvalidArgument, "generations must be at least 1");
  if (params.population != 0 && (params.population < 2 || params.population % 2 != 0))
    throw Error(ErrorCode::InvalidArgument, fmt::format("population {} must be even and >= 2", params.population));
  if (params.base_mutation_rate && !(*params.base_mutation_rate >= 0.0 && *params.base_mutation_rate <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "mutation rate outside [0, 1]");
}

template <class Individual>
struct Population {
  std::vector<Individual> members;  // ascending fitness
  std::vector<double> fitness;
};

template <class Individual>
void sort_ascending(Population<Individual>& pop) {
  std::vector<std::size_t> order(pop.members.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pop.fitness[a] < pop.fitness[b]; });
  Population<Individual> sorted;
  sorted.members.reserve(order.size());
  sorted.fitness.reserve(order.size());
  for (auto i : order) {
    sorted.members.push_back(std::move(pop.members[i]));
    sorted.fitness.push_back(pop.fitness[i]);
  }
  pop = std::move(sorted);
}

// Parents and children are pooled and the best `size` survive.
template <class Individual>
void elitist_merge(Population<Individual>& parents, Population<Individual> children) {
  const std::size_t size = parents.members.size();
  sort_ascending(children);
  for (std::size_t i = 0; i < children.members.size(); ++i) {
    parents.members.push_back(std::move(children.members[i]));
    parents.fitness.push_back(children.fitness[i]);
  }
  sort_ascending(parents);
  const std::size_t drop = parents.members.size() - size;
  parents.members.erase(parents.members.begin(), parents.members.begin() + static_cast<std::ptrdiff_t>(drop));
  parents.fitness.erase(parents.fitness.begin(), parents.fitness.begin() + static_cast<std::ptrdiff_t>(drop));
}

bool should_stop(const GaParams& params, const std::vector<double>& best, const std::vector<double>& fitness) {
  if (!params.early_stop || static_cast<int>(best.size()) < params.stall_window) return false;
  const double top = best.back();
  const double mean = std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(fitness.size());
  if (std::abs(top - mean) < 0.01 * std::abs(top)) return true;
  return best[best.size() - static_cast<std::size_t>(params.stall_window)] >= top;
}

// Shared generational loop: roulette selection of a full mating pool, pairwise
// breeding, elitist replacement.
template <class Individual, class Breed, class Evaluate>
std::pair<Individual, GaTrace> evolve(Population<Individual> pop, const GaParams& params, Rng& rng, Breed&& breed,
                                      Evaluate&& evaluate) {
  const std::size_t size = pop.members.size();
  sort_ascending(pop);
  GaTrace trace;
  trace.best_fitness_per_generation.reserve(static_cast<std::size_t>(params.generations));
  trace.best_fitness_per_generation.push_back(pop.fitness.back());

  for (int j = 2; j <= params.generations; ++j) {
    if (should_stop(params, trace.best_fitness_per_generation, pop.fitness)) break;
    std::vector<std::size_t> mates(size);
    for (auto& m : mates) m = roulette_select(pop.fitness, rng);

    Population<Individual> children;
    children.members.reserve(size);
    for (std::size_t i = 0; i + 1 < size; i += 2) {
      auto [a, b] = breed(pop.members[mates[i]], pop.members[mates[i + 1]], j);
      children.members.push_back(std::move(a));
      children.members.push_back(std::move(b));
    }
    children.fitness.reserve(size);
    for (const auto& c : children.members) children.fitness.push_back(evaluate(c));

    elitist_merge(pop, std::move(children));
    trace.best_fitness_per_generation.push_back(pop.fitness.back());
  }
  trace.final_population_fitness = pop.fitness;
  return {pop.members.back(), std::move(trace)};
}

int population_size(const GaParams& params, Eigen::Index n_assets) {
  return params.population > 0 ? params.population : default_population(n_assets);
}

// Draws cuts until both children carry mass; parents are returned when no
// cut can work (e.g. disjoint unit vectors with two assets).
std::pair<Eigen::VectorXd, Eigen::VectorXd> breed_continuous(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2,
                                                             Rng& rng) {
  const auto n = w1.size();
  std::vector<Eigen::Index> cuts(static_cast<std::size_t>(n - 1));
  std::iota(cuts.begin(), cuts.end(), Eigen::Index{1});
  while (!cuts.empty()) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cuts.size()) - 1));
    auto children = crossover_continuous(w1, w2, cuts[k]);
    if (children.valid) return {std::move(children.first), std::move(children.second)};
    cuts.erase(cuts.begin() + static_cast<std::ptrdiff_t>(k));
  }
  const double s1 = w1.sum();
  const double s2 = w2.sum();
  Eigen::VectorXd a = s1 > 0.0 ? Eigen::VectorXd(w1 / s1) : Eigen::VectorXd(w2 / s2);
  Eigen::VectorXd b = s2 > 0.0 ? Eigen::VectorXd(w2 / s2) : Eigen::VectorXd(w1 / s1);
  return {std::move(a), std::move(b)};
}

}  // namespace

std::pair<Portfolio, GaTrace> ga_lambda_portfolio(const RiskModel& model, double lambda, const GaParams& params) {
  check_params(params, lambda);
  const auto n = model.num_assets();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty risk model");
  const SparseViewRule view{4, params.report_threshold};

  if (n == 1) {
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
    GaTrace trace;
    const double f = continuous_fitness(model, w, lambda);
    trace.best_fitness_per_generation.assign(static_cast<std::size_t>(params.generations), f);
    trace.final_population_fitness.assign(static_cast<std::size_t>(population_size(params, n)), f);
    return {make_portfolio(model, w, view), std::move(trace)};
  }

  Rng rng(params.seed);
  const int size = population_size(params, n);
  Population<Eigen::VectorXd> pop;
  for (int i = 0; i < size; ++i) {
    Eigen::VectorXd w(n);
    double s = 0.0;
    do {
      for (Eigen::Index k = 0; k < n; ++k) w(k) = rng.uniform01();
      s = w.sum();
    } while (!(s > 0.0));
    pop.members.push_back(w / s);
    pop.fitness.push_back(continuous_fitness(model, pop.members.back(), lambda));
  }

  auto breed = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, int generation) {
    const Eigen::VectorXd mutated = mutate_continuous(a, generation, params, rng);
    return breed_continuous(mutated, b, rng);
  };
  auto evaluate = [&](const Eigen::VectorXd& w) { return continuous_fitness(model, w, lambda); };

  auto [best, trace] = evolve(std::move(pop), params, rng, breed, evaluate);
  return {make_portfolio(model, best, view), std::move(trace)};
}

ShareVector repair_integer(const ShareVector& raw, const MarketParams& market) {
  const auto n = raw.size();
  const Eigen::VectorXd p = market.lot_prices();
  ShareVector out = ShareVector::Zero(n);
  double value = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) value += p(i) * std::max(0, raw(i));
  if (!(value > 0.0)) return out;

  Eigen::VectorXd share(n);
  for (Eigen::Index i = 0; i < n; ++i) share(i) = p(i) * std::max(0, raw(i)) / value;
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < n; ++i)
    if (share(i) > 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return share(a) > share(b); });

  double left = market.capital;
  for (auto i : order) {
    const double unit = p(i) * (1.0 + market.buy_cost_rates(i));
    const double wanted = std::floor(share(i) * market.capital / unit);
    const double affordable = std::floor(std::max(0.0, left) / unit);
    out(i) = static_cast<int>(std::min(wanted, affordable));
    left -= out(i) * unit;
  }
  // Floating-point guard: drop lots from the smallest holdings until the
  // residual identity is nonnegative.
  for (auto it = order.rbegin(); residual_cash(out, market) < 0.0 && it != order.rend();) {
    if (out(*it) > 0)
      --out(*it);
    else
      ++it;
  }
  return out;
}

std::pair<IntegerSolution, GaTrace> ga_lambda_n_portfolio(const RiskModel& model, double lambda,
                                                          const GaParams& params, const MarketParams& market) {
  check_params(params, lambda);
  validate(market);
  const auto n = model.num_assets();
  if (market.num_assets() != n) throw Error(ErrorCode::InvalidArgument, "market and model differ in asset count");

  Rng rng(params.seed);
  const int size = population_size(params, n);
  const Eigen::VectorXd p = market.lot_prices();
  const double mutation_rate = params.base_mutation_rate.value_or(0.3);
  const auto max_lots = static_cast<std::int64_t>(std::floor(market.capital / p.minCoeff()));
  auto evaluate = [&](const ShareVector& s) { return fitness(s, model, market, lambda); };

  Population<ShareVector> pop;
  for (int i = 0; i < size; ++i) {
    ShareVector s = ShareVector::Zero(n);
    double left = market.capital;
    for (auto j : rng.permutation(static_cast<std::size_t>(n))) {
      const auto k = static_cast<Eigen::Index>(j);
      const double unit = p(k) * (1.0 + market.buy_cost_rates(k));
      const auto cap = static_cast<std::int64_t>(std::floor(std::max(0.0, left) / unit));
      s(k) = static_cast<int>(rng.uniform_int(0, cap));
      left = residual_cash(s, market);
    }
    pop.fitness.push_back(evaluate(s));
    pop.members.push_back(std::move(s));
  }

  auto breed = [&](const ShareVector& a, const ShareVector& b, int generation) {
    ShareVector first = a;
    if (rng.uniform01() < mutation_probability(mutation_rate, generation, params.generations, 0.3) && max_lots >= 1) {
      const auto gene = rng.uniform_int(0, n - 1);
      first(gene) = static_cast<int>(rng.uniform_int(1, 2 * max_lots));
    }
    if (n == 1) return std::pair{repair_integer(first, market), repair_integer(b, market)};
    const auto cut = rng.uniform_int(1, n - 1);
    ShareVector c1(n), c2(n);
    c1 << first.head(cut), b.tail(n - cut);
    c2 << b.head(cut), first.tail(n - cut);
    return std::pair{repair_integer(c1, market), repair_integer(c2, market)};
  };

  auto [best, trace] = evolve(std::move(pop), params, rng, breed, evaluate);
  return {evaluate_shares(best, model, market, lambda, params.report_threshold), std::move(trace)};
}

std::vector<FrontierPoint> ga_frontier(const RiskModel& model, const GaParams& params,
                                       const std::optional<MarketParams>& market, int n_points) {
  if (n_points < 2) throw Error(ErrorCode::InvalidArgument, "GA frontier needs at least 2 points");
  std::vector<FrontierPoint> out;
  out.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double lambda = round_to(static_cast<double>(i) / (n_points - 1), 6);
    GaParams point_params = params;
    point_params.seed = derive_seed(params.seed, static_cast<std::uint64_t>(i));
    FrontierPoint fp;
    fp.parameter = lambda;
    if (market) {
      auto [sol, trace] = ga_lambda_n_portfolio(model, lambda, point_params, *market);
      fp.portfolio = make_portfolio(model, sol.implied_weights, SparseViewRule{4, params.report_threshold});
      fp.portfolio.expected_return = sol.expected_return;
      fp.risk = sol.risk;
      fp.expected_return = sol.expected_return;
    } else {
      auto [pf, trace] = ga_lambda_portfolio(model, lambda, point_params);
      fp.risk = pf.risk;
      fp.expected_return = pf.expected_return;
      fp.portfolio = std::move(pf);
    }
    out.push_back(std::move(fp));
  }
  return out;
}

}  // namespace portfolio
