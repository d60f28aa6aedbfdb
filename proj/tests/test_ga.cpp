#include "doctest.h"

#include <array>
#include <cmath>

#include "portfolio/errors.hpp"
#include "portfolio/ga.hpp"
#include "test_support.hpp"

using namespace portfolio;
using Eigen::VectorXd;
using Eigen::VectorXi;

TEST_CASE("roulette selection") {
  Rng rng(1);
  SUBCASE("mass concentration") {
    const std::array<double, 3> f{1.0, 0.0, 0.0};
    for (int k = 0; k < 1000; ++k) CHECK(roulette_select(f, rng) == 0);
  }
  SUBCASE("frequencies") {
    const std::array<double, 2> even{1.0, 1.0};
    const std::array<double, 2> skew{3.0, 1.0};
    int a = 0, b = 0;
    for (int k = 0; k < 10000; ++k) {
      a += roulette_select(even, rng) == 0;
      b += roulette_select(skew, rng) == 0;
    }
    CHECK(std::abs(a / 10000.0 - 0.5) < 0.02);
    CHECK(std::abs(b / 10000.0 - 0.75) < 0.02);
  }
  SUBCASE("negative fitness is shifted") {
    const std::array<double, 3> f{-2.0, -1.0, -3.0};
    std::array<int, 3> counts{};
    for (int k = 0; k < 10000; ++k) ++counts[roulette_select(f, rng)];
    // Shifted weights are about (1, 2, 0).
    CHECK(counts[2] == 0);
    CHECK(std::abs(counts[1] / 10000.0 - 2.0 / 3.0) < 0.02);
  }
  SUBCASE("flat fitness is uniform") {
    const std::array<double, 4> f{-1.0, -1.0, -1.0, -1.0};
    std::array<int, 4> counts{};
    for (int k = 0; k < 10000; ++k) ++counts[roulette_select(f, rng)];
    for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.25) < 0.02);
  }
  CHECK_THROWS_AS(roulette_select(std::span<const double>(), rng), Error);
}

TEST_CASE("continuous crossover") {
  const VectorXd w = Eigen::Vector3d(0.2, 0.3, 0.5);
  const auto same = crossover_continuous(w, w, 1);
  CHECK(same.valid);
  CHECK((same.first - w).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((same.second - w).cwiseAbs().maxCoeff() < 1e-15);

  const auto disjoint = crossover_continuous(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), 1);
  CHECK_FALSE(disjoint.valid);
  CHECK(disjoint.first == Eigen::Vector2d(0.5, 0.5));

  Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    VectorXd a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a(i) = rng.uniform(0.0, 2.0);
      b(i) = rng.uniform(0.0, 2.0);
    }
    const auto c = crossover_continuous(a, b, rng.uniform_int(1, 4));
    CHECK(testing::on_simplex(c.first));
    CHECK(testing::on_simplex(c.second));
  }
  CHECK_THROWS_AS(crossover_continuous(w, w, 0), Error);
  CHECK_THROWS_AS(crossover_continuous(w, w, 3), Error);
}

TEST_CASE("mutation schedule") {
  CHECK(mutation_probability(0.2, 300, 300, 0.5) == doctest::Approx(0.7));
  CHECK(mutation_probability(0.2, 0, 300, 0.5) == 0.2);
  CHECK(mutation_probability(0.3, 150, 300, 0.3) == doctest::Approx(0.45));
  GaParams params;
  params.generations = 10;
  Rng rng(5);
  int changed = 0;
  for (int k = 0; k < 2000; ++k) {
    const VectorXd w = VectorXd::Constant(4, 0.25);
    const VectorXd m = mutate_continuous(w, 10, params, rng);
    CHECK((m.array() >= 0.0).all());
    CHECK((m.array() <= 2.0).all());
    changed += (m - w).cwiseAbs().maxCoeff() > 0.0;
  }
  CHECK(std::abs(changed / 2000.0 - 0.7) < 0.04);
}

TEST_CASE("continuous GA") {
  const auto model = testing::synthetic_model(10, 8);
  GaParams params;
  params.generations = 150;
  params.seed = 42;
  const auto [p, trace] = ga_lambda_portfolio(model, 0.5, params);
  CHECK(testing::on_simplex(p.weights));
  REQUIRE(trace.best_fitness_per_generation.size() == 150);
  for (std::size_t i = 1; i < trace.best_fitness_per_generation.size(); ++i)
    CHECK(trace.best_fitness_per_generation[i] >= trace.best_fitness_per_generation[i - 1]);
  CHECK(trace.best_fitness_per_generation.back() == continuous_fitness(model, p.weights, 0.5));
  CHECK(trace.final_population_fitness.size() == 30);
  for (const auto& [name, w] : p.sparse_view) CHECK(w > 0.005);

  const auto again = ga_lambda_portfolio(model, 0.5, params);
  CHECK(again.first.weights == p.weights);
  CHECK(again.second.best_fitness_per_generation == trace.best_fitness_per_generation);

  params.seed = 43;
  CHECK(ga_lambda_portfolio(model, 0.5, params).second.best_fitness_per_generation !=
        trace.best_fitness_per_generation);

  SUBCASE("single asset") {
    const auto one = testing::synthetic_model(1, 1);
    CHECK(ga_lambda_portfolio(one, 0.3, params).first.weights(0) == 1.0);
  }
  SUBCASE("early stop") {
    GaParams early = params;
    early.generations = 500;
    early.early_stop = true;
    const auto run = ga_lambda_portfolio(model, 0.5, early).second;
    CHECK(run.best_fitness_per_generation.size() >= 30);
    CHECK(run.best_fitness_per_generation.size() < 500);
  }
  SUBCASE("invalid parameters") {
    GaParams bad = params;
    bad.population = 7;
    CHECK_THROWS_AS(ga_lambda_portfolio(model, 0.5, bad), Error);
    CHECK_THROWS_AS(ga_lambda_portfolio(model, 1.2, params), Error);
  }
}

TEST_CASE("continuous GA against the QP optimum") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto model = testing::synthetic_model(100 + seed, 10);
    GaParams params;
    params.generations = 300;
    params.seed = seed;
    const auto [p, trace] = ga_lambda_portfolio(model, 0.5, params);
    const auto qp = lambda_portfolio(model, 0.5);
    const double best = continuous_fitness(model, qp.weights, 0.5);
    const double got = continuous_fitness(model, p.weights, 0.5);
    CHECK(got <= best + 1e-12);
    CHECK((best - got) / std::abs(best) <= 0.02);
  }
}

TEST_CASE("repair") {
  const auto market = make_market(1000.0, Eigen::Vector3d(10.0, 25.0, 40.0), 0.01, 0.01, 0.0, 251);
  CHECK(repair_integer(VectorXi::Zero(3), market) == VectorXi::Zero(3));

  const VectorXi greedy = Eigen::Vector3i(100, 40, 25);  // about 3K of value
  const auto fixed = repair_integer(greedy, market);
  CHECK(residual_cash(fixed, market) >= 0.0);
  CHECK((fixed.array() >= 0).all());

  const VectorXi doubled = Eigen::Vector3i(66, 26, 16) * 2;
  CHECK(residual_cash(repair_integer(doubled, market), market) >= 0.0);

  // Feasible vectors whose floors reproduce themselves are fixed points.
  const VectorXi feasible = Eigen::Vector3i(33, 13, 8);
  CHECK(repair_integer(feasible, market) == repair_integer(repair_integer(feasible, market), market));

  Rng rng(9);
  for (int k = 0; k < 500; ++k) {
    VectorXi raw(3);
    for (int i = 0; i < 3; ++i) raw(i) = static_cast<int>(rng.uniform_int(0, 500));
    const auto r = repair_integer(raw, market);
    CHECK(is_feasible(r, market));
  }
}

TEST_CASE("integer GA") {
  const auto model = testing::synthetic_model(20, 4);
  const auto market = make_market(2000.0, Eigen::Vector4d(12.0, 30.0, 55.0, 8.0), 0.01, 0.01, 0.0002, 251);
  GaParams params;
  params.generations = 200;
  params.seed = 11;
  const auto [sol, trace] = ga_lambda_n_portfolio(model, 0.5, params, market);
  CHECK(sol.residual >= 0.0);
  CHECK(sol.fitness == fitness(sol.shares, model, market, 0.5));
  for (std::size_t i = 1; i < trace.best_fitness_per_generation.size(); ++i)
    CHECK(trace.best_fitness_per_generation[i] >= trace.best_fitness_per_generation[i - 1]);
  const auto again = ga_lambda_n_portfolio(model, 0.5, params, market);
  CHECK(again.first.shares == sol.shares);
  CHECK(again.second.best_fitness_per_generation == trace.best_fitness_per_generation);

  SUBCASE("small instance reaches the enumerated optimum") {
    const auto small = testing::synthetic_model(21, 3);
    const auto tiny = make_market(60.0, Eigen::Vector3d(3.0, 5.0, 7.0), 0.0, 0.0, 0.0, 251);
    double best = -1e300;
    for (const auto& n : testing::enumerate_feasible(tiny)) best = std::max(best, fitness(n, small, tiny, 0.5));
    GaParams p2;
    p2.generations = 300;
    p2.seed = 3;
    CHECK(ga_lambda_n_portfolio(small, 0.5, p2, tiny).first.fitness == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("GA frontier") {
  const auto model = testing::synthetic_model(30, 5);
  GaParams params;
  params.generations = 100;
  params.seed = 7;
  const auto f = ga_frontier(model, params, std::nullopt, 5);
  REQUIRE(f.size() == 5);
  CHECK(f.front().parameter == 0.0);
  CHECK(f.back().parameter == 1.0);
  const auto point2 = [&] {
    GaParams p = params;
    p.seed = derive_seed(params.seed, 2);
    return ga_lambda_portfolio(model, 0.5, p).first;
  }();
  CHECK(f[2].portfolio.weights == point2.weights);

  SUBCASE("cost ladder lowers the best return") {
    double prev = 1e300;
    for (double c : {0.01, 0.05, 0.1}) {
      const auto market = make_market(10000.0, VectorXd::LinSpaced(5, 10.0, 50.0), c, c, 0.0002, 251);
      const auto pts = ga_frontier(model, params, market, 3);
      double top = -1e300;
      for (const auto& p : pts) top = std::max(top, p.expected_return);
      CHECK(top < prev);
      prev = top;
    }
  }
}
