// portfolio_cli: batch front end for the portfolio library.
//
//   portfolio_cli stats    --prices in.csv [--risk svar]
//   portfolio_cli optimize --prices in.csv [--target-return b | --lambda l] [--ga] [--capital K ...]
//   portfolio_cli frontier --prices in.csv [--points n] [--cloud n] [--two-asset A,B] [--ga] [--cost-ladder c,..]
//   portfolio_cli fit      --prices in.csv --prices-eval out.csv
//
// Settings can also come from a TOML/INI file (--config, or PORTFOLIO_CONFIG);
// command-line flags win over the file.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "portfolio/errors.hpp"
#include "portfolio/frontier.hpp"
#include "portfolio/ga.hpp"
#include "portfolio/io.hpp"
#include "portfolio/market_data.hpp"
#include "portfolio/market_model.hpp"
#include "portfolio/mv_optimizer.hpp"
#include "portfolio/risk_models.hpp"

namespace {

using namespace portfolio;
using io::json;

enum Exit { kOk = 0, kUsage = 1, kIngestion = 2, kInfeasible = 3, kAlignment = 4 };

struct Settings {
  std::string prices;
  std::string prices_eval;
  std::string risk = "var";
  double threshold_b = 0.0;
  std::optional<double> target_return;
  std::optional<double> lambda;
  bool ga = false;
  int generations = 500;
  int population = 0;
  std::optional<double> mutation_rate;
  std::uint64_t seed = 1;
  bool early_stop = false;
  std::optional<double> capital;
  std::vector<double> buy_cost{0.0};
  std::vector<double> sell_cost{0.0};
  double risk_free = 0.0;
  int horizon = 1;
  std::vector<int> lot_size{1};
  int cloud = 0;
  int points = 40;
  std::vector<std::string> two_asset;
  std::vector<double> cost_ladder;
  bool lambda_sweep = false;
  std::string out;
  std::string format = "csv";
  char delimiter = ',';
  bool iso_dates = false;
  int periods_per_year = 251;
  int evaluation_periods = 250;
};

// Machine output goes to files under --out, or to stdout when --out is absent.
class Sink {
 public:
  explicit Sink(std::string dir) : dir_(std::move(dir)) {}
  void emit(const std::string& name, const std::string& text) {
    if (dir_.empty()) {
      if (count_++ > 0) std::cout << "\n";
      if (!single_) std::cout << "# " << name << "\n";
      std::cout << text;
    } else {
      io::write_text_file(std::filesystem::path(dir_) / name, text);
      std::cerr << "wrote " << (std::filesystem::path(dir_) / name).string() << "\n";
    }
  }
  void expect_single(bool single) { single_ = single; }
  bool to_files() const { return !dir_.empty(); }

 private:
  std::string dir_;
  int count_ = 0;
  bool single_ = true;
};

// Human-readable notes go to stderr so stdout stays machine-readable.
template <class... Args>
void note(fmt::format_string<Args...> f, Args&&... args) {
  std::cerr << fmt::format(f, std::forward<Args>(args)...) << "\n";
}

CsvFormat csv_format(const Settings& s) {
  CsvFormat f;
  f.delimiter = s.delimiter;
  f.iso_dates = s.iso_dates;
  return f;
}

RiskModel load_model(const Settings& s, const PriceTable& prices) {
  AnnualizationConvention conv{s.periods_per_year, s.evaluation_periods};
  return build_risk_model(assets_return(prices), parse_risk_kind(s.risk), s.threshold_b, conv);
}

PriceTable require_prices(const Settings& s) {
  if (s.prices.empty()) throw Error(ErrorCode::InvalidArgument, "--prices is required");
  return load_prices(s.prices, csv_format(s));
}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, 1> per_asset(const std::vector<T>& v, Eigen::Index n, const char* flag) {
  Eigen::Matrix<T, Eigen::Dynamic, 1> out(n);
  if (v.size() == 1) {
    out.setConstant(v[0]);
  } else if (static_cast<Eigen::Index>(v.size()) == n) {
    for (Eigen::Index i = 0; i < n; ++i) out(i) = v[static_cast<std::size_t>(i)];
  } else {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("{} takes 1 or {} values, got {}", flag, static_cast<long>(n), v.size()));
  }
  return out;
}

// Current prices: first row of the evaluation file, else the last in-sample row.
MarketParams build_market(const Settings& s, const PriceTable& in_sample) {
  Eigen::VectorXd current = in_sample.values.row(in_sample.periods() - 1).transpose();
  if (!s.prices_eval.empty()) {
    const PriceTable eval = load_prices(s.prices_eval, csv_format(s));
    if (eval.assets != in_sample.assets)
      throw Error(ErrorCode::AssetAlignment, "evaluation price file has different asset columns");
    current = eval.values.row(0).transpose();
  }
  const auto n = in_sample.num_assets();
  MarketParams m;
  m.capital = *s.capital;
  m.prices = current;
  m.buy_cost_rates = per_asset(s.buy_cost, n, "--buy-cost");
  m.sell_cost_rates = per_asset(s.sell_cost, n, "--sell-cost");
  m.risk_free_rate = s.risk_free;
  m.horizon = s.horizon;
  m.lot_sizes = per_asset(s.lot_size, n, "--lot-size");
  for (const auto& w : validate(m)) note("warning: {}", w);
  return m;
}

GaParams ga_params(const Settings& s) {
  GaParams p;
  p.generations = s.generations;
  p.population = s.population;
  p.base_mutation_rate = s.mutation_rate;
  p.seed = s.seed;
  p.early_stop = s.early_stop;
  return p;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string weights_csv(const std::vector<std::string>& assets, const Eigen::VectorXd& w) {
  std::string out = "asset,weight\n";
  for (std::size_t i = 0; i < assets.size(); ++i)
    out += fmt::format("{},{:.17g}\n", assets[i], w(static_cast<Eigen::Index>(i)));
  return out;
}

std::string trace_csv(const GaTrace& t) {
  std::ostringstream os;
  io::write_trace_csv(os, t);
  return os.str();
}

int cmd_stats(const Settings& s, Sink& sink) {
  const auto prices = require_prices(s);
  const auto model = load_model(s, prices);
  const auto n = model.num_assets();
  const char* risk_name = model.kind == RiskKind::Variance ? "std_dev" : "semi_dev";
  Eigen::Index top = 0;
  model.mu.maxCoeff(&top);
  note("{} assets, {} return periods, {} risk parameters; highest mean {} ({:.6f})", n, model.observations,
       model.parameter_count(), model.assets[static_cast<std::size_t>(top)], model.mu(top));
  if (s.format == "json") {
    json table = json::array();
    for (Eigen::Index i = 0; i < n; ++i)
      table.push_back({{"asset", model.assets[static_cast<std::size_t>(i)]},
                       {"mean", model.mu(i)},
                       {risk_name, std::sqrt(model.sigma(i, i))}});
    sink.emit("stats.json", dump({{"dispersion", table}, {"model", io::to_json(model)}}));
  } else {
    std::string out = fmt::format("asset,mean,{}\n", risk_name);
    for (Eigen::Index i = 0; i < n; ++i)
      out += fmt::format("{},{:.17g},{:.17g}\n", model.assets[static_cast<std::size_t>(i)], model.mu(i),
                         std::sqrt(model.sigma(i, i)));
    sink.emit("stats.csv", out);
  }
  return kOk;
}

void summarize(const Portfolio& p, const AnnualizationConvention& c) {
  note("expected return {:.6f} per period ({:.6f} annual = x{}), risk {:.6f} ({:.6f} annual = x sqrt({}))",
       p.expected_return, p.expected_return * c.daily_to_annual_expectation, c.daily_to_annual_expectation, p.risk,
       p.risk * std::sqrt(static_cast<double>(c.daily_to_annual_expectation)), c.daily_to_annual_expectation);
  for (const auto& [name, w] : p.sparse_view) note("  {:<10} {:.4f}", name, w);
}

int cmd_optimize(const Settings& s, Sink& sink) {
  const auto prices = require_prices(s);
  const auto model = load_model(s, prices);
  if (s.target_return && s.lambda)
    throw Error(ErrorCode::InvalidArgument, "--target-return and --lambda are mutually exclusive");

  if (s.capital) {
    if (s.target_return) throw Error(ErrorCode::InvalidArgument, "the integer model takes --lambda, not a target");
    const MarketParams market = build_market(s, prices);
    const double lambda = s.lambda.value_or(0.5);
    auto [sol, trace] = ga_lambda_n_portfolio(model, lambda, ga_params(s), market);
    note("integer GA, lambda {}: fitness {:.9f}, net return {:.9f}, residual cash {:.4f}", lambda, sol.fitness,
         sol.expected_return, sol.residual);
    for (const auto& [name, k] : sol.share_view) note("  {:<10} {} lots", name, k);
    sink.expect_single(false);
    if (s.format == "json") {
      sink.emit("solution.json", dump(io::to_json(sol, model.assets, market, model.convention)));
    } else {
      std::string out = "asset,lots,lot_size,price,weight\n";
      for (std::size_t i = 0; i < model.assets.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out += fmt::format("{},{},{},{:.17g},{:.17g}\n", model.assets[i], sol.shares(k), market.lot_sizes(k),
                           market.prices(k), sol.implied_weights(k));
      }
      out += fmt::format("residual_cash,{:.17g}\nfitness,{:.17g}\nexpected_return,{:.17g}\nrisk,{:.17g}\n",
                         sol.residual, sol.fitness, sol.expected_return, sol.risk);
      sink.emit("solution.csv", out);
    }
    sink.emit("trace.csv", trace_csv(trace));
    return kOk;
  }

  Portfolio p;
  std::optional<GaTrace> trace;
  if (s.ga) {
    auto [pf, tr] = ga_lambda_portfolio(model, s.lambda.value_or(0.5), ga_params(s));
    p = std::move(pf);
    trace = std::move(tr);
  } else if (s.lambda) {
    p = lambda_portfolio(model, *s.lambda);
  } else {
    ObjectiveParams params;
    params.target_return = s.target_return;
    p = markowitz_portfolio(model, params);
  }
  summarize(p, model.convention);
  sink.expect_single(!trace);
  if (s.format == "json")
    sink.emit("portfolio.json", dump(io::to_json(p, model.convention)));
  else
    sink.emit("portfolio.csv", weights_csv(model.assets, p.weights));
  if (trace) sink.emit("trace.csv", trace_csv(*trace));
  return kOk;
}

std::string frontier_text(const std::vector<FrontierPoint>& pts, const Settings& s) {
  if (s.format == "json") {
    json arr = json::array();
    for (const auto& p : pts) {
      json w = json::array();
      for (Eigen::Index i = 0; i < p.portfolio.weights.size(); ++i) w.push_back(p.portfolio.weights(i));
      arr.push_back({{"parameter", p.parameter}, {"risk", p.risk}, {"return", p.expected_return}, {"weights", w}});
    }
    return dump(arr);
  }
  std::ostringstream os;
  io::write_frontier_csv(os, pts);
  return os.str();
}

int cmd_frontier(const Settings& s, Sink& sink) {
  const auto prices = require_prices(s);
  const auto model = load_model(s, prices);
  const std::string ext = s.format == "json" ? "json" : "csv";
  sink.expect_single(s.cloud == 0 && s.two_asset.empty() && s.cost_ladder.empty());

  if (!s.cost_ladder.empty()) {
    if (!s.capital) throw Error(ErrorCode::InvalidArgument, "--cost-ladder needs --capital");
    sink.expect_single(false);
    for (double c : s.cost_ladder) {
      Settings level = s;
      level.buy_cost = {c};
      level.sell_cost = {c};
      const auto pts = ga_frontier(model, ga_params(s), build_market(level, prices), s.points);
      double top = pts.front().expected_return;
      for (const auto& p : pts) top = std::max(top, p.expected_return);
      note("cost {}: max frontier return {:.6f}", c, top);
      sink.emit(fmt::format("frontier_cost_{}.{}", c, ext), frontier_text(pts, s));
    }
  } else if (s.ga || s.capital) {
    std::optional<MarketParams> market;
    if (s.capital) market = build_market(s, prices);
    sink.emit("frontier." + ext, frontier_text(ga_frontier(model, ga_params(s), market, s.points), s));
  } else if (s.lambda_sweep) {
    sink.emit("frontier." + ext, frontier_text(lambda_frontier(model, s.points), s));
  } else {
    sink.emit("frontier." + ext, frontier_text(efficient_frontier(model, s.points), s));
  }

  if (s.cloud > 0) {
    std::ostringstream os;
    io::write_cloud_csv(os, random_portfolio_cloud(model, s.cloud, s.seed));
    sink.emit("cloud.csv", os.str());
  }
  if (!s.two_asset.empty()) {
    if (s.two_asset.size() != 2) throw Error(ErrorCode::InvalidArgument, "--two-asset takes exactly two names");
    Eigen::Index idx[2];
    for (int k = 0; k < 2; ++k) {
      const auto it = std::find(model.assets.begin(), model.assets.end(), s.two_asset[static_cast<std::size_t>(k)]);
      if (it == model.assets.end())
        throw Error(ErrorCode::InvalidArgument, fmt::format("unknown asset '{}'", s.two_asset[static_cast<std::size_t>(k)]));
      idx[k] = it - model.assets.begin();
    }
    const Eigen::Vector2d mu(model.mu(idx[0]), model.mu(idx[1]));
    Eigen::Matrix2d sig;
    sig << model.sigma(idx[0], idx[0]), model.sigma(idx[0], idx[1]), model.sigma(idx[1], idx[0]),
        model.sigma(idx[1], idx[1]);
    const TwoAssetParams sample = two_asset_params(mu, sig);
    std::string out = "rho,weight_a,risk,return\n";
    std::vector<double> rhos{-1.0, -0.5, 0.0, 0.5, 1.0, sample.rho};
    for (double rho : rhos) {
      TwoAssetParams p = sample;
      p.rho = rho;
      for (const auto& c : two_asset_curve(p))
        out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", rho, c.weight_a, c.risk, c.expected_return);
    }
    sink.emit("two_asset.csv", out);
  }
  return kOk;
}

int cmd_fit(const Settings& s, Sink& sink) {
  const auto prices = require_prices(s);
  if (s.prices_eval.empty()) throw Error(ErrorCode::InvalidArgument, "fit needs --prices-eval");
  const auto model = load_model(s, prices);
  const auto eval = load_prices(s.prices_eval, csv_format(s));
  const auto report = frontier_fit(model, assets_return(eval), s.points);
  note("mean error {:.8f} per period, {:.8f} annual", report.mean_error, report.annual_mean_error);
  note("mean underestimation error {:.8f} per period, {:.8f} annual", report.mean_underestimation_error,
       report.annual_underestimation_error);
  if (s.format == "json") {
    json doc = io::to_json(report);
    json pairs = json::array();
    for (const auto& p : report.pairs)
      pairs.push_back({{"target", p.target}, {"expected", p.expected}, {"realized", p.realized}});
    doc["pairs"] = std::move(pairs);
    sink.emit("fit.json", dump(doc));
  } else {
    sink.expect_single(false);
    std::ostringstream os;
    io::write_fit_csv(os, report);
    sink.emit("fit.csv", os.str());
    sink.emit("fit_summary.csv",
              fmt::format("metric,daily,annual\nmean_error,{:.17g},{:.17g}\nmean_underestimation_error,{:.17g},{:.17g}\n",
                          report.mean_error, report.annual_mean_error, report.mean_underestimation_error,
                          report.annual_underestimation_error));
  }
  return kOk;
}

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return kUsage;
    case ErrorClass::Ingestion: return kIngestion;
    case ErrorClass::Infeasible: return kInfeasible;
    case ErrorClass::Alignment: return kAlignment;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-variance / mean-semivariance portfolio selection"};
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "Settings file (TOML or INI); flags override it")->envname("PORTFOLIO_CONFIG");

  Settings s;
  app.add_option("--prices", s.prices, "In-sample price file");
  app.add_option("--prices-eval", s.prices_eval, "Out-of-sample price file (first row = current prices)");
  app.add_option("--risk", s.risk, "Risk measure")->check(CLI::IsMember({"var", "svar", "variance", "semivariance"}));
  app.add_option("--threshold-b", s.threshold_b, "Semivariance threshold B");
  app.add_option("--target-return", s.target_return, "Required per-period expected return");
  app.add_option("--lambda", s.lambda, "Risk/return trade-off in [0, 1]")->check(CLI::Range(0.0, 1.0));
  app.add_flag("--ga", s.ga, "Use the genetic algorithm");
  app.add_option("--generations", s.generations, "GA generations")->check(CLI::PositiveNumber);
  app.add_option("--population", s.population, "GA population (even; 0 = default)")->check(CLI::NonNegativeNumber);
  app.add_option("--mutation-rate", s.mutation_rate, "GA base mutation probability")->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", s.seed, "Random seed");
  app.add_flag("--early-stop", s.early_stop, "Stop the GA on convergence");
  app.add_option("--capital", s.capital, "Capital K; enables the integer-share model")->check(CLI::PositiveNumber);
  app.add_option("--buy-cost", s.buy_cost, "Buy cost rate(s)")->delimiter(',');
  app.add_option("--sell-cost", s.sell_cost, "Sell cost rate(s)")->delimiter(',');
  app.add_option("--risk-free", s.risk_free, "Per-period risk-free rate on residual cash");
  app.add_option("--horizon", s.horizon, "Holding horizon in periods")->check(CLI::PositiveNumber);
  app.add_option("--lot-size", s.lot_size, "Shares per lot")->delimiter(',');
  app.add_option("--cloud", s.cloud, "Random portfolios to sample")->check(CLI::NonNegativeNumber);
  app.add_option("--points", s.points, "Frontier points")->check(CLI::Range(2, 100000));
  app.add_option("--two-asset", s.two_asset, "Two asset names for the curve family")->delimiter(',');
  app.add_option("--cost-ladder", s.cost_ladder, "GA frontier per cost rate")->delimiter(',');
  app.add_flag("--lambda-sweep", s.lambda_sweep, "Trace the frontier by lambda instead of target return");
  app.add_option("--out", s.out, "Output directory (stdout when absent)");
  app.add_option("--format", s.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--delimiter", s.delimiter, "Price file field separator");
  app.add_flag("--iso-dates", s.iso_dates, "Require increasing YYYY-MM-DD dates");
  app.add_option("--periods-per-year", s.periods_per_year, "Annualization count for expectations")
      ->check(CLI::PositiveNumber);
  app.add_option("--evaluation-periods", s.evaluation_periods, "Annualization count for realized returns")
      ->check(CLI::PositiveNumber);

  auto* stats = app.add_subcommand("stats", "Per-asset mean and risk");
  auto* optimize = app.add_subcommand("optimize", "Single portfolio");
  auto* frontier = app.add_subcommand("frontier", "Frontier, random cloud, two-asset curves");
  auto* fit = app.add_subcommand("fit", "Out-of-sample frontier fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  Sink sink(s.out);
  try {
    if (stats->parsed()) return cmd_stats(s, sink);
    if (optimize->parsed()) return cmd_optimize(s, sink);
    if (frontier->parsed()) return cmd_frontier(s, sink);
    if (fit->parsed()) return cmd_fit(s, sink);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
