#include "portfolio/io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "portfolio/errors.hpp"

namespace portfolio::io {
namespace {

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
  return v;
}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, 1> broadcast(const json& doc, const char* key, T fallback, Eigen::Index n) {
  Eigen::Matrix<T, Eigen::Dynamic, 1> out(n);
  if (!doc.contains(key)) {
    out.setConstant(fallback);
  } else if (doc.at(key).is_array()) {
    const auto& a = doc.at(key);
    if (static_cast<Eigen::Index>(a.size()) != n)
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("'{}' has {} entries, expected {}", key, a.size(), static_cast<long>(n)));
    for (std::size_t i = 0; i < a.size(); ++i) out(static_cast<Eigen::Index>(i)) = a[i].get<T>();
  } else {
    out.setConstant(doc.at(key).get<T>());
  }
  return out;
}

}  // namespace

std::string full(double v) { return fmt::format("{}", v); }

json to_json(const RiskModel& m) {
  json doc;
  doc["type"] = "risk_model";
  doc["assets"] = m.assets;
  doc["kind"] = to_string(m.kind);
  doc["threshold_b"] = m.threshold_b;
  doc["observations"] = m.observations;
  doc["periods_per_year"] = m.convention.daily_to_annual_expectation;
  doc["evaluation_periods"] = m.convention.evaluation_periods;
  doc["mu"] = vector_json(m.mu);
  json sigma = json::array();
  for (Eigen::Index i = 0; i < m.sigma.rows(); ++i)
    for (Eigen::Index j = 0; j < m.sigma.cols(); ++j) sigma.push_back(m.sigma(i, j));
  doc["sigma_row_major"] = std::move(sigma);
  return doc;
}

RiskModel risk_model_from_json(const json& doc) {
  try {
    RiskModel m;
    m.assets = doc.at("assets").get<std::vector<std::string>>();
    m.kind = parse_risk_kind(doc.at("kind").get<std::string>());
    m.threshold_b = doc.value("threshold_b", 0.0);
    m.observations = doc.value("observations", 0);
    m.convention.daily_to_annual_expectation = doc.value("periods_per_year", 251);
    m.convention.evaluation_periods = doc.value("evaluation_periods", 250);
    m.mu = vector_from(doc.at("mu"));
    const auto n = m.mu.size();
    const Eigen::VectorXd flat = vector_from(doc.at("sigma_row_major"));
    if (flat.size() != n * n || static_cast<Eigen::Index>(m.assets.size()) != n)
      throw Error(ErrorCode::ParseError, "risk model dimensions are inconsistent");
    m.sigma.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m.sigma(i, j) = flat(i * n + j);
    m.sigma = symmetrize(m.sigma);
    if (!is_psd(m.sigma)) throw Error(ErrorCode::NumericalBreakdown, "stored risk matrix is not PSD");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("malformed risk model document: {}", e.what()));
  }
}

json to_json(const Portfolio& p, const AnnualizationConvention& c) {
  json doc;
  doc["type"] = "portfolio";
  doc["risk_kind"] = to_string(p.kind);
  doc["assets"] = p.assets;
  doc["weights"] = vector_json(p.weights);
  doc["expected_return"] = {{"daily", p.expected_return},
                            {"annual", p.expected_return * c.daily_to_annual_expectation},
                            {"periods_per_year", c.daily_to_annual_expectation}};
  doc["risk"] = {{"daily", p.risk},
                 {"annual_sqrt_periods", p.risk * std::sqrt(static_cast<double>(c.daily_to_annual_expectation))}};
  json view = json::array();
  for (const auto& [name, w] : p.sparse_view) view.push_back({{"asset", name}, {"weight", w}});
  doc["portfolio"] = std::move(view);
  return doc;
}

json to_json(const IntegerSolution& s, const std::vector<std::string>& assets, const MarketParams& market,
             const AnnualizationConvention& c) {
  json doc;
  doc["type"] = "integer_solution";
  doc["assets"] = assets;
  json shares = json::array();
  for (Eigen::Index i = 0; i < s.shares.size(); ++i) shares.push_back(s.shares(i));
  doc["lots"] = std::move(shares);
  json lot_sizes = json::array();
  for (Eigen::Index i = 0; i < market.lot_sizes.size(); ++i) lot_sizes.push_back(market.lot_sizes(i));
  doc["lot_sizes"] = std::move(lot_sizes);
  doc["implied_weights"] = vector_json(s.implied_weights);
  doc["residual_cash"] = s.residual;
  doc["capital"] = market.capital;
  doc["fitness"] = s.fitness;
  doc["expected_return"] = {{"daily", s.expected_return},
                            {"annual", s.expected_return * c.daily_to_annual_expectation},
                            {"periods_per_year", c.daily_to_annual_expectation}};
  doc["risk"] = {{"daily", s.risk},
                 {"annual_sqrt_periods", s.risk * std::sqrt(static_cast<double>(c.daily_to_annual_expectation))}};
  json wv = json::array();
  for (const auto& [name, w] : s.weight_view) wv.push_back({{"asset", name}, {"weight", w}});
  doc["portfolio"] = std::move(wv);
  json nv = json::array();
  for (const auto& [name, k] : s.share_view) nv.push_back({{"asset", name}, {"lots", k}});
  doc["lot_portfolio"] = std::move(nv);
  return doc;
}

json to_json(const FitReport& r) {
  json doc;
  doc["type"] = "frontier_fit";
  doc["daily"] = {{"mean_error", r.mean_error}, {"mean_underestimation_error", r.mean_underestimation_error}};
  doc["annual"] = {{"mean_error", r.annual_mean_error},
                   {"mean_underestimation_error", r.annual_underestimation_error}};
  doc["points"] = r.pairs.size();
  return doc;
}

MarketParams market_from_json(const json& doc, const Eigen::VectorXd& prices) {
  try {
    MarketParams m;
    const auto n = prices.size();
    m.capital = doc.at("capital").get<double>();
    m.prices = prices;
    m.horizon = doc.value("horizon", 1);
    m.risk_free_rate = doc.value("risk_free_rate", 0.0);
    m.buy_cost_rates = broadcast<double>(doc, "buy_cost", 0.0, n);
    m.sell_cost_rates = broadcast<double>(doc, "sell_cost", 0.0, n);
    m.lot_sizes = broadcast<int>(doc, "lot_size", 1, n);
    validate(m);
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("malformed market settings: {}", e.what()));
  }
}

void write_frontier_csv(std::ostream& out, const std::vector<FrontierPoint>& points) {
  out << "parameter,risk,return\n";
  for (const auto& p : points) out << fmt::format("{:.17g},{:.17g},{:.17g}\n", p.parameter, p.risk, p.expected_return);
}

void write_cloud_csv(std::ostream& out, const std::vector<CloudPoint>& points) {
  out << "sample,risk,return\n";
  for (std::size_t i = 0; i < points.size(); ++i)
    out << fmt::format("{},{:.17g},{:.17g}\n", i + 1, points[i].risk, points[i].expected_return);
}

void write_trace_csv(std::ostream& out, const GaTrace& trace) {
  out << "generation,best_fitness\n";
  for (std::size_t i = 0; i < trace.best_fitness_per_generation.size(); ++i)
    out << fmt::format("{},{:.17g}\n", i + 1, trace.best_fitness_per_generation[i]);
}

void write_fit_csv(std::ostream& out, const FitReport& report) {
  out << "target,expected,realized\n";
  for (const auto& p : report.pairs) out << fmt::format("{:.17g},{:.17g},{:.17g}\n", p.target, p.expected, p.realized);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, fmt::format("cannot write '{}'", path.string()));
  out << text;
}

}  // namespace portfolio::io
