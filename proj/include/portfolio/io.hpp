#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "portfolio/frontier.hpp"
#include "portfolio/ga.hpp"
#include "portfolio/market_model.hpp"
#include "portfolio/mv_optimizer.hpp"
#include "portfolio/risk_models.hpp"

namespace portfolio::io {

using nlohmann::json;

/// Shortest decimal that round-trips a double (up to 17 significant digits).
std::string full(double v);

json to_json(const RiskModel& model);
RiskModel risk_model_from_json(const json& doc);

/// Weights at full precision plus daily and annualized return / risk.
/// Annualized risk scales by sqrt(periods) and is for display only.
json to_json(const Portfolio& p, const AnnualizationConvention& convention);

json to_json(const IntegerSolution& s, const std::vector<std::string>& assets, const MarketParams& market,
             const AnnualizationConvention& convention);

json to_json(const FitReport& report);

/// Market settings from a config object:
///   {"capital": 10000, "horizon": 251, "risk_free_rate": 0.000279,
///    "buy_cost": 0.01 | [..], "sell_cost": 0.01 | [..], "lot_size": 1 | [..]}
/// Scalars are broadcast over `prices`.
MarketParams market_from_json(const json& doc, const Eigen::VectorXd& prices);

void write_frontier_csv(std::ostream& out, const std::vector<FrontierPoint>& points);
void write_cloud_csv(std::ostream& out, const std::vector<CloudPoint>& points);
void write_trace_csv(std::ostream& out, const GaTrace& trace);
void write_fit_csv(std::ostream& out, const FitReport& report);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace portfolio::io
