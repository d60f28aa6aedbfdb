#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace portfolio {

/// Adjusted close prices, one row per trading period and one column per asset.
/// Absent observations are carried as NaN until fill_missing() runs.
struct PriceTable {
  std::vector<std::string> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;  // periods x assets

  Eigen::Index periods() const { return values.rows(); }
  Eigen::Index num_assets() const { return values.cols(); }
};

/// Per-period simple returns R_t = P_t / P_{t-1} - 1.
struct ReturnsMatrix {
  std::vector<std::string> assets;
  Eigen::MatrixXd values;  // periods x assets

  Eigen::Index periods() const { return values.rows(); }
  Eigen::Index num_assets() const { return values.cols(); }
};

struct CsvFormat {
  char delimiter = ',';
  /// Require YYYY-MM-DD labels and strictly increasing dates.
  bool iso_dates = false;
  /// Carry the previous price forward over empty / NA cells.
  bool fill_gaps = true;
};

/// Reads a header-first delimited file: date label, then one price column per asset.
/// Throws Error{ParseError, NonPositivePrice, InsufficientHistory, DuplicateAsset,
/// LeadingGap, NonFiniteValue}.
PriceTable load_prices(const std::filesystem::path& path, const CsvFormat& format = {});

/// Same as load_prices but over an in-memory document; `source` labels errors.
PriceTable parse_prices(std::string_view text, const CsvFormat& format = {},
                        std::string_view source = "<memory>");

/// Replaces each NaN by the most recent prior value in its column.
PriceTable fill_missing(const PriceTable& raw);

/// Checks the PriceTable invariants (positive finite prices, at least two
/// rows, unique headers, consistent shapes).
void validate(const PriceTable& prices);

ReturnsMatrix assets_return(const PriceTable& prices);

}  // namespace portfolio
