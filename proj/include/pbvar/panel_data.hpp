#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pbvar {

/// Missing cells are stored as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// One country's contiguous block of annual observations.
struct CountryBlock {
  std::string id;
  int first_year = 0;
  Eigen::MatrixXd values;  // years x variables

  int n_years() const { return static_cast<int>(values.rows()); }
  int last_year() const { return first_year + n_years() - 1; }
  bool row_complete(Eigen::Index r) const;
};

/// Long-form country x year panel of named variables. Countries are kept
/// sorted by id and each country's years are contiguous.
struct PanelDataset {
  std::vector<std::string> variables;
  std::vector<CountryBlock> countries;
  std::vector<std::string> warnings;

  std::size_t n_vars() const { return variables.size(); }
  std::size_t variable_index(std::string_view name) const;
  const CountryBlock* find_country(std::string_view id) const;
  std::vector<int> years() const;
  std::size_t cell_count() const;
  std::size_t missing_count() const;
};

/// Per-variable pipeline, always applied as deflate -> per-capita -> log.
/// An empty transform is a passthrough (shares, ratios).
struct VariableTransform {
  std::optional<std::string> deflate_by;
  std::optional<std::string> per_capita_by;
  bool log = false;

  bool is_passthrough() const { return !deflate_by && !per_capita_by && !log; }
};

using TransformSpec = std::map<std::string, VariableTransform, std::less<>>;

struct RowKey {
  std::string country;
  int year = 0;

  friend bool operator==(const RowKey&, const RowKey&) = default;
};

/// Stacked regression Y = X B + U. Columns of X are
/// [Z_{t-1} | ... | Z_{t-L} | country dummies | time dummies].
struct RegressionData {
  Eigen::MatrixXd Y;
  Eigen::MatrixXd X;
  std::vector<std::string> variables;
  std::size_t n_lags = 0;
  std::size_t n_country_dummies = 0;
  std::size_t n_time_dummies = 0;
  std::vector<RowKey> row_index;
  std::vector<std::string> column_index;
  std::vector<std::string> dropped_countries;

  std::size_t n_vars() const { return variables.size(); }
  std::size_t n_exog() const { return n_country_dummies + n_time_dummies; }
  std::size_t n_regressors() const { return n_vars() * n_lags + n_exog(); }
  std::size_t n_rows() const { return static_cast<std::size_t>(Y.rows()); }
};

/// Parses `country,year,<var>...` CSV. When `schema` is non-empty every header
/// column must be listed in it and vice versa; variables are reordered to
/// schema order. Empty cells and `NA` are missing.
PanelDataset parse_panel_csv(std::istream& in, std::span<const std::string> schema,
                             std::size_t lags = 1, std::string_view source = "<stream>");
PanelDataset load_panel(const std::filesystem::path& path, std::span<const std::string> schema,
                        std::size_t lags = 1);

void write_panel_csv(const PanelDataset& data, std::ostream& out);
void write_panel_csv(const PanelDataset& data, const std::filesystem::path& path);

PanelDataset apply_transforms(const PanelDataset& data, const TransformSpec& spec);

PanelDataset select_variables(const PanelDataset& data, std::span<const std::string> names);
PanelDataset select_countries(const PanelDataset& data, std::span<const std::string> ids);

/// Countries without L+1 consecutive complete years.
std::vector<std::string> short_countries(const PanelDataset& data, std::size_t lags);

RegressionData build_regression_matrices(const PanelDataset& data, std::size_t lags);

}  // namespace pbvar
