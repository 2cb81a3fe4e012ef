#include "pbvar/panel_data.hpp"

#include "pbvar/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace pbvar {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string location(std::string_view source, std::size_t line_no) {
  std::ostringstream os;
  os << source << ": row " << line_no;
  return os.str();
}

std::string format_double(double v) {
  if (is_missing(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct RawRow {
  int year;
  std::vector<double> values;
};

}  // namespace

bool CountryBlock::row_complete(Eigen::Index r) const {
  for (Eigen::Index v = 0; v < values.cols(); ++v) {
    if (is_missing(values(r, v))) return false;
  }
  return true;
}

std::size_t PanelDataset::variable_index(std::string_view name) const {
  const auto it = std::find(variables.begin(), variables.end(), name);
  if (it == variables.end()) throw InputError("unknown variable '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - variables.begin());
}

const CountryBlock* PanelDataset::find_country(std::string_view id) const {
  for (const auto& c : countries) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::vector<int> PanelDataset::years() const {
  std::set<int> ys;
  for (const auto& c : countries) {
    for (int y = c.first_year; y <= c.last_year(); ++y) ys.insert(y);
  }
  return {ys.begin(), ys.end()};
}

std::size_t PanelDataset::cell_count() const {
  std::size_t n = 0;
  for (const auto& c : countries) n += static_cast<std::size_t>(c.values.size());
  return n;
}

std::size_t PanelDataset::missing_count() const {
  std::size_t n = 0;
  for (const auto& c : countries) n += static_cast<std::size_t>(c.values.array().isNaN().count());
  return n;
}

PanelDataset parse_panel_csv(std::istream& in, std::span<const std::string> schema, std::size_t lags,
                             std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw InputError(std::string(source) + ": empty file");

  const auto header = split_commas(line);
  if (header.size() < 2 || header[0] != "country" || header[1] != "year") {
    throw InputError(std::string(source) + ": header must start with 'country,year'");
  }
  std::vector<std::string> file_vars(header.begin() + 2, header.end());

  PanelDataset out;
  // file column -> position in out.variables
  std::vector<std::size_t> column_map(file_vars.size());
  if (schema.empty()) {
    out.variables = file_vars;
    for (std::size_t j = 0; j < file_vars.size(); ++j) column_map[j] = j;
  } else {
    out.variables.assign(schema.begin(), schema.end());
    for (const auto& s : schema) {
      if (std::find(file_vars.begin(), file_vars.end(), s) == file_vars.end()) {
        throw InputError(std::string(source) + ": missing column '" + s + "'");
      }
    }
    for (std::size_t j = 0; j < file_vars.size(); ++j) {
      const auto it = std::find(schema.begin(), schema.end(), file_vars[j]);
      if (it == schema.end()) {
        throw InputError(std::string(source) + ": unknown column '" + file_vars[j] + "'");
      }
      column_map[j] = static_cast<std::size_t>(it - schema.begin());
    }
  }
  {
    std::set<std::string> seen(file_vars.begin(), file_vars.end());
    if (seen.size() != file_vars.size()) throw InputError(std::string(source) + ": duplicate column");
  }

  const std::size_t n_vars = out.variables.size();
  std::map<std::string, std::map<int, RawRow>> by_country;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw InputError(location(source, line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(cells.size()));
    }
    const std::string country(cells[0]);
    if (country.empty()) throw InputError(location(source, line_no) + ": empty country");

    int year = 0;
    {
      const auto y = cells[1];
      const auto res = std::from_chars(y.data(), y.data() + y.size(), year);
      if (res.ec != std::errc{} || res.ptr != y.data() + y.size()) {
        throw InputError(location(source, line_no) + ": year '" + std::string(y) + "' is not an integer");
      }
    }

    RawRow row{year, std::vector<double>(n_vars, kMissing)};
    for (std::size_t j = 0; j < file_vars.size(); ++j) {
      const auto cell = cells[j + 2];
      if (cell.empty() || cell == "NA") continue;
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw InputError(location(source, line_no) + ": non-numeric value '" + std::string(cell) +
                         "' in column '" + file_vars[j] + "'");
      }
      row.values[column_map[j]] = v;
    }

    auto& rows = by_country[country];
    if (!rows.emplace(year, std::move(row)).second) {
      throw InputError(location(source, line_no) + ": duplicate (country, year) = (" + country + ", " +
                       std::to_string(year) + ")");
    }
  }

  for (auto& [id, rows] : by_country) {
    const int first = rows.begin()->first;
    const int last = rows.rbegin()->first;
    if (static_cast<std::size_t>(last - first + 1) != rows.size()) {
      throw InputError(std::string(source) + ": gap in years for " + id);
    }
    CountryBlock block{id, first, Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()),
                                                  static_cast<Eigen::Index>(n_vars))};
    Eigen::Index r = 0;
    for (const auto& [year, raw] : rows) {
      for (std::size_t v = 0; v < n_vars; ++v) block.values(r, static_cast<Eigen::Index>(v)) = raw.values[v];
      ++r;
    }
    out.countries.push_back(std::move(block));
  }

  for (const auto& id : short_countries(out, lags)) {
    out.warnings.push_back("country " + id + " has fewer than " + std::to_string(lags + 1) +
                           " consecutive complete years and will be dropped");
  }
  return out;
}

PanelDataset load_panel(const std::filesystem::path& path, std::span<const std::string> schema,
                        std::size_t lags) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open panel file " + path.string());
  return parse_panel_csv(in, schema, lags, path.string());
}

void write_panel_csv(const PanelDataset& data, std::ostream& out) {
  out << "country,year";
  for (const auto& v : data.variables) out << ',' << v;
  out << '\n';
  for (const auto& c : data.countries) {
    for (Eigen::Index r = 0; r < c.values.rows(); ++r) {
      out << c.id << ',' << (c.first_year + r);
      for (Eigen::Index v = 0; v < c.values.cols(); ++v) out << ',' << format_double(c.values(r, v));
      out << '\n';
    }
  }
}

void write_panel_csv(const PanelDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_panel_csv(data, out);
}

PanelDataset apply_transforms(const PanelDataset& data, const TransformSpec& spec) {
  PanelDataset out = data;
  for (const auto& [name, tf] : spec) {
    if (tf.is_passthrough()) {
      data.variable_index(name);
      continue;
    }
    const auto target = static_cast<Eigen::Index>(data.variable_index(name));
    const auto deflator = tf.deflate_by ? std::optional(static_cast<Eigen::Index>(data.variable_index(*tf.deflate_by)))
                                        : std::nullopt;
    const auto population =
        tf.per_capita_by ? std::optional(static_cast<Eigen::Index>(data.variable_index(*tf.per_capita_by)))
                         : std::nullopt;

    for (std::size_t ci = 0; ci < data.countries.size(); ++ci) {
      const auto& src = data.countries[ci];
      auto& dst = out.countries[ci];
      for (Eigen::Index r = 0; r < src.values.rows(); ++r) {
        double v = src.values(r, target);
        if (is_missing(v)) continue;
        const auto where = [&] {
          return "(" + src.id + ", " + std::to_string(src.first_year + r) + ", " + name + ")";
        };
        const auto divide = [&](Eigen::Index col, const std::string& by) {
          const double d = src.values(r, col);
          if (is_missing(d)) throw InputError("missing " + by + " for " + where());
          if (d == 0.0) throw InputError("zero " + by + " for " + where());
          v /= d;
        };
        if (deflator) divide(*deflator, *tf.deflate_by);
        if (population) divide(*population, *tf.per_capita_by);
        if (tf.log) {
          if (!(v > 0.0)) throw InputError("log of non-positive value at " + where());
          v = std::log(v);
        }
        dst.values(r, target) = v;
      }
    }
  }
  return out;
}

PanelDataset select_variables(const PanelDataset& data, std::span<const std::string> names) {
  std::vector<Eigen::Index> cols;
  for (const auto& n : names) cols.push_back(static_cast<Eigen::Index>(data.variable_index(n)));

  PanelDataset out;
  out.variables.assign(names.begin(), names.end());
  out.warnings = data.warnings;
  for (const auto& c : data.countries) {
    CountryBlock b{c.id, c.first_year, Eigen::MatrixXd(c.values.rows(), static_cast<Eigen::Index>(cols.size()))};
    for (std::size_t j = 0; j < cols.size(); ++j) b.values.col(static_cast<Eigen::Index>(j)) = c.values.col(cols[j]);
    out.countries.push_back(std::move(b));
  }
  return out;
}

PanelDataset select_countries(const PanelDataset& data, std::span<const std::string> ids) {
  PanelDataset out;
  out.variables = data.variables;
  for (const auto& id : ids) {
    if (!data.find_country(id)) throw InputError("unknown country '" + id + "'");
  }
  for (const auto& c : data.countries) {
    if (std::find(ids.begin(), ids.end(), c.id) != ids.end()) out.countries.push_back(c);
  }
  return out;
}

namespace {

// First row index t (>= lags) of each complete window t-lags..t.
std::vector<Eigen::Index> usable_rows(const CountryBlock& c, std::size_t lags) {
  std::vector<Eigen::Index> rows;
  Eigen::Index run = 0;
  for (Eigen::Index r = 0; r < c.values.rows(); ++r) {
    run = c.row_complete(r) ? run + 1 : 0;
    if (run >= static_cast<Eigen::Index>(lags) + 1) rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::vector<std::string> short_countries(const PanelDataset& data, std::size_t lags) {
  std::vector<std::string> out;
  for (const auto& c : data.countries) {
    if (usable_rows(c, lags).empty()) out.push_back(c.id);
  }
  return out;
}

RegressionData build_regression_matrices(const PanelDataset& data, std::size_t lags) {
  if (lags < 1) throw InputError("lag count must be at least 1");

  RegressionData out;
  out.variables = data.variables;
  out.n_lags = lags;
  const auto n = static_cast<Eigen::Index>(data.n_vars());

  struct Kept {
    const CountryBlock* block;
    std::vector<Eigen::Index> rows;
  };
  std::vector<Kept> kept;
  std::set<int> year_set;
  for (const auto& c : data.countries) {
    auto rows = usable_rows(c, lags);
    if (rows.empty()) {
      out.dropped_countries.push_back(c.id);
      continue;
    }
    for (auto r : rows) year_set.insert(c.first_year + static_cast<int>(r));
    kept.push_back({&c, std::move(rows)});
  }
  if (kept.empty()) throw InputError("insufficient time span: no country has " + std::to_string(lags + 1) +
                                     " consecutive complete years");

  const std::vector<int> years(year_set.begin(), year_set.end());
  out.n_country_dummies = kept.size();
  out.n_time_dummies = years.size() - 1;

  std::size_t n_rows = 0;
  for (const auto& k : kept) n_rows += k.rows.size();
  const auto lag_cols = n * static_cast<Eigen::Index>(lags);
  const auto k_cols = static_cast<Eigen::Index>(out.n_regressors());

  out.Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows), n);
  out.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows), k_cols);

  for (std::size_t l = 1; l <= lags; ++l) {
    for (const auto& v : data.variables) out.column_index.push_back(v + "@lag" + std::to_string(l));
  }
  for (const auto& k : kept) out.column_index.push_back("country:" + k.block->id);
  for (std::size_t y = 1; y < years.size(); ++y) out.column_index.push_back("year:" + std::to_string(years[y]));

  Eigen::Index row = 0;
  for (std::size_t ci = 0; ci < kept.size(); ++ci) {
    const auto& c = *kept[ci].block;
    for (auto r : kept[ci].rows) {
      const int year = c.first_year + static_cast<int>(r);
      out.Y.row(row) = c.values.row(r);
      for (Eigen::Index l = 1; l <= static_cast<Eigen::Index>(lags); ++l) {
        out.X.block(row, (l - 1) * n, 1, n) = c.values.row(r - l);
      }
      out.X(row, lag_cols + static_cast<Eigen::Index>(ci)) = 1.0;
      const auto yit = std::lower_bound(years.begin(), years.end(), year);
      const auto yi = yit - years.begin();
      if (yi > 0) out.X(row, lag_cols + static_cast<Eigen::Index>(kept.size()) + yi - 1) = 1.0;
      out.row_index.push_back({c.id, year});
      ++row;
    }
  }

  for (Eigen::Index j = 0; j < lag_cols; ++j) {
    if (out.X.col(j).cwiseAbs().maxCoeff() == 0.0) {
      throw InputError("regressor column " + out.column_index[static_cast<std::size_t>(j)] + " is identically zero");
    }
  }
  return out;
}

}  // namespace pbvar
