#include "pbvar/errors.hpp"
#include "pbvar/panel_data.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace pbvar;

namespace {

PanelDataset parse(const std::string& text, std::vector<std::string> schema = {}, std::size_t lags = 1) {
  std::istringstream in(text);
  return parse_panel_csv(in, schema, lags);
}

std::string error_of(const std::string& text, std::vector<std::string> schema = {}) {
  try {
    parse(text, std::move(schema));
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

PanelDataset series_panel(const std::vector<std::pair<std::string, std::vector<double>>>& rows, int first_year = 2000) {
  PanelDataset p;
  p.variables = {"x"};
  for (const auto& [id, vals] : rows) {
    CountryBlock b{id, first_year, Eigen::MatrixXd(static_cast<Eigen::Index>(vals.size()), 1)};
    for (std::size_t i = 0; i < vals.size(); ++i) b.values(static_cast<Eigen::Index>(i), 0) = vals[i];
    p.countries.push_back(b);
  }
  return p;
}

}  // namespace

TEST_SUITE("panel_data") {

TEST_CASE("complete 2x4 panel loads with no missing cells") {
  const auto p = parse("country,year,x\nA,1990,1\nA,1991,2\nA,1992,3\nA,1993,4\n"
                       "B,1990,5\nB,1991,6\nB,1992,7\nB,1993,8\n");
  CHECK(p.cell_count() == 8);
  CHECK(p.missing_count() == 0);
  CHECK(p.years() == std::vector<int>{1990, 1991, 1992, 1993});
}

TEST_CASE("blank and NA cells are missing") {
  const auto blank = parse("country,year,x\nA,1990,1\nA,1991,\nA,1992,3\nA,1993,4\n"
                           "B,1990,5\nB,1991,6\nB,1992,7\nB,1993,8\n");
  CHECK(blank.cell_count() == 8);
  CHECK(blank.missing_count() == 1);
  CHECK(is_missing(blank.find_country("A")->values(1, 0)));

  const auto na = parse("country,year,x\nA,1990,NA\nA,1991,2\n");
  CHECK(na.missing_count() == 1);
}

TEST_CASE("load errors") {
  CHECK(error_of("country,year,x\nA,1990,1\nA,1991,2\nA,1993,3\n").find("gap in years for A") != std::string::npos);
  CHECK(error_of("country,year,x\nA,1990,1\nA,1990,2\n").find("duplicate (country, year)") != std::string::npos);
  const auto bad = error_of("country,year,x\nA,1990,1\nA,1991,abc\n");
  CHECK(bad.find("non-numeric") != std::string::npos);
  CHECK(bad.find("row 3") != std::string::npos);
  CHECK(error_of("country,year,x,z\nA,1990,1,2\n", {"x"}).find("unknown column 'z'") != std::string::npos);
  CHECK(error_of("country,year,x\nA,1990,1\n", {"x", "y"}).find("missing column 'y'") != std::string::npos);
  CHECK(error_of("country,year,x\nA,19x0,1\n").find("not an integer") != std::string::npos);
}

TEST_CASE("schema order wins over file order") {
  const auto p = parse("country,year,b,a\nA,1990,1,2\n", {"a", "b"});
  CHECK(p.variables == std::vector<std::string>{"a", "b"});
  CHECK(p.countries[0].values(0, 0) == 2.0);
  CHECK(p.countries[0].values(0, 1) == 1.0);
}

TEST_CASE("short countries produce a warning") {
  const auto p = parse("country,year,x\nA,1990,1\nA,1991,2\nA,1992,3\nB,1990,1\n", {}, 2);
  REQUIRE(p.warnings.size() == 1);
  CHECK(p.warnings[0].find("B") != std::string::npos);
  CHECK(short_countries(p, 2) == std::vector<std::string>{"B"});
}

TEST_CASE("csv round trip is bit exact") {
  auto p = series_panel({{"A", {0.1, 1.0 / 3.0, -2.5e-17, 123456.789}}, {"B", {std::nextafter(1.0, 2.0), kMissing, 7.0, 1e300}}});
  std::ostringstream out;
  write_panel_csv(p, out);
  const auto back = parse(out.str());
  REQUIRE(back.countries.size() == 2);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(back.countries[c].id == p.countries[c].id);
    CHECK(back.countries[c].first_year == p.countries[c].first_year);
    for (Eigen::Index r = 0; r < 4; ++r) {
      const double a = p.countries[c].values(r, 0);
      const double b = back.countries[c].values(r, 0);
      CHECK((is_missing(a) ? is_missing(b) : a == b));
    }
  }
}

TEST_CASE("transform pipeline deflate, per capita, log") {
  PanelDataset p;
  p.variables = {"nominal", "deflator", "pop", "share"};
  p.countries.push_back({"A", 2000, Eigen::RowVector4d(100.0, 2.0, 10.0, 0.3)});
  TransformSpec spec;
  spec["nominal"] = {"deflator", "pop", true};
  spec["share"] = {};
  const auto out = apply_transforms(p, spec);
  CHECK(out.countries[0].values(0, 0) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(out.countries[0].values(0, 0) == doctest::Approx(1.60944).epsilon(1e-5));
  CHECK(out.countries[0].values(0, 3) == 0.3);
  CHECK(out.countries[0].values(0, 1) == 2.0);
}

TEST_CASE("log of zero names the cell") {
  PanelDataset p;
  p.variables = {"nominal"};
  p.countries.push_back({"A", 2000, Eigen::Vector2d(1.0, 0.0)});
  TransformSpec spec;
  spec["nominal"].log = true;
  try {
    apply_transforms(p, spec);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("(A, 2001, nominal)") != std::string::npos);
  }
}

TEST_CASE("missing divisor is rejected") {
  PanelDataset p;
  p.variables = {"nominal", "deflator"};
  p.countries.push_back({"A", 2000, Eigen::RowVector2d(1.0, kMissing)});
  TransformSpec spec;
  spec["nominal"].deflate_by = "deflator";
  CHECK_THROWS_AS(apply_transforms(p, spec), InputError);
}

TEST_CASE("regression shapes for M=2, T=4, N=1, L=1") {
  const auto d = build_regression_matrices(series_panel({{"A", {1, 2, 3, 4}}, {"B", {5, 6, 7, 8}}}), 1);
  CHECK(d.Y.rows() == 6);
  CHECK(d.Y.cols() == 1);
  CHECK(d.X.cols() == 5);
  CHECK(d.n_country_dummies == 2);
  CHECK(d.n_time_dummies == 2);
  CHECK(d.column_index.size() == 5);
}

TEST_CASE("single series lag shift") {
  const auto d = build_regression_matrices(series_panel({{"A", {1, 2, 3}}}), 1);
  REQUIRE(d.Y.rows() == 2);
  CHECK(d.Y(0, 0) == 2.0);
  CHECK(d.Y(1, 0) == 3.0);
  CHECK(d.X(0, 0) == 1.0);
  CHECK(d.X(1, 0) == 2.0);
}

TEST_CASE("L = T leaves no usable rows") {
  try {
    build_regression_matrices(series_panel({{"A", {1, 2, 3}}}), 3);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("insufficient time span") != std::string::npos);
  }
}

TEST_CASE("lag entries equal stored values and dummy blocks are well formed") {
  PanelDataset p;
  p.variables = {"x", "y"};
  p.countries.push_back({"A", 1990, Eigen::MatrixXd(7, 2)});
  p.countries.push_back({"B", 1992, Eigen::MatrixXd(6, 2)});
  p.countries.push_back({"C", 1989, Eigen::MatrixXd(8, 2)});
  double v = 0.5;
  for (auto& c : p.countries) {
    for (Eigen::Index i = 0; i < c.values.size(); ++i) c.values.data()[i] = (v += 0.37) * (i % 3 == 0 ? -1 : 1);
  }
  p.countries[2].values(3, 1) = kMissing;

  const std::size_t lags = 2;
  const auto d = build_regression_matrices(p, lags);
  const auto n = static_cast<Eigen::Index>(d.n_vars());
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    const auto& key = d.row_index[r];
    const auto* c = p.find_country(key.country);
    const auto t = key.year - c->first_year;
    const auto row = static_cast<Eigen::Index>(r);
    CHECK(d.Y.row(row) == c->values.row(t));
    for (std::size_t l = 1; l <= lags; ++l) {
      CHECK(d.X.block(row, static_cast<Eigen::Index>(l - 1) * n, 1, n) == c->values.row(t - static_cast<Eigen::Index>(l)));
    }
    const auto country_block = d.X.block(row, n * static_cast<Eigen::Index>(lags), 1, static_cast<Eigen::Index>(d.n_country_dummies));
    CHECK(country_block.sum() == 1.0);
    CHECK(country_block.maxCoeff() == 1.0);
    const auto time_block = d.X.rightCols(static_cast<Eigen::Index>(d.n_time_dummies)).row(row);
    CHECK(time_block.sum() <= 1.0);
    CHECK(time_block.minCoeff() >= 0.0);
  }
  for (Eigen::Index j = 0; j < d.X.cols(); ++j) CHECK(d.X.col(j).cwiseAbs().maxCoeff() > 0.0);

  const auto dummies = d.X.rightCols(static_cast<Eigen::Index>(d.n_exog()));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dummies);
  CHECK(qr.rank() == dummies.cols());
}

TEST_CASE("rows span the incomplete cell's window only") {
  auto p = series_panel({{"A", {1, 2, kMissing, 4, 5, 6}}});
  const auto d = build_regression_matrices(p, 1);
  REQUIRE(d.n_rows() == 3);
  CHECK(d.row_index[0] == RowKey{"A", 2001});
  CHECK(d.row_index[1] == RowKey{"A", 2004});
  CHECK(d.row_index[2] == RowKey{"A", 2005});
}

TEST_CASE("a wholly missing country changes nothing") {
  const auto base = series_panel({{"A", {1, 2.5, 3, 4.25}}, {"C", {5, 6.5, 7, 9}}});
  auto extra = base;
  extra.countries.insert(extra.countries.begin() + 1,
                         CountryBlock{"B", 2000, Eigen::MatrixXd::Constant(4, 1, kMissing)});
  const auto a = build_regression_matrices(base, 1);
  const auto b = build_regression_matrices(extra, 1);
  CHECK(a.Y == b.Y);
  CHECK(a.X == b.X);
  CHECK(a.row_index == b.row_index);
  CHECK(a.column_index == b.column_index);
  CHECK(b.dropped_countries == std::vector<std::string>{"B"});
}

TEST_CASE("select_countries rejects unknown ids") {
  const auto p = series_panel({{"A", {1, 2, 3}}});
  const std::vector<std::string> ids{"Z"};
  CHECK_THROWS_AS(select_countries(p, ids), InputError);
}

}  // TEST_SUITE
