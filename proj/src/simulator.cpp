#include "pbvar/simulator.hpp"

#include "pbvar/errors.hpp"
#include "pbvar/identification.hpp"
#include "pbvar/parallel.hpp"
#include "pbvar/random.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace pbvar {

namespace {

Eigen::MatrixXd lags_as_coefficients(const NewsDgp& dgp) { return coefficients_from_lag_matrices(dgp.lags); }

std::vector<std::pair<int, std::size_t>> country_spans(const NewsDgp& dgp) {
  if (!dgp.spans.empty()) return dgp.spans;
  return std::vector<std::pair<int, std::size_t>>(dgp.n_countries, {dgp.first_year, dgp.n_years});
}

std::string country_id(std::size_t i, std::size_t count) {
  const int width = count < 10 ? 1 : static_cast<int>(std::floor(std::log10(static_cast<double>(count)))) + 1;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "C%0*zu", width, i + 1);
  return buf;
}

}  // namespace

void validate_dgp(const NewsDgp& dgp) {
  const auto n = static_cast<Eigen::Index>(dgp.n_vars());
  if (n < 2) throw InputError("DGP needs at least 2 variables");
  if (dgp.impact.rows() != n || dgp.impact.cols() != n) throw InputError("DGP impact matrix must be N x N");
  if (dgp.lags.empty()) throw InputError("DGP needs at least one lag matrix");
  for (const auto& a : dgp.lags) {
    if (a.rows() != n || a.cols() != n) throw InputError("DGP lag matrices must be N x N");
  }
  if (dgp.target >= dgp.n_vars() || dgp.news >= dgp.n_vars()) throw InputError("DGP target/news index out of range");
  if (dgp.delay < 1) throw InputError("news delay must be at least 1");
  if (country_spans(dgp).empty()) throw InputError("DGP has no countries");
  if (std::abs(dgp.impact.fullPivLu().determinant()) < 1e-12) throw InputError("DGP impact matrix is singular");
  if (dgp.impact(static_cast<Eigen::Index>(dgp.target), static_cast<Eigen::Index>(dgp.news)) != 0.0) {
    throw InputError("news shock must have zero contemporaneous effect on the target");
  }

  const auto b = lags_as_coefficients(dgp);
  const double rho = spectral_radius(companion_matrix(b, dgp.n_vars(), dgp.lags.size()));
  if (!(rho < 1.0)) throw InputError("unstable dynamics: companion spectral radius " + format_number(rho));

  const auto path = true_news_irf(dgp, dgp.delay);
  const double scale = path.cwiseAbs().maxCoeff();
  const auto t = static_cast<Eigen::Index>(dgp.target);
  for (Eigen::Index h = 0; h < static_cast<Eigen::Index>(dgp.delay); ++h) {
    if (std::abs(path(h, t)) > 1e-12 * std::max(scale, 1.0)) {
      throw InputError("news shock moves the target before the stated delay");
    }
  }
}

Eigen::MatrixXd true_news_irf(const NewsDgp& dgp, std::size_t horizon) {
  const auto psi = ma_coefficients(lags_as_coefficients(dgp), dgp.n_vars(), dgp.lags.size(), horizon + 1);
  const Eigen::VectorXd column = dgp.impact.col(static_cast<Eigen::Index>(dgp.news));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(horizon + 1), static_cast<Eigen::Index>(dgp.n_vars()));
  for (std::size_t j = 0; j <= horizon; ++j) out.row(static_cast<Eigen::Index>(j)) = (psi.psi[j] * column).transpose();
  return out;
}

SimulatedPanel simulate_panel(const NewsDgp& dgp) {
  validate_dgp(dgp);
  const auto n = static_cast<Eigen::Index>(dgp.n_vars());
  const auto p = dgp.lags.size();
  const auto spans = country_spans(dgp);

  SimulatedPanel out;
  out.panel.variables = dgp.variables;
  for (Eigen::Index k = 0; k < n; ++k) out.shocks.variables.push_back("eps" + std::to_string(k + 1));
  out.panel.countries.resize(spans.size());
  out.shocks.countries.resize(spans.size());
  out.fixed_effects.resize(static_cast<Eigen::Index>(spans.size()), n);

  parallel_for(spans.size(), dgp.workers, [&](std::size_t i) {
    auto rng = substream(dgp.seed, Stream::simulator, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto [first_year, n_years] = spans[i];
    const auto total = static_cast<Eigen::Index>(dgp.burn_in + n_years);

    Eigen::VectorXd alpha(n);
    for (Eigen::Index v = 0; v < n; ++v) alpha(v) = dgp.fixed_effect_sd * normal(rng);

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(total, n);
    Eigen::MatrixXd eps(total, n);
    for (Eigen::Index t = 0; t < total; ++t) {
      for (Eigen::Index k = 0; k < n; ++k) eps(t, k) = normal(rng);
      Eigen::VectorXd wt = dgp.impact * eps.row(t).transpose();
      for (std::size_t l = 1; l <= p && static_cast<Eigen::Index>(l) <= t; ++l) {
        wt.noalias() += dgp.lags[l - 1] * w.row(t - static_cast<Eigen::Index>(l)).transpose();
      }
      w.row(t) = wt.transpose();
    }

    const auto keep = static_cast<Eigen::Index>(n_years);
    const auto id = country_id(i, spans.size());
    out.panel.countries[i] = {id, first_year, w.bottomRows(keep).rowwise() + alpha.transpose()};
    out.shocks.countries[i] = {id, first_year, eps.bottomRows(keep)};
    out.fixed_effects.row(static_cast<Eigen::Index>(i)) = alpha.transpose();
  });

  out.true_irf = true_news_irf(dgp, dgp.irf_horizon);
  return out;
}

NewsDgp desk_scale_dgp() {
  NewsDgp d;
  d.variables = {"spending", "news_indicator", "output", "productivity"};
  d.target = 0;
  d.news = 1;
  d.delay = 1;
  d.impact.resize(4, 4);
  d.impact << 1.0, 0.0, 0.0, 0.0,  //
      0.3, 1.0, 0.0, 0.0,          //
      0.2, 0.5, 1.0, 0.0,          //
      0.1, -0.3, 0.4, 1.0;
  Eigen::MatrixXd a1(4, 4);
  a1 << 0.7, 0.5, 0.0, 0.0,  //
      0.0, 0.5, 0.0, 0.0,    //
      0.2, 0.3, 0.5, 0.1,    //
      0.1, 0.0, 0.2, 0.4;
  Eigen::MatrixXd a2(4, 4);
  a2 << 0.1, 0.0, 0.0, 0.0,  //
      0.0, 0.1, 0.0, 0.0,    //
      0.0, 0.0, 0.1, 0.0,    //
      0.0, 0.1, 0.0, 0.1;
  d.lags = {a1, a2};
  d.n_countries = 20;
  d.n_years = 60;
  d.seed = 20240601;
  return d;
}

NewsDgp benchmark_scale_dgp() {
  const NewsDgp base = desk_scale_dgp();
  constexpr Eigen::Index n = 14;
  constexpr Eigen::Index n_base = 4;
  NewsDgp d = base;
  for (Eigen::Index k = n_base; k < n; ++k) d.variables.push_back("decile" + std::to_string(k - n_base + 1));

  d.impact = Eigen::MatrixXd::Identity(n, n);
  d.impact.topLeftCorner(n_base, n_base) = base.impact;
  Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(n, n);
  a1.topLeftCorner(n_base, n_base) = base.lags[0];
  a2.topLeftCorner(n_base, n_base) = base.lags[1];
  for (Eigen::Index k = n_base; k < n; ++k) {
    const double tilt = 0.05 * static_cast<double>(k - n_base);
    d.impact(k, 0) = 0.1;
    d.impact(k, 1) = 0.3 - tilt;
    d.impact(k, 2) = 0.2;
    a1(k, k) = 0.5;
    a1(k, 2) = 0.1 + 0.5 * tilt;
    a2(k, k) = 0.1;
  }
  d.lags = {a1, a2};
  d.n_countries = 40;
  d.n_years = 50;
  d.seed = 20240602;
  return d;
}

std::vector<double> align_shocks(const PanelDataset& shocks, std::size_t column, std::span<const RowKey> rows) {
  if (column >= shocks.n_vars()) throw InputError("shock column out of range");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& key : rows) {
    const auto* c = shocks.find_country(key.country);
    if (!c || key.year < c->first_year || key.year > c->last_year()) {
      throw InputError("no true shock for (" + key.country + ", " + std::to_string(key.year) + ")");
    }
    out.push_back(c->values(key.year - c->first_year, static_cast<Eigen::Index>(column)));
  }
  return out;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("correlation inputs differ in length");
  if (a.size() < 2) throw InputError("correlation needs at least 2 points");
  const auto va = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  const auto vb = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd ca = va.array() - va.mean();
  const Eigen::VectorXd cb = vb.array() - vb.mean();
  const double denom = ca.norm() * cb.norm();
  if (!(denom > 0.0)) throw InputError("correlation undefined for a constant series");
  return ca.dot(cb) / denom;
}

RecoveryReport recovery_metrics(const IrfResult& estimated, std::span<const double> estimated_shocks,
                                std::span<const double> true_shocks, const Eigen::MatrixXd& true_irf) {
  if (estimated_shocks.size() != true_shocks.size()) throw InputError("shock series lengths differ");
  const auto& median = estimated.bands.at(0.5);
  if (median.rows() != true_irf.rows() || median.cols() != true_irf.cols()) {
    throw InputError("estimated and true IRFs differ in shape");
  }
  const auto& lo = estimated.bands.values.front();
  const auto& hi = estimated.bands.values.back();

  RecoveryReport r;
  r.shock_correlation = pearson_correlation(estimated_shocks, true_shocks);
  r.max_irf_deviation = (median - true_irf).cwiseAbs().maxCoeff();
  const auto covered = ((lo.array() <= true_irf.array()) && (true_irf.array() <= hi.array())).count();
  r.band_coverage = static_cast<double>(covered) / static_cast<double>(true_irf.size());
  return r;
}

}  // namespace pbvar
