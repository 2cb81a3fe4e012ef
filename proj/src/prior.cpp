#include "pbvar/prior.hpp"

#include "pbvar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pbvar {

Ar1Fit fit_ar1(std::span<const std::vector<double>> segments, double s_floor_scale) {
  std::vector<double> lagged;
  std::vector<double> current;
  double sum = 0.0;
  double scale = 0.0;
  std::size_t n_obs = 0;
  for (const auto& seg : segments) {
    for (std::size_t t = 0; t < seg.size(); ++t) {
      if (is_missing(seg[t])) continue;
      sum += seg[t];
      scale = std::max(scale, std::abs(seg[t]));
      ++n_obs;
      if (t > 0 && !is_missing(seg[t - 1])) {
        lagged.push_back(seg[t - 1]);
        current.push_back(seg[t]);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(lagged.size());
  if (n < 3) throw InputError("AR(1) fit needs at least 3 lag pairs, found " + std::to_string(n));

  Ar1Fit fit;
  fit.mu = sum / static_cast<double>(n_obs);
  const double s_floor = s_floor_scale * std::max(1.0, scale);

  const auto [lo, hi] = std::minmax_element(lagged.begin(), lagged.end());
  if (*lo == *hi) {
    fit.gamma = 1.0;
    fit.s = s_floor;
    fit.degenerate = true;
    return fit;
  }

  Eigen::MatrixXd design(n, 2);
  design.col(0).setOnes();
  design.col(1) = Eigen::Map<const Eigen::VectorXd>(lagged.data(), n);
  const Eigen::Map<const Eigen::VectorXd> y(current.data(), n);
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
  const double ssr = (y - design * coef).squaredNorm();

  fit.gamma = coef(1);
  fit.s = std::max(std::sqrt(ssr / static_cast<double>(n - 2)), s_floor);
  return fit;
}

Ar1Stats estimate_ar1_stats(const PanelDataset& data, double s_floor_scale) {
  const auto n = static_cast<Eigen::Index>(data.n_vars());
  Ar1Stats stats{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n), std::vector<bool>(data.n_vars())};
  for (Eigen::Index v = 0; v < n; ++v) {
    std::vector<std::vector<double>> segments;
    for (const auto& c : data.countries) {
      const auto col = c.values.col(v);
      segments.emplace_back(col.begin(), col.end());
    }
    Ar1Fit fit;
    try {
      fit = fit_ar1(segments, s_floor_scale);
    } catch (const InputError& e) {
      throw InputError("variable " + data.variables[static_cast<std::size_t>(v)] + ": " + e.what());
    }
    stats.gamma(v) = fit.gamma;
    stats.s(v) = fit.s;
    stats.mu(v) = fit.mu;
    stats.degenerate[static_cast<std::size_t>(v)] = fit.degenerate;
  }
  return stats;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_minnesota_dummies(const Ar1Stats& stats, double kappa, double c,
                                                                    std::size_t n_lags, std::size_t n_exog) {
  if (!(kappa > 0.0)) throw InputError("prior tightness kappa must be positive");
  if (!(c > 0.0)) throw InputError("exogenous prior tightness c must be positive");
  if (n_lags < 1) throw InputError("lag count must be at least 1");

  const auto n = static_cast<Eigen::Index>(stats.size());
  const auto p = static_cast<Eigen::Index>(n_lags);
  const auto ex = static_cast<Eigen::Index>(n_exog);
  const Eigen::Index rows = n * p + n + ex;

  Eigen::MatrixXd y_d = Eigen::MatrixXd::Zero(rows, n);
  Eigen::MatrixXd x_d = Eigen::MatrixXd::Zero(rows, n * p + ex);

  // Lag block: first lag centred on gamma, J_P = diag(1..P) tightens later lags.
  y_d.topRows(n).diagonal() = stats.gamma.cwiseProduct(stats.s) / kappa;
  for (Eigen::Index l = 0; l < p; ++l) {
    x_d.block(l * n, l * n, n, n).diagonal() = stats.s * static_cast<double>(l + 1) / kappa;
  }
  // Covariance block.
  y_d.block(n * p, 0, n, n).diagonal() = stats.s;
  // Exogenous block.
  x_d.bottomRightCorner(ex, ex).diagonal().setConstant(1.0 / c);
  return {std::move(y_d), std::move(x_d)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_soc_dummies(const Ar1Stats& stats, double tau_soc,
                                                              std::size_t n_lags, std::size_t n_exog) {
  if (!(tau_soc > 0.0)) throw InputError("sum-of-coefficients tightness tau must be positive");
  if (n_lags < 1) throw InputError("lag count must be at least 1");

  const auto n = static_cast<Eigen::Index>(stats.size());
  const auto p = static_cast<Eigen::Index>(n_lags);
  const Eigen::VectorXd d = stats.gamma.cwiseProduct(stats.mu) / tau_soc;

  Eigen::MatrixXd y_soc = d.asDiagonal();
  Eigen::MatrixXd x_soc = Eigen::MatrixXd::Zero(n, n * p + static_cast<Eigen::Index>(n_exog));
  for (Eigen::Index l = 0; l < p; ++l) x_soc.block(0, l * n, n, n) = y_soc;
  return {std::move(y_soc), std::move(x_soc)};
}

DummyObservations build_dummy_observations(const Ar1Stats& stats, const PriorSettings& settings, std::size_t n_lags,
                                           std::size_t n_exog) {
  DummyObservations d;
  std::tie(d.y_d, d.x_d) = build_minnesota_dummies(stats, settings.kappa, settings.c, n_lags, n_exog);
  std::tie(d.y_soc, d.x_soc) = build_soc_dummies(stats, settings.tau_soc, n_lags, n_exog);
  d.kappa = settings.kappa;
  d.c = settings.c;
  d.tau_soc = settings.tau_soc;
  return d;
}

}  // namespace pbvar
