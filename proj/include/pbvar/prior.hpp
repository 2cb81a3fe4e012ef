#pragma once

#include "pbvar/panel_data.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pbvar {

/// AR(1) summary of one variable, pooled across countries.
struct Ar1Fit {
  double gamma = 0.0;
  double s = 0.0;
  double mu = 0.0;
  bool degenerate = false;  // regressor had zero variance
};

/// One AR(1) triple per endogenous variable; drives the prior centre and scale.
struct Ar1Stats {
  Eigen::VectorXd gamma;
  Eigen::VectorXd s;
  Eigen::VectorXd mu;
  std::vector<bool> degenerate;

  std::size_t size() const { return static_cast<std::size_t>(gamma.size()); }
};

struct PriorSettings {
  double kappa = 0.2;
  double c = 1000.0;
  double tau_soc = 2.0;  // 10 * kappa
  double s_floor_scale = 1e-8;

  static PriorSettings with_kappa(double kappa) {
    PriorSettings p;
    p.kappa = kappa;
    p.tau_soc = 10.0 * kappa;
    return p;
  }
};

/// Minnesota (y_D, x_D) and sum-of-coefficients (y_soc, x_soc) pseudo-data.
struct DummyObservations {
  Eigen::MatrixXd y_d;
  Eigen::MatrixXd x_d;
  Eigen::MatrixXd y_soc;
  Eigen::MatrixXd x_soc;
  double kappa = 0.0;
  double c = 0.0;
  double tau_soc = 0.0;
};

/// Least squares of z_t on (1, z_{t-1}); lags are formed within each segment
/// (NaN breaks a segment) and the pairs are pooled. `mu` is the mean of every
/// observed value. The residual sd uses n - 2 degrees of freedom and is
/// floored at s_floor_scale * max(1, max|z|).
Ar1Fit fit_ar1(std::span<const std::vector<double>> segments, double s_floor_scale = 1e-8);

/// fit_ar1 for every variable of `data`, one segment per country.
Ar1Stats estimate_ar1_stats(const PanelDataset& data, double s_floor_scale = 1e-8);

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_minnesota_dummies(const Ar1Stats& stats, double kappa, double c,
                                                                    std::size_t n_lags, std::size_t n_exog);

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_soc_dummies(const Ar1Stats& stats, double tau_soc,
                                                              std::size_t n_lags, std::size_t n_exog);

DummyObservations build_dummy_observations(const Ar1Stats& stats, const PriorSettings& settings, std::size_t n_lags,
                                           std::size_t n_exog);

}  // namespace pbvar
