#pragma once

#include "pbvar/analysis.hpp"
#include "pbvar/panel_data.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pbvar {

/// Structural panel DGP with an anticipated shock:
///   w_it = sum_l lags[l-1] w_i,t-l + impact eps_it,   Z_it = alpha_i + w_it,
/// eps_it ~ N(0, I). Column `news` of `impact` is the news shock; it has no
/// contemporaneous effect on variable `target` and does not move it before `delay`.
struct NewsDgp {
  std::vector<std::string> variables;
  std::size_t target = 0;
  std::size_t news = 1;
  Eigen::MatrixXd impact;
  std::vector<Eigen::MatrixXd> lags;
  std::size_t delay = 1;

  std::size_t n_countries = 20;
  int first_year = 1960;
  std::size_t n_years = 60;
  /// Optional per-country (first_year, n_years); overrides the two fields above.
  std::vector<std::pair<int, std::size_t>> spans;
  double fixed_effect_sd = 1.0;
  std::size_t burn_in = 100;
  std::size_t irf_horizon = 20;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  std::size_t n_vars() const { return variables.size(); }
};

/// Throws InputError when dimensions disagree, the dynamics are unstable, or
/// the news column violates the delay structure.
void validate_dgp(const NewsDgp& dgp);

/// Rows 0..horizon of Psi_j * impact[:, news].
Eigen::MatrixXd true_news_irf(const NewsDgp& dgp, std::size_t horizon);

struct SimulatedPanel {
  PanelDataset panel;
  PanelDataset shocks;  // structural shocks eps_1..eps_N on the panel's grid
  Eigen::MatrixXd fixed_effects;  // countries x N
  Eigen::MatrixXd true_irf;       // (irf_horizon + 1) x N
};

SimulatedPanel simulate_panel(const NewsDgp& dgp);

/// N = 4, two true lags, news delay 1, 20 countries x 60 years.
NewsDgp desk_scale_dgp();
/// N = 14 extension of the desk DGP, 40 countries x 50 years.
NewsDgp benchmark_scale_dgp();

/// Values of shock column `column` at each regression row.
std::vector<double> align_shocks(const PanelDataset& shocks, std::size_t column, std::span<const RowKey> rows);

struct RecoveryReport {
  double shock_correlation = 0.0;
  double max_irf_deviation = 0.0;
  double band_coverage = 0.0;
};

/// Compares an estimate against the simulator's truth: Pearson correlation of
/// the shock series, max |median IRF - true IRF|, and the share of
/// (horizon, variable) cells inside the outermost band.
RecoveryReport recovery_metrics(const IrfResult& estimated, std::span<const double> estimated_shocks,
                                 std::span<const double> true_shocks, const Eigen::MatrixXd& true_irf);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace pbvar
