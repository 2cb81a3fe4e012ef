#pragma once

#include "pbvar/identification.hpp"
#include "pbvar/panel_data.hpp"
#include "pbvar/posterior.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pbvar {

inline const std::vector<double> kDefaultProbs{0.05, 0.16, 0.50, 0.84, 0.95};

/// Row j is the response at horizon j: Psi_j * impact. Needs psi.horizon() > h_irf.
Eigen::MatrixXd irf(const MaCoefficients& psi, const StructuralShock& shock, std::size_t h_irf);
Eigen::MatrixXd irf(const PosteriorDraw& draw, const StructuralShock& shock, std::size_t n_lags, std::size_t h_irf);

/// Share of variable v's H-step forecast error variance due to `shock`.
double fevd_share(const MaCoefficients& psi, const StructuralShock& shock, std::size_t variable, std::size_t horizon);

/// Row h-1 holds fevd_share for every variable at horizon h = 1..max_horizon.
Eigen::MatrixXd fevd_table(const MaCoefficients& psi, const StructuralShock& shock, std::size_t max_horizon);

/// Pointwise empirical quantiles (linear interpolation between order
/// statistics, position (n-1)p). values[i] has the shape of each draw.
struct QuantileTable {
  std::vector<double> probs;
  std::vector<Eigen::MatrixXd> values;

  const Eigen::MatrixXd& at(double prob) const;
};

QuantileTable summarize(std::span<const Eigen::MatrixXd> draws, std::span<const double> probs);

struct IrfResult {
  std::vector<std::string> variables;
  std::size_t horizon = 0;  // rows are horizons 0..horizon
  QuantileTable bands;
  std::vector<Eigen::MatrixXd> raw;  // empty unless retained
  std::string shock_scale = "one standard deviation";
};

struct FevdResult {
  std::vector<std::string> variables;
  std::size_t horizon = 0;  // rows are horizons 1..horizon
  QuantileTable shares;
};

/// News-shock series q' A^-1 (y_t - x_t B) over the rows of `data`.
Eigen::VectorXd structural_shock_series(const RegressionData& data, const PosteriorDraw& draw,
                                        const StructuralShock& shock);

struct IdentificationSettings {
  std::size_t target = 0;
  std::size_t horizon = 5;
  /// Orthogonal-pair mode: the first shock targets this variable and the
  /// reported shock is made orthogonal to it.
  std::optional<std::size_t> orthogonal_to;
};

struct AnalysisSettings {
  std::size_t irf_horizon = 20;
  std::vector<double> probs = kDefaultProbs;
  bool retain_draws = false;
  std::size_t workers = 1;
};

struct AnalysisOutput {
  IrfResult irf;
  FevdResult fevd;
  std::vector<double> achieved_shares;
  std::vector<double> target_impacts;  // impact[target] per draw
  std::size_t degenerate_draws = 0;
  /// Per-row posterior median of the shock series; empty without data.
  Eigen::VectorXd median_shock_series;
};

/// Re-identifies the shock for every draw, then summarizes IRFs and FEVDs.
/// When `data` is given the structural shock series is also summarized.
AnalysisOutput analyze_draws(std::span<const PosteriorDraw> draws, const std::vector<std::string>& variables,
                             std::size_t n_lags, const IdentificationSettings& ident,
                             const AnalysisSettings& settings, const RegressionData* data = nullptr);

/// `variable,horizon,prob,value`
void write_irf_csv(const IrfResult& result, std::ostream& out);
/// `variable,horizon,prob,share`
void write_fevd_csv(const FevdResult& result, std::ostream& out);

std::string format_number(double v);

}  // namespace pbvar
