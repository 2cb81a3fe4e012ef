#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace pbvar {

/// Reduced-form moving-average matrices Psi_0 = I, Psi_1, ..., Psi_{H-1}.
struct MaCoefficients {
  std::vector<Eigen::MatrixXd> psi;

  std::size_t horizon() const { return psi.size(); }
  Eigen::Index n_vars() const { return psi.empty() ? 0 : psi.front().rows(); }
};

/// Lag matrix A_l of Z_t = sum_l A_l Z_{t-l} + ..., read from the regression
/// layout (rows (l-1)N..lN-1 of B hold A_l').
Eigen::MatrixXd lag_matrix(const Eigen::MatrixXd& b, std::size_t n_vars, std::size_t lag);

/// Inverse of lag_matrix: stacks A_1', ..., A_L' over `n_exog` zero rows.
Eigen::MatrixXd coefficients_from_lag_matrices(const std::vector<Eigen::MatrixXd>& lags, std::size_t n_exog = 0);

/// NL x NL companion matrix.
Eigen::MatrixXd companion_matrix(const Eigen::MatrixXd& b, std::size_t n_vars, std::size_t n_lags);

double spectral_radius(const Eigen::MatrixXd& m);

/// Psi_j = J F^j J' for the companion matrix F, propagated block-wise so the
/// NL x NL power is never formed. Exogenous rows of `b` are ignored.
MaCoefficients ma_coefficients(const Eigen::MatrixXd& b, std::size_t n_vars, std::size_t n_lags,
                               std::size_t horizon);

/// An identified structural shock: unit rotation q of the factor a_tilde.
struct StructuralShock {
  Eigen::VectorXd q;
  Eigen::VectorXd impact;  // a_tilde * q
  Eigen::MatrixXd a_tilde;
  std::size_t target = 0;
  std::size_t horizon = 0;
  double achieved_share = 0.0;
  bool degenerate = false;  // top eigenvalue was tied
};

struct MaxShareOptions {
  /// Impose zero impact on the target (news shock). Off gives the plain
  /// max-share problem.
  bool zero_impact = true;
  /// Extra directions q must be orthogonal to.
  std::vector<Eigen::VectorXd> orthogonal_to;
};

/// Maximizes the share of the target's H-step forecast error variance,
/// sum_{j<H} (e_m' Psi_j A q)^2 / FEV_m(H), over unit q in the null space of
/// the constraints. Solved as the top eigenvector of the projected quadratic
/// form. Uses psi[0..H-1].
StructuralShock identify_max_share(const MaCoefficients& psi, const Eigen::MatrixXd& a_tilde, std::size_t target,
                                   std::size_t horizon, const MaxShareOptions& options = {});

/// News shock with a_tilde = chol(omega).
StructuralShock identify_news_shock(const MaCoefficients& psi, const Eigen::MatrixXd& omega, std::size_t target,
                                    std::size_t horizon);

/// First shock is the news shock for `first_target`; the second maximizes the
/// `second_target` share subject to its own zero impact and q_2 ⟂ q_1.
std::pair<StructuralShock, StructuralShock> identify_orthogonal_pair(const MaCoefficients& psi,
                                                                     const Eigen::MatrixXd& omega,
                                                                     std::size_t first_target,
                                                                     std::size_t second_target, std::size_t horizon);

/// Lower-triangular Cholesky factor; throws NumericalError if omega is not PD.
Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& omega);

}  // namespace pbvar
