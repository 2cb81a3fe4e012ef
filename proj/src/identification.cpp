#include "pbvar/identification.hpp"

#include "pbvar/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace pbvar {

Eigen::MatrixXd lag_matrix(const Eigen::MatrixXd& b, std::size_t n_vars, std::size_t lag) {
  const auto n = static_cast<Eigen::Index>(n_vars);
  return b.block((static_cast<Eigen::Index>(lag) - 1) * n, 0, n, n).transpose();
}

Eigen::MatrixXd coefficients_from_lag_matrices(const std::vector<Eigen::MatrixXd>& lags, std::size_t n_exog) {
  if (lags.empty()) throw InputError("at least one lag matrix is required");
  const auto n = lags.front().rows();
  const auto p = static_cast<Eigen::Index>(lags.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n * p + static_cast<Eigen::Index>(n_exog), n);
  for (Eigen::Index l = 0; l < p; ++l) b.block(l * n, 0, n, n) = lags[static_cast<std::size_t>(l)].transpose();
  return b;
}

Eigen::MatrixXd companion_matrix(const Eigen::MatrixXd& b, std::size_t n_vars, std::size_t n_lags) {
  const auto n = static_cast<Eigen::Index>(n_vars);
  const auto p = static_cast<Eigen::Index>(n_lags);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n * p, n * p);
  for (Eigen::Index l = 0; l < p; ++l) f.block(0, l * n, n, n) = lag_matrix(b, n_vars, static_cast<std::size_t>(l + 1));
  if (p > 1) f.bottomLeftCorner(n * (p - 1), n * (p - 1)).setIdentity();
  return f;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

MaCoefficients ma_coefficients(const Eigen::MatrixXd& b, std::size_t n_vars, std::size_t n_lags,
                               std::size_t horizon) {
  if (horizon < 1) throw InputError("MA horizon must be at least 1");
  if (n_lags < 1) throw InputError("lag count must be at least 1");
  const auto n = static_cast<Eigen::Index>(n_vars);
  if (b.cols() != n || b.rows() < n * static_cast<Eigen::Index>(n_lags)) {
    throw InputError("coefficient matrix does not hold N*L lag rows");
  }

  std::vector<Eigen::MatrixXd> lags;
  lags.reserve(n_lags);
  for (std::size_t l = 1; l <= n_lags; ++l) lags.push_back(lag_matrix(b, n_vars, l));

  // F^j J' has blocks (Psi_j, Psi_{j-1}, ..., Psi_{j-L+1}); multiplying by F
  // shifts the blocks down and forms the new top block from the lag row.
  MaCoefficients out;
  out.psi.reserve(horizon);
  out.psi.push_back(Eigen::MatrixXd::Identity(n, n));
  for (std::size_t j = 1; j < horizon; ++j) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t l = 1; l <= std::min(j, n_lags); ++l) next.noalias() += lags[l - 1] * out.psi[j - l];
    out.psi.push_back(std::move(next));
  }
  return out;
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& omega) {
  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  if (omega.rows() == 0 || omega.rows() != omega.cols() || llt.info() != Eigen::Success ||
      !(llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
    throw NumericalError("identification/identify_news_shock", "covariance matrix is not positive definite");
  }
  return llt.matrixL();
}

namespace {

// Orthonormal basis of {q : C q = 0} for constraint rows C.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& constraints, Eigen::Index n) {
  if (constraints.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(constraints.transpose());
  const Eigen::Index rank = qr.rank();
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - rank);
}

bool abs_lex_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  constexpr double tol = 1e-12;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = std::abs(a(i));
    const double y = std::abs(b(i));
    if (x > y + tol) return true;
    if (y > x + tol) return false;
  }
  return false;
}

}  // namespace

StructuralShock identify_max_share(const MaCoefficients& psi, const Eigen::MatrixXd& a_tilde, std::size_t target,
                                   std::size_t horizon, const MaxShareOptions& options) {
  const Eigen::Index n = a_tilde.rows();
  if (horizon < 1) throw InputError("identification horizon must be at least 1");
  if (horizon > psi.horizon()) {
    throw InputError("identification horizon " + std::to_string(horizon) + " exceeds MA length " +
                     std::to_string(psi.horizon()));
  }
  if (target >= static_cast<std::size_t>(n)) throw InputError("target index out of range");
  if (psi.n_vars() != n || a_tilde.cols() != n) throw InputError("MA coefficients and factor disagree on N");

  const auto m = static_cast<Eigen::Index>(target);
  // Row j of `loadings` is e_m' Psi_j A.
  Eigen::MatrixXd loadings(static_cast<Eigen::Index>(horizon), n);
  for (std::size_t j = 0; j < horizon; ++j) {
    loadings.row(static_cast<Eigen::Index>(j)) = psi.psi[j].row(m) * a_tilde;
  }
  const Eigen::MatrixXd quad = loadings.transpose() * loadings;
  const double fev = quad.trace();
  if (!(fev > 0.0)) {
    throw NumericalError("identification/identify_news_shock", "target variable has no innovation variance");
  }

  Eigen::MatrixXd constraints(static_cast<Eigen::Index>(options.orthogonal_to.size()) + (options.zero_impact ? 1 : 0),
                              n);
  Eigen::Index row = 0;
  if (options.zero_impact) constraints.row(row++) = a_tilde.row(m);
  for (const auto& v : options.orthogonal_to) constraints.row(row++) = v.transpose();

  const Eigen::MatrixXd basis = null_space(constraints, n);
  if (basis.cols() == 0) throw InputError("constraint space is empty; too few variables for the requested shocks");

  Eigen::MatrixXd projected = basis.transpose() * quad * basis;
  projected = 0.5 * (projected + projected.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(projected);
  const auto& values = eig.eigenvalues();
  const Eigen::Index top = values.size() - 1;

  StructuralShock shock;
  shock.a_tilde = a_tilde;
  shock.target = target;
  shock.horizon = horizon;

  Eigen::VectorXd q = basis * eig.eigenvectors().col(top);
  for (Eigen::Index k = top - 1; k >= 0 && values(k) >= values(top) - 1e-10 * fev; --k) {
    shock.degenerate = true;
    const Eigen::VectorXd candidate = basis * eig.eigenvectors().col(k);
    if (abs_lex_greater(candidate, q)) q = candidate;
  }
  q.normalize();

  Eigen::VectorXd impact = a_tilde * q;
  if (options.zero_impact) {
    const double scale = a_tilde.row(m).norm();
    if (std::abs(impact(m)) > 1e-10 * std::max(scale, 1e-300)) {
      throw NumericalError("identification/identify_news_shock", "zero-impact constraint violated");
    }
    impact(m) = 0.0;
  }

  // Positive response of the target at the first horizon where it moves.
  const double tol = 1e-12 * std::sqrt(fev);
  for (const auto& p : psi.psi) {
    const double r = p.row(m).dot(impact);
    if (std::abs(r) > tol) {
      if (r < 0.0) {
        q = -q;
        impact = -impact;
        if (options.zero_impact) impact(m) = 0.0;
      }
      break;
    }
  }

  shock.q = q;
  shock.impact = impact;
  shock.achieved_share = std::clamp(q.dot(quad * q) / fev, 0.0, 1.0);
  return shock;
}

StructuralShock identify_news_shock(const MaCoefficients& psi, const Eigen::MatrixXd& omega, std::size_t target,
                                    std::size_t horizon) {
  return identify_max_share(psi, cholesky_factor(omega), target, horizon);
}

std::pair<StructuralShock, StructuralShock> identify_orthogonal_pair(const MaCoefficients& psi,
                                                                     const Eigen::MatrixXd& omega,
                                                                     std::size_t first_target,
                                                                     std::size_t second_target, std::size_t horizon) {
  if (omega.rows() < 3) throw InputError("orthogonal shock pair needs at least 3 variables");
  if (first_target == second_target) throw InputError("orthogonal shock pair needs two distinct targets");
  const Eigen::MatrixXd a = cholesky_factor(omega);
  auto first = identify_max_share(psi, a, first_target, horizon);
  MaxShareOptions opts;
  opts.orthogonal_to.push_back(first.q);
  auto second = identify_max_share(psi, a, second_target, horizon, opts);
  return {std::move(first), std::move(second)};
}

}  // namespace pbvar
