#pragma once

#include "pbvar/panel_data.hpp"
#include "pbvar/prior.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pbvar {

/// Data rows stacked over Minnesota and sum-of-coefficients pseudo-rows.
struct AugmentedSystem {
  Eigen::MatrixXd y;
  Eigen::MatrixXd x;
};

AugmentedSystem augment(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const DummyObservations& dummies);
AugmentedSystem augment(const RegressionData& data, const DummyObservations& dummies);

/// Normal-inverse-Wishart posterior:
///   Omega | Y ~ IW(omega_bar, dof),  vec(B) | Omega ~ N(vec(b_bar), Omega (x) gram^-1).
struct PosteriorMoments {
  Eigen::MatrixXd b_bar;            // K x N
  Eigen::MatrixXd omega_bar;        // N x N residual cross-product
  Eigen::MatrixXd gram;             // K x K, X*'X*
  Eigen::MatrixXd gram_inv_factor;  // F with F F' = gram^-1
  double dof = 0.0;
  Eigen::Index n_rows_aug = 0;

  Eigen::Index n_regressors() const { return b_bar.rows(); }
  Eigen::Index n_vars() const { return b_bar.cols(); }
};

/// Solves the augmented least-squares problem with column-pivoted QR.
/// dof = n_rows_aug - K + 2. Throws NumericalError naming the dependent
/// columns when X* is rank deficient.
PosteriorMoments compute_posterior_moments(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                                           std::span<const std::string> column_names = {});

struct PosteriorDraw {
  Eigen::MatrixXd B;      // K x N
  Eigen::MatrixXd omega;  // N x N
};

struct SamplerSettings {
  std::size_t n_draws = 10000;
  std::size_t n_burn = 8000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  std::size_t retained() const { return n_draws - n_burn; }
};

/// Exact i.i.d. sampler for the conjugate posterior. Draw `i` of seed `s` is a
/// pure function of (moments, s, i).
class PosteriorSampler {
 public:
  explicit PosteriorSampler(PosteriorMoments moments);

  PosteriorDraw draw(std::uint64_t seed, std::size_t index) const;

  const PosteriorMoments& moments() const { return moments_; }
  /// True when omega_bar needed diagonal jitter to factorize.
  bool jittered() const { return jittered_; }

 private:
  PosteriorMoments moments_;
  Eigen::MatrixXd omega_bar_chol_;  // lower L with L L' = omega_bar
  bool jittered_ = false;
};

/// Retained draws with indices [n_burn, n_draws). Burn-in draws are never
/// generated: the sampler is i.i.d., so discarding them changes nothing.
std::vector<PosteriorDraw> sample_posterior(const PosteriorMoments& moments, const SamplerSettings& settings);

bool is_symmetric_positive_definite(const Eigen::MatrixXd& m);

/// Binary dump: `<stem>.bin` holds each draw as row-major B then row-major
/// Omega in little-endian float64; `<stem>.json` records the shapes.
void write_draws(const std::filesystem::path& stem, std::span<const PosteriorDraw> draws);
std::vector<PosteriorDraw> read_draws(const std::filesystem::path& stem);

}  // namespace pbvar
