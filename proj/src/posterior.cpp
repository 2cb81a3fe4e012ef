#include "pbvar/posterior.hpp"

#include "pbvar/errors.hpp"
#include "pbvar/parallel.hpp"
#include "pbvar/random.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace pbvar {

namespace {

void check_block(const char* name, const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, Eigen::Index n,
                 Eigen::Index k) {
  if (y.rows() == 0 && x.rows() == 0) return;
  if (y.rows() != x.rows() || y.cols() != n || x.cols() != k) {
    std::ostringstream os;
    os << "dimension mismatch in " << name << " block: y is " << y.rows() << "x" << y.cols() << ", x is "
       << x.rows() << "x" << x.cols() << "; expected N=" << n << " and K=" << k;
    throw InputError(os.str());
  }
}

}  // namespace

AugmentedSystem augment(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const DummyObservations& dummies) {
  const Eigen::Index n = y.cols();
  const Eigen::Index k = x.cols();
  if (y.rows() != x.rows()) throw InputError("dimension mismatch: data Y and X have different row counts");
  check_block("Minnesota", dummies.y_d, dummies.x_d, n, k);
  check_block("sum-of-coefficients", dummies.y_soc, dummies.x_soc, n, k);

  const Eigen::Index rows = y.rows() + dummies.y_d.rows() + dummies.y_soc.rows();
  AugmentedSystem out{Eigen::MatrixXd(rows, n), Eigen::MatrixXd(rows, k)};
  out.y << y, dummies.y_d, dummies.y_soc;
  out.x << x, dummies.x_d, dummies.x_soc;
  return out;
}

AugmentedSystem augment(const RegressionData& data, const DummyObservations& dummies) {
  return augment(data.Y, data.X, dummies);
}

PosteriorMoments compute_posterior_moments(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                                           std::span<const std::string> column_names) {
  constexpr const char* where = "posterior/compute_posterior_moments";
  if (y.rows() != x.rows()) throw NumericalError(where, "Y* and X* have different row counts");
  const Eigen::Index k = x.cols();
  const Eigen::Index n = y.cols();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < k) {
    std::ostringstream os;
    os << "X* is rank deficient (rank " << qr.rank() << " < K=" << k << "); dependent columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < k; ++j) {
      const auto col = perm(j);
      os << ' ';
      if (static_cast<std::size_t>(col) < column_names.size()) {
        os << column_names[static_cast<std::size_t>(col)];
      } else {
        os << '#' << col;
      }
    }
    throw NumericalError(where, os.str());
  }

  PosteriorMoments m;
  m.n_rows_aug = x.rows();
  m.dof = static_cast<double>(x.rows() - k + 2);
  if (m.dof <= static_cast<double>(n - 1)) {
    throw NumericalError(where, "inverse-Wishart degrees of freedom " + std::to_string(m.dof) +
                                    " do not exceed N-1; too few rows");
  }

  m.b_bar = qr.solve(y);
  const Eigen::MatrixXd resid = y - x * m.b_bar;
  m.omega_bar = resid.transpose() * resid;
  m.omega_bar = 0.5 * (m.omega_bar + m.omega_bar.transpose()).eval();
  m.gram = x.transpose() * x;

  // x P = Q R  =>  (x'x)^-1 = P R^-1 R^-T P'.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  m.gram_inv_factor = qr.colsPermutation() * r_inv;
  return m;
}

bool is_symmetric_positive_definite(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.allFinite()) return false;
  const double tol = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
  if (((m - m.transpose()).cwiseAbs().array() > tol).any()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return false;
  return (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all();
}

PosteriorSampler::PosteriorSampler(PosteriorMoments moments) : moments_(std::move(moments)) {
  constexpr const char* where = "posterior/sample_posterior";
  const auto n = moments_.n_vars();
  if (!is_symmetric_positive_definite(moments_.omega_bar)) {
    const double jitter = 1e-10 * moments_.omega_bar.trace() / static_cast<double>(n);
    moments_.omega_bar.diagonal().array() += jitter;
    jittered_ = true;
    if (!is_symmetric_positive_definite(moments_.omega_bar)) {
      throw NumericalError(where, "posterior scale matrix is not positive definite after jitter");
    }
  }
  omega_bar_chol_ = moments_.omega_bar.llt().matrixL();
}

PosteriorDraw PosteriorSampler::draw(std::uint64_t seed, std::size_t index) const {
  const auto n = moments_.n_vars();
  const auto k = moments_.n_regressors();
  auto rng = substream(seed, Stream::posterior, index);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Bartlett factor of Wishart(I, dof).
  Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::chi_squared_distribution<double> chi2(moments_.dof - static_cast<double>(i));
    bartlett(i, i) = std::sqrt(chi2(rng));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = normal(rng);
  }
  // Omega = L (A A')^-1 L' with L L' = omega_bar; T = L A^-T is a square root.
  const Eigen::MatrixXd bartlett_inv =
      bartlett.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd root = omega_bar_chol_ * bartlett_inv.transpose();

  PosteriorDraw d;
  d.omega = root * root.transpose();
  d.omega = 0.5 * (d.omega + d.omega.transpose()).eval();
  if (!is_symmetric_positive_definite(d.omega)) {
    throw NumericalError("posterior/sample_posterior", "draw " + std::to_string(index) +
                                                           " produced a covariance that is not positive definite");
  }

  Eigen::MatrixXd g(k, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) g(i, j) = normal(rng);
  }
  d.B = moments_.b_bar + moments_.gram_inv_factor * (g * root.transpose());
  return d;
}

std::vector<PosteriorDraw> sample_posterior(const PosteriorMoments& moments, const SamplerSettings& settings) {
  if (settings.n_draws <= settings.n_burn) {
    throw InputError("sampler needs n_draws > n_burn (got " + std::to_string(settings.n_draws) + " and " +
                     std::to_string(settings.n_burn) + ")");
  }
  const PosteriorSampler sampler(moments);
  std::vector<PosteriorDraw> draws(settings.retained());
  parallel_for(draws.size(), settings.workers,
               [&](std::size_t i) { draws[i] = sampler.draw(settings.seed, settings.n_burn + i); });
  return draws;
}

namespace {

void write_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.write(buf, 8);
}

double read_le(std::istream& in) {
  char buf[8];
  if (!in.read(buf, 8)) throw InputError("truncated draw file");
  std::uint64_t bits = 0;
  std::memcpy(&bits, buf, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  auto p = stem;
  p += ext;
  return p;
}

}  // namespace

void write_draws(const std::filesystem::path& stem, std::span<const PosteriorDraw> draws) {
  nlohmann::json meta;
  meta["format"] = "float64-le-row-major";
  meta["n_draws"] = draws.size();
  meta["layout"] = {"B", "omega"};
  meta["B"] = {{"rows", draws.empty() ? 0 : draws[0].B.rows()}, {"cols", draws.empty() ? 0 : draws[0].B.cols()}};
  meta["omega"] = {{"rows", draws.empty() ? 0 : draws[0].omega.rows()},
                   {"cols", draws.empty() ? 0 : draws[0].omega.cols()}};

  std::ofstream bin(with_ext(stem, ".bin"), std::ios::binary);
  if (!bin) throw InputError("cannot write " + with_ext(stem, ".bin").string());
  for (const auto& d : draws) {
    for (Eigen::Index i = 0; i < d.B.rows(); ++i)
      for (Eigen::Index j = 0; j < d.B.cols(); ++j) write_le(bin, d.B(i, j));
    for (Eigen::Index i = 0; i < d.omega.rows(); ++i)
      for (Eigen::Index j = 0; j < d.omega.cols(); ++j) write_le(bin, d.omega(i, j));
  }
  std::ofstream(with_ext(stem, ".json")) << meta.dump(2) << '\n';
}

std::vector<PosteriorDraw> read_draws(const std::filesystem::path& stem) {
  std::ifstream js(with_ext(stem, ".json"));
  if (!js) throw InputError("cannot open " + with_ext(stem, ".json").string());
  const auto meta = nlohmann::json::parse(js);
  const auto n_draws = meta.at("n_draws").get<std::size_t>();
  const auto k = meta.at("B").at("rows").get<Eigen::Index>();
  const auto n = meta.at("B").at("cols").get<Eigen::Index>();

  std::ifstream bin(with_ext(stem, ".bin"), std::ios::binary);
  if (!bin) throw InputError("cannot open " + with_ext(stem, ".bin").string());
  std::vector<PosteriorDraw> draws(n_draws);
  for (auto& d : draws) {
    d.B.resize(k, n);
    d.omega.resize(n, n);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d.B(i, j) = read_le(bin);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d.omega(i, j) = read_le(bin);
  }
  return draws;
}

}  // namespace pbvar
