#include "oracles.hpp"
#include "pbvar/errors.hpp"
#include "pbvar/posterior.hpp"
#include "pbvar/random.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace pbvar;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

DummyObservations empty_dummies(Eigen::Index n, Eigen::Index k) {
  DummyObservations d;
  d.y_d.resize(0, n);
  d.x_d.resize(0, k);
  d.y_soc.resize(0, n);
  d.x_soc.resize(0, k);
  return d;
}

PosteriorMoments small_system(std::uint64_t seed, Eigen::Index rows = 60) {
  auto rng = substream(seed, Stream::test, 0);
  const Eigen::MatrixXd x = gaussian(rows, 3, rng);
  Eigen::MatrixXd b(3, 2);
  b << 0.5, -0.2, 0.1, 0.3, -0.4, 0.0;
  const Eigen::MatrixXd y = x * b + 0.5 * gaussian(rows, 2, rng);
  return compute_posterior_moments(y, x);
}

// Omega ~ IW(scale, dof) for integer dof, as the inverse of a sum of dof outer products.
Eigen::MatrixXd inverse_wishart_by_sum(const Eigen::MatrixXd& scale, int dof, std::mt19937_64& rng) {
  const Eigen::MatrixXd root = scale.inverse().llt().matrixL();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(scale.rows(), scale.cols());
  for (int i = 0; i < dof; ++i) {
    const Eigen::VectorXd z = root * gaussian(scale.rows(), 1, rng);
    w += z * z.transpose();
  }
  return w.inverse();
}

}  // namespace

TEST_SUITE("posterior") {

TEST_CASE("augment with empty blocks is the identity") {
  auto rng = substream(1, Stream::test, 0);
  const Eigen::MatrixXd y = gaussian(6, 2, rng);
  const Eigen::MatrixXd x = gaussian(6, 3, rng);
  const auto s = augment(y, x, empty_dummies(2, 3));
  CHECK(s.y == y);
  CHECK(s.x == x);
}

TEST_CASE("augment stacks data, minnesota and soc rows") {
  auto rng = substream(2, Stream::test, 0);
  Ar1Stats st{Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 3.0), {false}};
  const auto d = build_dummy_observations(st, PriorSettings{}, 1, 1);
  const auto s = augment(gaussian(6, 1, rng), gaussian(6, 2, rng), d);
  CHECK(s.y.rows() == 6 + 3 + 1);
  CHECK(s.x.rows() == 6 + 3 + 1);
  CHECK(s.x.row(6) == d.x_d.row(0));
  CHECK(s.y.row(9) == d.y_soc.row(0));
}

TEST_CASE("augment rejects a K mismatch") {
  auto rng = substream(3, Stream::test, 0);
  Ar1Stats st{Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 3.0), {false}};
  const auto d = build_dummy_observations(st, PriorSettings{}, 1, 2);
  CHECK_THROWS_AS(augment(gaussian(6, 1, rng), gaussian(6, 2, rng), d), InputError);
}

TEST_CASE("orthonormal design with exact fit") {
  auto rng = substream(4, Stream::test, 0);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(12, 4, rng)).householderQ() *
                            Eigen::MatrixXd::Identity(12, 4);
  const Eigen::MatrixXd b0 = gaussian(4, 3, rng);
  const auto m = compute_posterior_moments(q * b0, q);
  CHECK((m.b_bar - b0).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(m.omega_bar.cwiseAbs().maxCoeff() < 1e-24);
  CHECK(m.dof == 12 - 4 + 2);
}

TEST_CASE("random 40x3 system matches the high-precision oracle") {
  auto rng = substream(5, Stream::test, 0);
  const Eigen::MatrixXd x = gaussian(40, 3, rng);
  const Eigen::MatrixXd y = gaussian(40, 2, rng);
  const auto m = compute_posterior_moments(y, x);
  const auto ref = oracle::high_precision_least_squares(y, x);
  CHECK(((m.b_bar - ref).cwiseAbs().array() / ref.cwiseAbs().array().max(1e-300)).maxCoeff() < 1e-10);
}

TEST_CASE("gram inverse factor") {
  auto rng = substream(6, Stream::test, 0);
  const Eigen::MatrixXd x = gaussian(30, 5, rng);
  const auto m = compute_posterior_moments(gaussian(30, 2, rng), x);
  const Eigen::MatrixXd prod = m.gram_inv_factor * m.gram_inv_factor.transpose() * m.gram;
  CHECK(prod.isApprox(Eigen::MatrixXd::Identity(5, 5), 1e-10));
}

TEST_CASE("duplicated column names the dependent column") {
  auto rng = substream(7, Stream::test, 0);
  Eigen::MatrixXd x = gaussian(20, 3, rng);
  x.col(2) = x.col(0);
  const std::vector<std::string> names{"a", "b", "c"};
  try {
    compute_posterior_moments(gaussian(20, 1, rng), x, names);
    FAIL("expected an error");
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    CHECK(what.find("rank deficient") != std::string::npos);
    CHECK((what.find(" a") != std::string::npos || what.find(" c") != std::string::npos));
    CHECK(std::string(e.where()) == "posterior/compute_posterior_moments");
  }
}

TEST_CASE("no dummies gives pooled OLS") {
  auto rng = substream(8, Stream::test, 0);
  const Eigen::MatrixXd x = gaussian(50, 6, rng);
  const Eigen::MatrixXd y = gaussian(50, 3, rng);
  const auto s = augment(y, x, empty_dummies(3, 6));
  const auto m = compute_posterior_moments(s.y, s.x);
  const Eigen::MatrixXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  CHECK((m.b_bar - ols).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("too few rows for the inverse-Wishart") {
  auto rng = substream(9, Stream::test, 0);
  // dof = 5 - 5 + 2 = 2 <= N - 1 = 2
  CHECK_THROWS_AS(compute_posterior_moments(gaussian(5, 3, rng), gaussian(5, 5, rng)), NumericalError);
}

TEST_CASE("sampler moments over 5000 draws") {
  const auto m = small_system(10);
  SamplerSettings s;
  s.n_draws = 5000;
  s.n_burn = 0;
  s.seed = 3;
  const auto draws = sample_posterior(m, s);
  const double n = static_cast<double>(draws.size());

  Eigen::MatrixXd sum_b = Eigen::MatrixXd::Zero(3, 2), sq_b = sum_b;
  Eigen::MatrixXd sum_o = Eigen::MatrixXd::Zero(2, 2), sq_o = sum_o;
  for (const auto& d : draws) {
    CHECK(is_symmetric_positive_definite(d.omega));
    sum_b += d.B;
    sq_b += d.B.cwiseProduct(d.B);
    sum_o += d.omega;
    sq_o += d.omega.cwiseProduct(d.omega);
  }
  const Eigen::MatrixXd mean_b = sum_b / n;
  const Eigen::MatrixXd se_b = ((sq_b / n - mean_b.cwiseProduct(mean_b)) / n).cwiseSqrt();
  CHECK(((mean_b - m.b_bar).cwiseAbs().array() <= 4 * se_b.array()).all());

  const Eigen::MatrixXd mean_o = sum_o / n;
  const Eigen::MatrixXd se_o = ((sq_o / n - mean_o.cwiseProduct(mean_o)) / n).cwiseSqrt();
  const Eigen::MatrixXd expected = m.omega_bar / (m.dof - 2 - 1);
  CHECK(((mean_o - expected).cwiseAbs().array() <= 4 * se_o.array()).all());
}

TEST_CASE("same seed gives bit-identical streams for any worker count") {
  const auto m = small_system(11);
  SamplerSettings s;
  s.n_draws = 300;
  s.n_burn = 100;
  s.seed = 7;
  const auto a = sample_posterior(m, s);
  const auto b = sample_posterior(m, s);
  s.workers = 3;
  const auto c = sample_posterior(m, s);
  REQUIRE(a.size() == 200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].B == b[i].B);
    CHECK(a[i].omega == b[i].omega);
    CHECK(a[i].B == c[i].B);
    CHECK(a[i].omega == c[i].omega);
  }
  s.seed = 8;
  CHECK(sample_posterior(m, s)[0].B != a[0].B);
}

TEST_CASE("burn-in keeps the retained indices") {
  const auto m = small_system(12);
  const PosteriorSampler sampler(m);
  SamplerSettings s;
  s.n_draws = 10;
  s.n_burn = 4;
  s.seed = 5;
  const auto draws = sample_posterior(m, s);
  REQUIRE(draws.size() == 6);
  CHECK(draws[0].B == sampler.draw(5, 4).B);
  s.n_burn = 10;
  CHECK_THROWS_AS(sample_posterior(m, s), InputError);
}

TEST_CASE("singular scale matrix is jittered once") {
  auto m = small_system(13);
  m.omega_bar << 1.0, 1.0, 1.0, 1.0;
  const PosteriorSampler sampler(m);
  CHECK(sampler.jittered());
  CHECK(is_symmetric_positive_definite(sampler.draw(1, 0).omega));

  m.omega_bar.setZero();
  CHECK_THROWS_AS(PosteriorSampler{m}, NumericalError);
}

TEST_CASE("draw dump round trip") {
  const auto m = small_system(14);
  SamplerSettings s;
  s.n_draws = 5;
  s.n_burn = 0;
  const auto draws = sample_posterior(m, s);
  const auto stem = std::filesystem::temp_directory_path() / "pbvar_test_draws";
  write_draws(stem, draws);
  const auto back = read_draws(stem);
  REQUIRE(back.size() == draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    CHECK(back[i].B == draws[i].B);
    CHECK(back[i].omega == draws[i].omega);
  }
  std::filesystem::remove(stem.string() + ".bin");
  std::filesystem::remove(stem.string() + ".json");
}

TEST_CASE("90% intervals are calibrated when truth is drawn from the prior") {
  // Prior pseudo-data (y_d, x_d) fixed; truth drawn from the implied prior
  // IW(S_d, T_d - K + 2), B | Omega ~ N(B_d, Omega (x) (x_d'x_d)^-1).
  auto rng = substream(15, Stream::test, 0);
  const Eigen::Index n = 2, k = 3, t_d = 8, t = 20;
  const Eigen::MatrixXd x_d = gaussian(t_d, k, rng);
  const Eigen::MatrixXd y_d = gaussian(t_d, n, rng);
  const Eigen::MatrixXd gram_d = x_d.transpose() * x_d;
  const Eigen::MatrixXd b_d = gram_d.ldlt().solve(x_d.transpose() * y_d);
  const Eigen::MatrixXd s_d = (y_d - x_d * b_d).transpose() * (y_d - x_d * b_d);
  const Eigen::MatrixXd gram_d_inv_root = gram_d.inverse().llt().matrixL();
  DummyObservations dummies = empty_dummies(n, k);
  dummies.y_d = y_d;
  dummies.x_d = x_d;

  int covered = 0;
  int total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::MatrixXd omega = inverse_wishart_by_sum(s_d, static_cast<int>(t_d - k + 2), rng);
    const Eigen::MatrixXd omega_root = omega.llt().matrixL();
    const Eigen::MatrixXd b = b_d + gram_d_inv_root * gaussian(k, n, rng) * omega_root.transpose();
    const Eigen::MatrixXd x = gaussian(t, k, rng);
    const Eigen::MatrixXd y = x * b + gaussian(t, n, rng) * omega_root.transpose();

    const auto sys = augment(y, x, dummies);
    const auto m = compute_posterior_moments(sys.y, sys.x);
    SamplerSettings s;
    s.n_draws = 1000;
    s.n_burn = 0;
    s.seed = static_cast<std::uint64_t>(rep) + 100;
    const auto draws = sample_posterior(m, s);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        std::vector<double> vals;
        for (const auto& d : draws) vals.push_back(d.B(i, j));
        const double lo = oracle::sorted_quantile(vals, 0.05);
        const double hi = oracle::sorted_quantile(vals, 0.95);
        covered += (b(i, j) >= lo && b(i, j) <= hi) ? 1 : 0;
        ++total;
      }
    }
  }
  const double rate = static_cast<double>(covered) / total;
  MESSAGE("coverage " << rate);
  CHECK(rate >= 0.85);
  CHECK(rate <= 0.95);
}

}  // TEST_SUITE
