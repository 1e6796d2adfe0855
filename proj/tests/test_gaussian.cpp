#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "gmc/gaussian.hpp"
#include "oracles.hpp"

using gmc::GaussianModel;
using gmc::MaskedSignal;
using gmc::NoiseModel;
using gmc::SymMatrix;

namespace {

GaussianModel two_dim_model(double rho) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, rho, rho, 1.0;
  return GaussianModel(Eigen::VectorXd::Zero(2), SymMatrix(cov));
}

Eigen::VectorXd single(double v) {
  Eigen::VectorXd x(1);
  x << v;
  return x;
}

}  // namespace

TEST_CASE("MaskedSignal validation") {
  CHECK_THROWS_AS(MaskedSignal(3, {0, 0}, Eigen::VectorXd::Zero(2)), gmc::DimensionMismatch);
  CHECK_THROWS_AS(MaskedSignal(3, {1, 0}, Eigen::VectorXd::Zero(2)), gmc::DimensionMismatch);
  CHECK_THROWS_AS(MaskedSignal(3, {0, 3}, Eigen::VectorXd::Zero(2)), gmc::DimensionMismatch);
  CHECK_THROWS_AS(MaskedSignal(3, {0}, Eigen::VectorXd::Zero(2)), gmc::DimensionMismatch);
  CHECK_NOTHROW(MaskedSignal(3, {}, Eigen::VectorXd(0)));
}

TEST_CASE("NoiseModel") {
  CHECK(NoiseModel::zero().is_zero());
  CHECK(NoiseModel::isotropic(0.0).is_zero());
  CHECK_FALSE(NoiseModel::isotropic(0.5).is_zero());
  CHECK(NoiseModel::isotropic(0.5).sigma2() == 0.5);
  CHECK_THROWS_AS(NoiseModel::isotropic(-1.0), gmc::Error);
}

TEST_CASE("conditional mean of a correlated pair") {
  const GaussianModel model = two_dim_model(0.5);
  const MaskedSignal signal(2, {0}, single(1.0));
  const Eigen::VectorXd estimate = gmc::map_estimate(model, signal, NoiseModel::zero());
  // E[f2 | f1 = 1] = rho * 1 for a unit-variance pair
  CHECK(estimate(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(estimate(1) == doctest::Approx(0.5).epsilon(1e-12));

  // cross-check against the constrained minimizer of the quadratic objective
  const Eigen::VectorXd reference = oracle::map_kkt_zero_noise(model, signal);
  CHECK((estimate - reference).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("full observation with zero noise returns the observations") {
  std::mt19937_64 rng(5);
  const GaussianModel model = oracle::random_model(5, rng);
  Eigen::VectorXd y(5);
  y << 4.0, 2.0, 3.5, 1.0, 5.0;
  const MaskedSignal signal(5, {0, 1, 2, 3, 4}, y);
  const Eigen::VectorXd estimate = gmc::map_estimate(model, signal, NoiseModel::zero());
  CHECK((estimate - y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("no observations returns the prior mean") {
  std::mt19937_64 rng(6);
  const GaussianModel model = oracle::random_model(4, rng);
  const MaskedSignal signal(4, {}, Eigen::VectorXd(0));
  const Eigen::VectorXd estimate = gmc::map_estimate(model, signal, NoiseModel::zero());
  CHECK((estimate - model.mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar Wiener shrinkage") {
  const GaussianModel model(Eigen::VectorXd::Zero(1),
                            SymMatrix(Eigen::MatrixXd::Identity(1, 1)));
  const MaskedSignal signal(1, {0}, single(2.0));
  const Eigen::VectorXd estimate = gmc::map_estimate(model, signal, NoiseModel::isotropic(1.0));
  // 1 * (1 + 1)^{-1} * 2
  CHECK(estimate(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dimension mismatches are rejected") {
  const GaussianModel model = two_dim_model(0.0);
  CHECK_THROWS_AS(gmc::map_estimate(model, MaskedSignal(3, {0}, single(1.0)), NoiseModel::zero()),
                  gmc::DimensionMismatch);
  CHECK_THROWS_AS(
      gmc::log_posterior(model, MaskedSignal(2, {}, Eigen::VectorXd(0)), NoiseModel::zero(),
                         Eigen::VectorXd::Zero(3)),
      gmc::DimensionMismatch);
}

TEST_CASE("log_posterior examples") {
  SUBCASE("candidate at the mean with nothing observed scores 0") {
    std::mt19937_64 rng(8);
    const GaussianModel model = oracle::random_model(3, rng);
    const MaskedSignal signal(3, {}, Eigen::VectorXd(0));
    CHECK(gmc::log_posterior(model, signal, NoiseModel::zero(), model.mean) == 0.0);
  }
  SUBCASE("unit model, candidate 2: prior quadratic form 4 gives -2") {
    const GaussianModel model(Eigen::VectorXd::Zero(1),
                              SymMatrix(Eigen::MatrixXd::Identity(1, 1)));
    const MaskedSignal signal(1, {}, Eigen::VectorXd(0));
    CHECK(gmc::log_posterior(model, signal, NoiseModel::zero(), single(2.0)) ==
          doctest::Approx(-2.0).epsilon(1e-15));
  }
  SUBCASE("zero-noise constraint violation gives -infinity") {
    const GaussianModel model = two_dim_model(0.0);
    const MaskedSignal signal(2, {0}, single(1.0));
    Eigen::VectorXd violating(2);
    violating << 1.5, 0.0;
    CHECK(gmc::log_posterior(model, signal, NoiseModel::zero(), violating) ==
          -std::numeric_limits<double>::infinity());
  }
  SUBCASE("isotropic fidelity term") {
    const GaussianModel model = two_dim_model(0.0);
    const MaskedSignal signal(2, {0}, single(1.0));
    Eigen::VectorXd candidate(2);
    candidate << 0.0, 0.0;
    // fidelity (0-1)^2/0.5 = 2, prior 0 -> -1
    CHECK(gmc::log_posterior(model, signal, NoiseModel::isotropic(0.5), candidate) ==
          doctest::Approx(-1.0).epsilon(1e-14));
  }
}

TEST_CASE("interpolation: zero-noise estimates match the observations") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 10);
    const GaussianModel model = oracle::random_model(n, rng);
    const Eigen::Index n_obs = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    const MaskedSignal signal = oracle::random_signal(model, n_obs, rng);
    const Eigen::VectorXd estimate = gmc::map_estimate(model, signal, NoiseModel::zero());
    for (Eigen::Index k = 0; k < n_obs; ++k)
      CHECK(std::abs(estimate(signal.indices[static_cast<std::size_t>(k)]) - signal.values(k)) <=
            1e-8);
  }
}

TEST_CASE("oracle equivalence with isotropic noise") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 6);
    const GaussianModel model = oracle::random_model(n, rng);
    const Eigen::Index n_obs = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n + 1));
    const MaskedSignal signal = oracle::random_signal(model, n_obs, rng);
    const double sigma2 = (trial % 2 == 0) ? 0.1 : 1.0;
    const Eigen::VectorXd estimate =
        gmc::map_estimate(model, signal, NoiseModel::isotropic(sigma2));
    const Eigen::VectorXd reference = oracle::map_normal_equations(model, signal, sigma2);
    CHECK((estimate - reference).cwiseAbs().maxCoeff() < 1e-6);

    // the closed form is never beaten by nearby candidates on the objective
    const double at_estimate = oracle::map_objective(model, signal, sigma2, estimate);
    const double at_reference = oracle::map_objective(model, signal, sigma2, reference);
    CHECK(at_estimate <= at_reference + 1e-9 * (1.0 + std::abs(at_reference)));
  }
}

TEST_CASE("reduced-dimension solve equals the full-dimension mask formulation") {
  std::mt19937_64 rng(321);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 5);
    const GaussianModel model = oracle::random_model(n, rng);
    const Eigen::Index n_obs = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    const MaskedSignal signal = oracle::random_signal(model, n_obs, rng);
    const double sigma2 = 0.25;
    const Eigen::VectorXd reduced = gmc::map_estimate(model, signal, NoiseModel::isotropic(sigma2));
    const Eigen::VectorXd full = oracle::map_normal_equations(model, signal, sigma2);
    CHECK((reduced - full).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(55);
  const Eigen::Index n = 6;
  const GaussianModel model = oracle::random_model(n, rng);
  const MaskedSignal signal = oracle::random_signal(model, 3, rng);
  const Eigen::VectorXd estimate = gmc::map_estimate(model, signal, NoiseModel::isotropic(0.3));

  // permute coordinate labels with p(k) = (k + 2) % n
  std::vector<Eigen::Index> p(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) p[static_cast<std::size_t>(k)] = (k + 2) % n;

  Eigen::VectorXd mean_p(n);
  Eigen::MatrixXd cov_p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mean_p(p[static_cast<std::size_t>(i)]) = model.mean(i);
    for (Eigen::Index j = 0; j < n; ++j)
      cov_p(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]) = model.cov(i, j);
  }
  std::vector<std::pair<Eigen::Index, double>> moved;
  for (Eigen::Index k = 0; k < signal.observed_count(); ++k)
    moved.emplace_back(p[static_cast<std::size_t>(signal.indices[static_cast<std::size_t>(k)])],
                       signal.values(k));
  std::sort(moved.begin(), moved.end());
  std::vector<Eigen::Index> idx_p;
  Eigen::VectorXd val_p(static_cast<Eigen::Index>(moved.size()));
  for (std::size_t k = 0; k < moved.size(); ++k) {
    idx_p.push_back(moved[k].first);
    val_p(static_cast<Eigen::Index>(k)) = moved[k].second;
  }

  const GaussianModel permuted(mean_p, SymMatrix(cov_p));
  const Eigen::VectorXd estimate_p = gmc::map_estimate(
      permuted, MaskedSignal(n, idx_p, val_p), NoiseModel::isotropic(0.3));
  for (Eigen::Index k = 0; k < n; ++k)
    CHECK(estimate_p(p[static_cast<std::size_t>(k)]) ==
          doctest::Approx(estimate(k)).epsilon(1e-10));
}
