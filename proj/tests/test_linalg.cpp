#include <cmath>
#include <cstring>
#include <random>

#include <doctest.h>

#include "gmc/linalg.hpp"
#include "oracles.hpp"

using gmc::CholeskyFactor;
using gmc::SymMatrix;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("SymMatrix mirrors the upper triangle") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 99.0, 3.0;  // lower entry disagrees on purpose
  const SymMatrix s(m);
  CHECK(s(0, 1) == 2.0);
  CHECK(s(1, 0) == 2.0);
  CHECK(s(1, 1) == 3.0);
}

TEST_CASE("SymMatrix rejects empty and non-square input") {
  CHECK_THROWS_AS(SymMatrix(Eigen::MatrixXd(0, 0)), gmc::DimensionMismatch);
  CHECK_THROWS_AS(SymMatrix(Eigen::MatrixXd::Zero(2, 3)), gmc::DimensionMismatch);
}

TEST_CASE("cholesky of [[4,2],[2,3]]") {
  const CholeskyFactor factor = gmc::cholesky(SymMatrix(mat2(4, 2, 2, 3)));
  CHECK(factor.lower()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(factor.lower()(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(factor.lower()(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(factor.lower()(0, 1) == 0.0);
  // verify L * L^T reproduces the input by direct multiplication
  const Eigen::MatrixXd reconstructed = factor.lower() * factor.lower().transpose();
  CHECK((reconstructed - mat2(4, 2, 2, 3)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("cholesky of the identity is the identity") {
  for (Eigen::Index n : {1, 2, 5, 17}) {
    const CholeskyFactor factor = gmc::cholesky(SymMatrix(Eigen::MatrixXd::Identity(n, n)));
    CHECK((factor.lower() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("cholesky rejects an indefinite matrix") {
  // eigenvalues of [[1,2],[2,1]] are 3 and -1 (characteristic polynomial
  // (1-l)^2 - 4)
  CHECK_THROWS_AS(gmc::cholesky(SymMatrix(mat2(1, 2, 2, 1))), gmc::NotPositiveDefinite);
}

TEST_CASE("cholesky pivot threshold scales with the diagonal") {
  // The second pivot is ~1e-14 of the max diagonal: below 1e-12 * maxdiag.
  Eigen::MatrixXd nearly(2, 2);
  nearly << 1.0, 1.0, 1.0, 1.0 + 1e-14;
  CHECK_THROWS_AS(gmc::cholesky(SymMatrix(nearly)), gmc::NotPositiveDefinite);
}

TEST_CASE("solve_spd examples") {
  SUBCASE("identity") {
    const CholeskyFactor factor = gmc::cholesky(SymMatrix(Eigen::MatrixXd::Identity(3, 3)));
    Eigen::VectorXd b(3);
    b << 1, 2, 3;
    CHECK((gmc::solve_spd(factor, b) - b).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("2x2 system") {
    const CholeskyFactor factor = gmc::cholesky(SymMatrix(mat2(4, 2, 2, 3)));
    Eigen::VectorXd b(2);
    b << 2, 3;
    const Eigen::VectorXd x = gmc::solve_spd(factor, b);
    // substituting x = (0, 1) into A x gives (2, 3)
    CHECK(x(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("scalar") {
    const CholeskyFactor factor = gmc::cholesky(SymMatrix(Eigen::MatrixXd::Constant(1, 1, 2.0)));
    Eigen::VectorXd b(1);
    b << 6;
    CHECK(gmc::solve_spd(factor, b)(0) == doctest::Approx(3.0).epsilon(1e-15));
  }
  SUBCASE("dimension mismatch") {
    const CholeskyFactor factor = gmc::cholesky(SymMatrix(Eigen::MatrixXd::Identity(3, 3)));
    CHECK_THROWS_AS(gmc::solve_spd(factor, Eigen::VectorXd::Zero(2)), gmc::DimensionMismatch);
  }
}

TEST_CASE("round-trip and reconstruction properties over dims 1..64") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index n = 1; n <= 64; ++n) {
    const Eigen::MatrixXd a = oracle::random_spd(n, rng);
    const SymMatrix sym(a);
    const CholeskyFactor factor = gmc::cholesky(sym);

    const double reconstruction =
        (factor.lower() * factor.lower().transpose() - a).cwiseAbs().maxCoeff();
    CHECK(reconstruction <= 1e-10 * a.cwiseAbs().maxCoeff());

    for (Eigen::Index d = 0; d < n; ++d) CHECK(factor.lower()(d, d) > 0.0);

    Eigen::VectorXd b(n);
    for (Eigen::Index k = 0; k < n; ++k) b(k) = gauss(rng);
    const Eigen::VectorXd x = gmc::solve_spd(factor, b);
    const double residual = (a * x - b).cwiseAbs().maxCoeff();
    CHECK(residual <= 1e-8 * b.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("factorization is bit-deterministic") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd a = oracle::random_spd(33, rng);
  const CholeskyFactor first = gmc::cholesky(SymMatrix(a));
  const CholeskyFactor second = gmc::cholesky(SymMatrix(a));
  REQUIRE(first.lower().size() == second.lower().size());
  CHECK(std::memcmp(first.lower().data(), second.lower().data(),
                    sizeof(double) * static_cast<std::size_t>(first.lower().size())) == 0);
}

TEST_CASE("forward_substitute solves L z = rhs") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd a = oracle::random_spd(20, rng);
  const CholeskyFactor factor = gmc::cholesky(SymMatrix(a));
  Eigen::MatrixXd rhs(20, 3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index j = 0; j < rhs.cols(); ++j)
    for (Eigen::Index i = 0; i < rhs.rows(); ++i) rhs(i, j) = gauss(rng);
  const Eigen::MatrixXd z = gmc::forward_substitute(factor, rhs);
  CHECK((factor.lower() * z - rhs).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(gmc::forward_substitute(factor, Eigen::MatrixXd::Zero(19, 2)),
                  gmc::DimensionMismatch);
}
