#include <benchmark/benchmark.h>

#include <random>

#include <Eigen/Dense>

#include "gmc/linalg.hpp"

namespace {

// Well-conditioned SPD matrix of the given size.
gmc::SymMatrix random_spd(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = gauss(rng);
  Eigen::MatrixXd spd = m.transpose() * m / static_cast<double>(n);
  spd.diagonal().array() += 1.0;
  return gmc::SymMatrix(std::move(spd));
}

void BM_cholesky(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const gmc::SymMatrix a = random_spd(n, 7);
  for (auto _ : state) {
    const gmc::CholeskyFactor factor = gmc::cholesky(a);
    benchmark::DoNotOptimize(factor.lower().data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_solve_spd(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const gmc::CholeskyFactor factor = gmc::cholesky(random_spd(n, 7));
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  for (auto _ : state) {
    Eigen::VectorXd x = gmc::solve_spd(factor, b);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_cholesky)->RangeMultiplier(2)->Range(32, 512)->Complexity(benchmark::oNCubed);
BENCHMARK(BM_solve_spd)->RangeMultiplier(2)->Range(32, 512)->Complexity(benchmark::oNSquared);
