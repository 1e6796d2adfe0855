#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gmc/em.hpp"
#include "gmc/gaussian.hpp"

namespace {

gmc::GaussianModel random_model(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd basis(dim, dim / 2 + 1);
  for (Eigen::Index j = 0; j < basis.cols(); ++j)
    for (Eigen::Index i = 0; i < basis.rows(); ++i) basis(i, j) = gauss(rng);
  Eigen::MatrixXd cov = basis * basis.transpose() / static_cast<double>(basis.cols());
  cov.diagonal().array() += 0.3;
  Eigen::VectorXd mean(dim);
  for (Eigen::Index j = 0; j < dim; ++j) mean(j) = 3.0 + 0.5 * gauss(rng);
  return gmc::GaussianModel(std::move(mean), gmc::SymMatrix(std::move(cov)));
}

gmc::MaskedSignal random_signal(const gmc::GaussianModel& model, Eigen::Index observed,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(model.dim()));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<Eigen::Index> indices(all.begin(), all.begin() + observed);
  std::sort(indices.begin(), indices.end());
  std::normal_distribution<double> gauss(3.0, 1.0);
  Eigen::VectorXd values(observed);
  for (Eigen::Index k = 0; k < observed; ++k) values(k) = gauss(rng);
  return gmc::MaskedSignal(model.dim(), std::move(indices), std::move(values));
}

// One E-step row at a 50% observation ratio; the solve runs in the reduced
// observed dimension.
void BM_map_estimate(benchmark::State& state) {
  const auto observed = static_cast<Eigen::Index>(state.range(0));
  const gmc::GaussianModel model = random_model(2 * observed, 11);
  const gmc::MaskedSignal signal = random_signal(model, observed, 13);
  for (auto _ : state) {
    Eigen::VectorXd estimate = gmc::map_estimate(model, signal, gmc::NoiseModel::zero());
    benchmark::DoNotOptimize(estimate.data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_m_step(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(3.0, 1.0);
  gmc::RowMatrix signals(512, n);
  for (Eigen::Index i = 0; i < signals.rows(); ++i)
    for (Eigen::Index j = 0; j < n; ++j) signals(i, j) = gauss(rng);
  for (auto _ : state) {
    gmc::GaussianModel model = gmc::m_step(signals, 0.3);
    benchmark::DoNotOptimize(model.mean.data());
  }
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_map_estimate)->Arg(50)->Arg(100)->Arg(200)->Arg(400)->Complexity(benchmark::oNCubed);
BENCHMARK(BM_m_step)->RangeMultiplier(2)->Range(32, 256)->Complexity(benchmark::oNSquared);
