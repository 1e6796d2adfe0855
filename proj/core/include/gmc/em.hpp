#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gmc/gaussian.hpp"
#include "gmc/ratings.hpp"

namespace gmc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Orientation { rows, columns };

struct EmConfig {
  double epsilon = 0.3;    // ridge added to the covariance every M-step
  int iterations = 10;
  NoiseModel noise = NoiseModel::zero();
  double init_fill = 3.0;  // value given to unobserved entries before the first M-step
  Orientation orientation = Orientation::rows;
  double monotonicity_tolerance = 1e-6;  // relative; consumed by the test suites
};

struct EmIteration {
  double log_posterior = 0.0;  // aggregate over all signals, after that iteration's E-step
  double seconds = 0.0;
  std::uint64_t model_checksum = 0;
};

struct EmResult {
  GaussianModel model;
  RowMatrix completed;  // users x items, regardless of orientation
  std::vector<EmIteration> trace;
};

/// Dense starting matrix: observed values where present, config.init_fill
/// elsewhere.
RowMatrix initialize(const SparseRatingMatrix& observed, const EmConfig& config);

/// Empirical mean and covariance of the rows of `signals` (divisor M, not
/// M-1), plus epsilon on the diagonal. Accumulations run over fixed column
/// chunks, so results do not depend on the worker count.
GaussianModel m_step(const RowMatrix& signals, double epsilon, int workers = 1);
GaussianModel m_step(const std::vector<Eigen::VectorXd>& signals, double epsilon);

/// Alternating estimation, M-step first: each of config.iterations rounds
/// refits the model on the current completion, then replaces every row by
/// its MAP estimate. Deterministic for any worker count.
EmResult run_em(const SparseRatingMatrix& observed, const EmConfig& config, int workers = 0);

}  // namespace gmc
