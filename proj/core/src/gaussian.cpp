#include "gmc/gaussian.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace gmc {

NoiseModel NoiseModel::isotropic(double sigma2) {
  if (sigma2 < 0.0 || !std::isfinite(sigma2))
    throw Error("NoiseModel: variance must be finite and >= 0");
  return NoiseModel(sigma2);
}

MaskedSignal::MaskedSignal(Eigen::Index full_dim_in, std::vector<Eigen::Index> indices_in,
                           Eigen::VectorXd values_in)
    : full_dim(full_dim_in), indices(std::move(indices_in)), values(std::move(values_in)) {
  if (full_dim < 0) throw DimensionMismatch("MaskedSignal: full_dim must be >= 0");
  if (static_cast<Eigen::Index>(indices.size()) != values.size())
    throw DimensionMismatch("MaskedSignal: " + std::to_string(indices.size()) +
                            " indices but " + std::to_string(values.size()) + " values");
  Eigen::Index previous = -1;
  for (Eigen::Index idx : indices) {
    if (idx <= previous || idx >= full_dim)
      throw DimensionMismatch("MaskedSignal: indices must be strictly increasing and < full_dim");
    previous = idx;
  }
}

GaussianModel::GaussianModel(Eigen::VectorXd mean_in, SymMatrix cov_in)
    : mean(std::move(mean_in)), cov(std::move(cov_in)) {
  if (mean.size() != cov.dim())
    throw DimensionMismatch("GaussianModel: mean has length " + std::to_string(mean.size()) +
                            ", covariance has dim " + std::to_string(cov.dim()));
}

namespace {

void check_signal_dim(const GaussianModel& model, const MaskedSignal& signal) {
  if (signal.full_dim != model.dim())
    throw DimensionMismatch("signal full_dim " + std::to_string(signal.full_dim) +
                            " does not match model dim " + std::to_string(model.dim()));
}

// Covariance restricted to the observed coordinates, with the noise variance
// on the diagonal.
Eigen::MatrixXd reduced_system(const Eigen::MatrixXd& cov, const std::vector<Eigen::Index>& idx,
                               const NoiseModel& noise) {
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) sub(i, j) = cov(idx[i], idx[j]);
  if (!noise.is_zero()) sub.diagonal().array() += noise.sigma2();
  return sub;
}

}  // namespace

Eigen::VectorXd map_estimate(const GaussianModel& model, const MaskedSignal& signal,
                             const NoiseModel& noise) {
  check_signal_dim(model, signal);
  const Eigen::Index n_obs = signal.observed_count();
  if (n_obs == 0) return model.mean;

  const Eigen::MatrixXd& cov = model.cov.matrix();
  Eigen::VectorXd residual(n_obs);
  for (Eigen::Index k = 0; k < n_obs; ++k)
    residual(k) = signal.values(k) - model.mean(signal.indices[k]);

  const CholeskyFactor factor = cholesky_lower(reduced_system(cov, signal.indices, noise));
  const Eigen::VectorXd gain = solve_spd(factor, residual);

  Eigen::VectorXd estimate = model.mean;
  for (Eigen::Index k = 0; k < n_obs; ++k) estimate += cov.col(signal.indices[k]) * gain(k);
  return estimate;
}

double log_posterior(const GaussianModel& model, const MaskedSignal& signal,
                     const NoiseModel& noise, const Eigen::VectorXd& candidate) {
  check_signal_dim(model, signal);
  if (candidate.size() != model.dim())
    throw DimensionMismatch("log_posterior: candidate has length " +
                            std::to_string(candidate.size()) + ", model dim is " +
                            std::to_string(model.dim()));

  double fidelity = 0.0;
  const Eigen::Index n_obs = signal.observed_count();
  if (n_obs > 0) {
    double max_violation = 0.0;
    double squared = 0.0;
    for (Eigen::Index k = 0; k < n_obs; ++k) {
      const double r = candidate(signal.indices[k]) - signal.values(k);
      max_violation = std::max(max_violation, std::abs(r));
      squared += r * r;
    }
    if (noise.is_zero()) {
      if (max_violation > 1e-9) return -std::numeric_limits<double>::infinity();
    } else {
      fidelity = squared / noise.sigma2();
    }
  }

  const Eigen::VectorXd deviation = candidate - model.mean;
  const Eigen::MatrixXd whitened = forward_substitute(cholesky(model.cov), deviation);
  return -0.5 * (fidelity + whitened.squaredNorm());
}

}  // namespace gmc
