#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gmc/linalg.hpp"

namespace gmc {

/// Observation noise: exactly zero, or isotropic with variance sigma2.
/// isotropic(0) collapses to the zero kind.
class NoiseModel {
 public:
  static NoiseModel zero() { return NoiseModel(0.0); }
  static NoiseModel isotropic(double sigma2);

  bool is_zero() const { return sigma2_ == 0.0; }
  double sigma2() const { return sigma2_; }

 private:
  explicit NoiseModel(double sigma2) : sigma2_(sigma2) {}
  double sigma2_;
};

/// The observed part of one signal: a strictly increasing list of coordinate
/// indices into a full_dim-dimensional vector, plus the observed values.
struct MaskedSignal {
  MaskedSignal(Eigen::Index full_dim, std::vector<Eigen::Index> indices, Eigen::VectorXd values);

  Eigen::Index observed_count() const { return static_cast<Eigen::Index>(indices.size()); }

  Eigen::Index full_dim;
  std::vector<Eigen::Index> indices;
  Eigen::VectorXd values;
};

/// Gaussian prior over full-dimension signals: mean vector and symmetric
/// positive-definite covariance (callers keep it PD via regularization).
struct GaussianModel {
  GaussianModel(Eigen::VectorXd mean_in, SymMatrix cov_in);

  Eigen::Index dim() const { return mean.size(); }

  Eigen::VectorXd mean;
  SymMatrix cov;
};

/// Closed-form MAP completion of one signal: the prior mean plus the
/// covariance-weighted correction of the observed residual. The only linear
/// system solved has the reduced observed dimension; masking is realized by
/// index extraction, never by a materialized operator matrix. With no
/// observations the prior mean is returned unchanged.
Eigen::VectorXd map_estimate(const GaussianModel& model, const MaskedSignal& signal,
                             const NoiseModel& noise);

/// Negated MAP objective scaled by -1/2: data-fidelity quadratic form plus
/// prior quadratic form, normalization constant omitted. Larger is better;
/// intended for monotonicity tracking. With zero noise the fidelity term is
/// 0 when every observed coordinate of `candidate` matches to 1e-9 absolute
/// and -infinity otherwise.
double log_posterior(const GaussianModel& model, const MaskedSignal& signal,
                     const NoiseModel& noise, const Eigen::VectorXd& candidate);

}  // namespace gmc
