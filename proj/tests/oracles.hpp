// Test-only reference implementations, deliberately independent of the
// library's solver path: Gauss-Jordan elimination with partial pivoting, the
// full-dimension normal equations for the masked MAP objective, and the KKT
// system for the zero-noise (hard constraint) case.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gmc/gaussian.hpp"

namespace oracle {

// Solves A x = b by Gauss-Jordan elimination with partial pivoting.
inline Eigen::MatrixXd gauss_jordan_solve(Eigen::MatrixXd a, Eigen::MatrixXd b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n) throw std::invalid_argument("gauss_jordan_solve: shapes");
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) throw std::runtime_error("gauss_jordan_solve: singular");
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      b.row(pivot).swap(b.row(col));
    }
    const double inv = 1.0 / a(col, col);
    a.row(col) *= inv;
    b.row(col) *= inv;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      if (factor != 0.0) {
        a.row(r) -= factor * a.row(col);
        b.row(r) -= factor * b.row(col);
      }
    }
  }
  return b;
}

inline Eigen::MatrixXd gauss_jordan_inverse(const Eigen::MatrixXd& a) {
  return gauss_jordan_solve(a, Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

// Minimizer of (U f - y)^T (1/sigma2) (U f - y) + (f - mu)^T Sigma^{-1} (f - mu)
// via the full N x N normal equations with a diagonal observation weight:
// (W + Sigma^{-1}) f = W y_embedded + Sigma^{-1} mu, W = diag(1/sigma2 on the
// observed coordinates, 0 elsewhere).
inline Eigen::VectorXd map_normal_equations(const gmc::GaussianModel& model,
                                            const gmc::MaskedSignal& signal, double sigma2) {
  if (sigma2 <= 0.0) throw std::invalid_argument("map_normal_equations: sigma2 must be > 0");
  const Eigen::Index n = model.dim();
  const Eigen::MatrixXd precision = gauss_jordan_inverse(model.cov.matrix());
  Eigen::MatrixXd system = precision;
  Eigen::VectorXd rhs = precision * model.mean;
  for (Eigen::Index k = 0; k < signal.observed_count(); ++k) {
    const Eigen::Index j = signal.indices[static_cast<std::size_t>(k)];
    system(j, j) += 1.0 / sigma2;
    rhs(j) += signal.values(k) / sigma2;
  }
  (void)n;
  return gauss_jordan_solve(std::move(system), std::move(rhs));
}

// Zero-noise case: minimize (f - mu)^T Sigma^{-1} (f - mu) subject to
// f[indices] == values, through the KKT system
//   [ Sigma^{-1}  U^T ] [ f      ]   [ Sigma^{-1} mu ]
//   [ U           0   ] [ lambda ] = [ y             ]
inline Eigen::VectorXd map_kkt_zero_noise(const gmc::GaussianModel& model,
                                          const gmc::MaskedSignal& signal) {
  const Eigen::Index n = model.dim();
  const Eigen::Index n_obs = signal.observed_count();
  const Eigen::MatrixXd precision = gauss_jordan_inverse(model.cov.matrix());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + n_obs, n + n_obs);
  kkt.topLeftCorner(n, n) = precision;
  for (Eigen::Index k = 0; k < n_obs; ++k) {
    const Eigen::Index j = signal.indices[static_cast<std::size_t>(k)];
    kkt(n + k, j) = 1.0;
    kkt(j, n + k) = 1.0;
  }
  Eigen::VectorXd rhs(n + n_obs);
  rhs.head(n) = precision * model.mean;
  rhs.tail(n_obs) = signal.values;
  const Eigen::VectorXd solution = gauss_jordan_solve(std::move(kkt), std::move(rhs));
  return solution.head(n);
}

// Objective of the third line of the MAP derivation, for direct comparisons.
inline double map_objective(const gmc::GaussianModel& model, const gmc::MaskedSignal& signal,
                            double sigma2, const Eigen::VectorXd& f) {
  const Eigen::MatrixXd precision = gauss_jordan_inverse(model.cov.matrix());
  double fidelity = 0.0;
  for (Eigen::Index k = 0; k < signal.observed_count(); ++k) {
    const double r = f(signal.indices[static_cast<std::size_t>(k)]) - signal.values(k);
    fidelity += r * r / sigma2;
  }
  const Eigen::VectorXd d = f - model.mean;
  return fidelity + d.dot(precision * d);
}

// --- random instance helpers -------------------------------------------------

inline Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& rng, double ridge = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = gauss(rng);
  Eigen::MatrixXd spd = m.transpose() * m;
  spd.diagonal().array() += ridge;
  // Mirror so the input satisfies the symmetry invariant bit-exactly.
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) spd(i, j) = spd(j, i);
  return spd;
}

inline gmc::GaussianModel random_model(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd mean(n);
  for (Eigen::Index j = 0; j < n; ++j) mean(j) = 3.0 + gauss(rng);
  return gmc::GaussianModel(std::move(mean), gmc::SymMatrix(random_spd(n, rng, 0.5)));
}

// Random mask of n_obs coordinates out of n, strictly increasing.
inline std::vector<Eigen::Index> random_mask(Eigen::Index n, Eigen::Index n_obs,
                                             std::mt19937_64& rng) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<Eigen::Index> mask(all.begin(), all.begin() + n_obs);
  std::sort(mask.begin(), mask.end());
  return mask;
}

inline gmc::MaskedSignal random_signal(const gmc::GaussianModel& model, Eigen::Index n_obs,
                                       std::mt19937_64& rng) {
  auto mask = random_mask(model.dim(), n_obs, rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd values(n_obs);
  for (Eigen::Index k = 0; k < n_obs; ++k)
    values(k) = model.mean(mask[static_cast<std::size_t>(k)]) + gauss(rng);
  return gmc::MaskedSignal(model.dim(), std::move(mask), std::move(values));
}

}  // namespace oracle
