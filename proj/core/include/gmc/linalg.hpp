#pragma once

#include <Eigen/Dense>

#include "gmc/errors.hpp"

namespace gmc {

/// Dense symmetric matrix. Construction mirrors the upper triangle onto the
/// lower one, so entries(i, j) == entries(j, i) holds exactly.
class SymMatrix {
 public:
  /// Requires a square matrix with dim >= 1.
  explicit SymMatrix(Eigen::MatrixXd entries);

  Eigen::Index dim() const { return mat_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }
  const Eigen::MatrixXd& matrix() const { return mat_; }

 private:
  Eigen::MatrixXd mat_;
};

/// Lower-triangular Cholesky factor L with strictly positive diagonal;
/// L * L^T reconstructs the factored matrix.
class CholeskyFactor {
 public:
  Eigen::Index dim() const { return lower_.rows(); }
  const Eigen::MatrixXd& lower() const { return lower_; }

 private:
  explicit CholeskyFactor(Eigen::MatrixXd lower) : lower_(std::move(lower)) {}
  friend CholeskyFactor cholesky_lower(Eigen::MatrixXd a);
  Eigen::MatrixXd lower_;
};

/// Factors a = L * L^T in O(dim^3). Throws NotPositiveDefinite when a pivot
/// falls at or below 1e-12 times the largest diagonal entry of the input.
CholeskyFactor cholesky(const SymMatrix& a);

/// Same factorization reading only the lower triangle of a raw square matrix.
CholeskyFactor cholesky_lower(Eigen::MatrixXd a);

/// Solves (L * L^T) x = b by forward then backward substitution.
Eigen::VectorXd solve_spd(const CholeskyFactor& factor, const Eigen::VectorXd& b);

/// Solves L z = rhs, one column at a time.
Eigen::MatrixXd forward_substitute(const CholeskyFactor& factor, Eigen::MatrixXd rhs);

}  // namespace gmc
