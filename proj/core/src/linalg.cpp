#include "gmc/linalg.hpp"

#include <cmath>
#include <utility>

namespace gmc {

SymMatrix::SymMatrix(Eigen::MatrixXd entries) : mat_(std::move(entries)) {
  if (mat_.rows() < 1 || mat_.rows() != mat_.cols())
    throw DimensionMismatch("SymMatrix: square matrix with dim >= 1 required");
  // The upper triangle is authoritative.
  for (Eigen::Index j = 0; j < mat_.cols(); ++j)
    for (Eigen::Index i = j + 1; i < mat_.rows(); ++i) mat_(i, j) = mat_(j, i);
}

CholeskyFactor cholesky(const SymMatrix& a) { return cholesky_lower(a.matrix()); }

CholeskyFactor cholesky_lower(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  if (n < 1 || a.cols() != n)
    throw DimensionMismatch("cholesky: square matrix with dim >= 1 required");

  // Pivot acceptance threshold relative to the input scale.
  const double threshold = 1e-12 * a.diagonal().maxCoeff();
  constexpr Eigen::Index kBlock = 24;

  for (Eigen::Index k = 0; k < n; k += kBlock) {
    const Eigen::Index width = std::min(kBlock, n - k);
    // Right-looking factorization of the diagonal block, column-oriented so
    // the updates stream down contiguous column segments. Contributions of
    // the columns left of the block were folded in by earlier rank updates.
    for (Eigen::Index j = k; j < k + width; ++j) {
      const double pivot = a(j, j);
      if (pivot <= threshold)
        throw NotPositiveDefinite("cholesky: pivot " + std::to_string(pivot) + " at index " +
                                  std::to_string(j) + " (threshold " +
                                  std::to_string(threshold) + ")");
      const double diag = std::sqrt(pivot);
      a(j, j) = diag;
      const Eigen::Index below = k + width - j - 1;
      if (below > 0) {
        a.col(j).segment(j + 1, below) /= diag;
        for (Eigen::Index t = j + 1; t < k + width; ++t)
          a.col(t).segment(t, k + width - t).noalias() -=
              a(t, j) * a.col(j).segment(t, k + width - t);
      }
    }
    const Eigen::Index rest = n - k - width;
    if (rest > 0) {
      auto panel = a.block(k + width, k, rest, width);
      a.block(k, k, width, width)
          .triangularView<Eigen::Lower>()
          .transpose()
          .solveInPlace<Eigen::OnTheRight>(panel);
      a.block(k + width, k + width, rest, rest)
          .selfadjointView<Eigen::Lower>()
          .rankUpdate(panel, -1.0);
    }
  }

  a.triangularView<Eigen::StrictlyUpper>().setZero();
  return CholeskyFactor(std::move(a));
}

Eigen::VectorXd solve_spd(const CholeskyFactor& factor, const Eigen::VectorXd& b) {
  if (b.size() != factor.dim())
    throw DimensionMismatch("solve_spd: rhs has length " + std::to_string(b.size()) +
                            ", factor has dim " + std::to_string(factor.dim()));
  Eigen::VectorXd x = factor.lower().triangularView<Eigen::Lower>().solve(b);
  factor.lower().triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Eigen::MatrixXd forward_substitute(const CholeskyFactor& factor, Eigen::MatrixXd rhs) {
  if (rhs.rows() != factor.dim())
    throw DimensionMismatch("forward_substitute: rhs has " + std::to_string(rhs.rows()) +
                            " rows, factor has dim " + std::to_string(factor.dim()));
  factor.lower().triangularView<Eigen::Lower>().solveInPlace(rhs);
  return rhs;
}

}  // namespace gmc
