#include <cmath>

#include <Eigen/Dense>
#include <boost/multiprecision/float128.hpp>
#include <fmt/format.h>

#include "igmrf/error.hpp"
#include "igmrf/sampling.hpp"

namespace igmrf {

namespace {

void check_oracle_size(Index n, int null_dim) {
  if (n > kOracleMaxDimension) {
    throw ConfigError(fmt::format("oracle limited to dimension {}, got {}", kOracleMaxDimension, n));
  }
  if (null_dim < 0 || null_dim >= n) {
    throw ConfigError(fmt::format("null_dim {} must lie in [0, {})", null_dim, n));
  }
}

}  // namespace

// Quad precision keeps the oracle's own error far below the 1e-10 agreement
// asked of the double-precision path, even for RW2 chains whose condition
// number reaches 1e10 at 400 nodes.
Eigen::MatrixXd dense_pinv_oracle(const SparseSymmetricMatrix& matrix, int null_dim) {
  using Quad = boost::multiprecision::float128;
  using QuadMatrix = Eigen::Matrix<Quad, Eigen::Dynamic, Eigen::Dynamic>;
  using QuadVector = Eigen::Matrix<Quad, Eigen::Dynamic, 1>;

  const Index n = matrix.dimension();
  check_oracle_size(n, null_dim);
  Eigen::SelfAdjointEigenSolver<QuadMatrix> solver(matrix.to_dense().cast<Quad>());
  if (solver.info() != Eigen::Success) throw NumericalError("oracle eigensolver did not converge");
  const Index kept = n - null_dim;
  const QuadMatrix gamma = solver.eigenvectors().rightCols(kept);
  const QuadVector inv = solver.eigenvalues().tail(kept).cwiseInverse();
  const QuadMatrix sigma = gamma * inv.asDiagonal() * gamma.transpose();
  return sigma.cast<double>();
}

Eigen::MatrixXd dense_pinv_oracle(const SpectralDecomposition& decomp, int null_dim) {
  const Index n = decomp.dimension();
  check_oracle_size(n, null_dim);
  const Index kept = n - null_dim;
  const Eigen::MatrixXd gamma = decomp.eigenvectors.rightCols(kept);
  const Eigen::VectorXd inv = decomp.eigenvalues.tail(kept).cwiseInverse();
  return gamma * inv.asDiagonal() * gamma.transpose();
}

bool cut_splits_cluster(const SpectralDecomposition& decomp, int null_dim, double rel_gap) {
  if (null_dim <= 0 || null_dim >= decomp.dimension()) return false;
  return decomp.eigenvalues(null_dim) - decomp.eigenvalues(null_dim - 1) <=
         rel_gap * std::abs(decomp.largest());
}

}  // namespace igmrf
