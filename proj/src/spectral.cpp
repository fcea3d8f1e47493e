#include "igmrf/spectral.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <lapacke.h>

#include "igmrf/error.hpp"

namespace igmrf {

namespace {

void check_dimension(Index n, const EigenOptions& options) {
  if (n == 0) throw ConfigError("cannot decompose an empty matrix");
  if (n > options.max_dimension) {
    throw ConfigError(fmt::format(
        "dimension {} exceeds the dense eigensolver cap of {}; rerun with --long-running "
        "to raise the cap (expect minutes and ~{} GB of memory)",
        n, options.max_dimension, (3 * n * n * 8) / 1'000'000'000 + 1));
  }
}

}  // namespace

SpectralDecomposition eigendecompose(const SparseSymmetricMatrix& matrix,
                                     const EigenOptions& options) {
  const Index n = matrix.dimension();
  check_dimension(n, options);
  SpectralDecomposition out;
  out.eigenvectors = matrix.to_dense();
  out.eigenvalues.resize(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', static_cast<lapack_int>(n),
                     out.eigenvectors.data(), static_cast<lapack_int>(n), out.eigenvalues.data());
  if (info != 0) {
    throw NumericalError(fmt::format("dsyevd failed with info={}", info));
  }
  return out;
}

SpectralDecomposition factor_decompose(const IncrementSet& increments, Index dimension,
                                       const EigenOptions& options) {
  check_dimension(dimension, options);
  if (increments.empty()) throw ConfigError("cannot decompose an empty increment set");
  const Index m = increments.row_count();
  const Index n = dimension;

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, n);
  Index r = 0;
  for (const auto& row : increments.rows()) {
    for (const auto& term : row) {
      if (term.node < 0 || term.node >= n) {
        throw ConfigError(fmt::format("increment references node {} outside [0, {})", term.node, n));
      }
      d(r, term.node) = term.coefficient;
    }
    ++r;
  }

  // Square n x n factor with the same Gram matrix: R from QR when D is tall,
  // D padded with zero rows otherwise.
  Eigen::MatrixXd square = Eigen::MatrixXd::Zero(n, n);
  if (m > n) {
    Eigen::VectorXd tau(n);
    lapack_int info = LAPACKE_dgeqrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(m),
                                     static_cast<lapack_int>(n), d.data(),
                                     static_cast<lapack_int>(m), tau.data());
    if (info != 0) throw NumericalError(fmt::format("dgeqrf failed with info={}", info));
    square = d.topRows(n).triangularView<Eigen::Upper>();
  } else {
    square.topRows(m) = d;
  }
  d.resize(0, 0);

  Eigen::VectorXd singular(n);
  Eigen::MatrixXd vt(n, n);
  double unused_u = 0.0;
  const lapack_int info = LAPACKE_dgesdd(
      LAPACK_COL_MAJOR, 'O', static_cast<lapack_int>(n), static_cast<lapack_int>(n),
      square.data(), static_cast<lapack_int>(n), singular.data(), &unused_u,
      static_cast<lapack_int>(n), vt.data(), static_cast<lapack_int>(n));
  if (info != 0) throw NumericalError(fmt::format("dgesdd failed with info={}", info));

  // Singular values come out descending; eigenvalues are stored ascending.
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index src = n - 1 - j;
    out.eigenvalues(j) = singular(src) * singular(src);
    out.eigenvectors.col(j) = vt.row(src).transpose();
  }
  return out;
}

SpectralDecomposition eigendecompose(const IgmrfModel& model, const EigenOptions& options) {
  const Index n = model.structure.dimension();
  if (!model.increments.empty() && n <= options.factor_max_dimension) {
    return factor_decompose(model.increments, n, options);
  }
  return eigendecompose(model.structure, options);
}

Eigen::VectorXd pseudo_inverse_diagonal(const SpectralDecomposition& decomp, int null_dim) {
  const Index n = decomp.dimension();
  if (null_dim < 0 || null_dim >= n) {
    throw ConfigError(fmt::format("null_dim {} must lie in [0, {})", null_dim, n));
  }
  const double floor = 1e-12 * std::max(std::abs(decomp.largest()), 1e-300);
  Eigen::VectorXd reciprocal = Eigen::VectorXd::Zero(n);
  for (Index j = null_dim; j < n; ++j) {
    const double lambda = decomp.eigenvalues(j);
    if (lambda <= floor) {
      throw NumericalError(fmt::format(
          "retained eigenvalue {} (index {} ascending) is not positive; increase null_dim",
          lambda, j));
    }
    reciprocal(j) = 1.0 / lambda;
  }
  return decomp.eigenvectors.cwiseAbs2() * reciprocal;
}

Eigen::VectorXd marginal_stddevs(const Eigen::Ref<const Eigen::VectorXd>& variances) {
  Eigen::VectorXd out(variances.size());
  bool any_positive = false;
  for (Index i = 0; i < variances.size(); ++i) {
    double v = variances(i);
    if (!(v >= -1e-12)) {
      throw NumericalError(fmt::format("negative marginal variance {} at node {}", v, i));
    }
    if (v < 0.0) v = 0.0;
    any_positive = any_positive || v > 0.0;
    out(i) = std::sqrt(v);
  }
  if (!any_positive) throw NumericalError("all marginal variances are zero");
  return out;
}

double reference_stddev(const Eigen::Ref<const Eigen::VectorXd>& sigmas) {
  if (sigmas.size() == 0) throw ConfigError("reference_stddev of an empty vector");
  double log_sum = 0.0;
  for (Index i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas(i) > 0.0)) {
      throw NumericalError(fmt::format("nonpositive marginal sd {} at node {}", sigmas(i), i));
    }
    log_sum += std::log(sigmas(i));
  }
  return std::exp(log_sum / static_cast<double>(sigmas.size()));
}

double marginal_at_lambda(double sigma_ref, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError(fmt::format("precision must be positive, got {}", lambda));
  return sigma_ref / std::sqrt(lambda);
}

int numeric_rank(const SpectralDecomposition& decomp, double rel_tol) {
  const double threshold = rel_tol * decomp.largest();
  int count = 0;
  for (Index j = 0; j < decomp.dimension(); ++j) {
    if (decomp.eigenvalues(j) < threshold) ++count;
  }
  return count;
}

MarginalSummary summarize(const SpectralDecomposition& decomp, int null_dim) {
  MarginalSummary summary;
  summary.sigma_at_unit_lambda = marginal_stddevs(pseudo_inverse_diagonal(decomp, null_dim));
  summary.sigma_ref = reference_stddev(summary.sigma_at_unit_lambda);
  summary.null_dim_used = null_dim;
  summary.numeric_null_dim = numeric_rank(decomp);
  summary.diagnostics.smallest_retained_eigenvalue = decomp.eigenvalues(null_dim);
  summary.diagnostics.largest_dropped_eigenvalue =
      null_dim > 0 ? decomp.eigenvalues(null_dim - 1) : std::numeric_limits<double>::quiet_NaN();
  summary.diagnostics.largest_eigenvalue = decomp.largest();
  if (summary.numeric_null_dim != null_dim) {
    summary.warning = fmt::format(
        "numeric null space has dimension {} but {} eigenvalues were dropped",
        summary.numeric_null_dim, null_dim);
  }
  return summary;
}

MarginalSummary summarize_model(const IgmrfModel& model, const EigenOptions& options,
                                std::optional<int> null_dim, bool auto_null_dim) {
  const auto decomp = eigendecompose(model, options);
  int k = null_dim.value_or(model.null_dim);
  if (auto_null_dim) k = numeric_rank(decomp);
  return summarize(decomp, k);
}

}  // namespace igmrf
