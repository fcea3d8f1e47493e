#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "igmrf/builders.hpp"
#include "igmrf/lattice.hpp"

namespace igmrf {

inline constexpr Index kDefaultMaxDimension = 12000;
inline constexpr double kNullRelTol = 1e-8;

// Full symmetric eigendecomposition: eigenvalues ascending, column i of
// `eigenvectors` paired with eigenvalues(i).
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  Index dimension() const { return eigenvalues.size(); }
  double largest() const { return eigenvalues.size() ? eigenvalues(eigenvalues.size() - 1) : 0.0; }
};

// Largest dimension decomposed through the increment matrix; above it the
// dense factor no longer fits comfortably in memory and P is used directly.
inline constexpr Index kFactorMaxDimension = 2500;

struct EigenOptions {
  Index max_dimension = kDefaultMaxDimension;
  Index factor_max_dimension = kFactorMaxDimension;
};

// Dense divide-and-conquer solve (LAPACK dsyevd). Deterministic for a fixed
// build and thread count; degenerate eigenvectors are only defined up to a
// rotation of their subspace.
SpectralDecomposition eigendecompose(const SparseSymmetricMatrix& matrix,
                                     const EigenOptions& options = {});

// Same decomposition of P = DᵀD from the singular values and right singular
// vectors of D (Householder QR when D is tall, then dgesdd). Small
// eigenvalues keep their relative accuracy, which the route through P loses
// for badly conditioned models such as long RW2 chains.
SpectralDecomposition factor_decompose(const IncrementSet& increments, Index dimension,
                                       const EigenOptions& options = {});

// factor_decompose when the model carries its increments and fits under
// factor_max_dimension, eigendecompose of the structure matrix otherwise.
SpectralDecomposition eigendecompose(const IgmrfModel& model, const EigenOptions& options = {});

// Σ*_ii = Σ_{j >= null_dim} Γ_ij² / λ_j: the diagonal of the generalized
// inverse with the null_dim smallest eigenvalues treated as infinite.
// Throws NumericalError if a retained eigenvalue is not positive.
Eigen::VectorXd pseudo_inverse_diagonal(const SpectralDecomposition& decomp, int null_dim);

// Elementwise sqrt. Entries in [-1e-12, 0) are clamped to zero; anything more
// negative, or an all-zero result, throws NumericalError.
Eigen::VectorXd marginal_stddevs(const Eigen::Ref<const Eigen::VectorXd>& variances);

// Geometric mean exp(mean(log σ_i)). Every entry must be strictly positive.
double reference_stddev(const Eigen::Ref<const Eigen::VectorXd>& sigmas);

// σ_ref / sqrt(λ).
double marginal_at_lambda(double sigma_ref, double lambda);

// Number of eigenvalues below rel_tol * λ_max.
int numeric_rank(const SpectralDecomposition& decomp, double rel_tol = kNullRelTol);

struct ConditionDiagnostics {
  double smallest_retained_eigenvalue = 0.0;
  // NaN when nothing is dropped.
  double largest_dropped_eigenvalue = 0.0;
  double largest_eigenvalue = 0.0;
};

struct MarginalSummary {
  Eigen::VectorXd sigma_at_unit_lambda;
  double sigma_ref = 0.0;
  int null_dim_used = 0;
  int numeric_null_dim = 0;
  ConditionDiagnostics diagnostics;
  // Set when numeric_null_dim != null_dim_used.
  std::optional<std::string> warning;
};

MarginalSummary summarize(const SpectralDecomposition& decomp, int null_dim);

// Decomposes the model's structure matrix and summarizes it. `null_dim`
// overrides the model's own; `auto_null_dim` uses the numeric rank instead.
MarginalSummary summarize_model(const IgmrfModel& model, const EigenOptions& options = {},
                                std::optional<int> null_dim = std::nullopt,
                                bool auto_null_dim = false);

}  // namespace igmrf
