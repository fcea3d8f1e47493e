#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "igmrf/builders.hpp"
#include "igmrf/spectral.hpp"

namespace igmrf {

// xoshiro256** (Blackman & Vigna) seeded through splitmix64. Fixed algorithm,
// so streams are identical on every platform.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  // Uniform on (0, 1], 53-bit resolution.
  double uniform_open_closed();
  // Standard normal via Box–Muller; consumes exactly two words per pair of
  // variates, the second of each pair is cached.
  double normal();

  // Independent substream for a (seed, stream) pair, used to give every draw
  // its own generator so results do not depend on the thread count.
  static Xoshiro256 substream(std::uint64_t seed, std::uint64_t stream);

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

// Worker count from IGMRF_THREADS (default 1, minimum 1).
int configured_threads();

struct SampleBatch {
  std::string model_label;
  double lambda = 1.0;
  Index count = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd draws;  // count x nodes
};

// u = Σ_{j >= null_dim} Γ_j z_j / sqrt(λ λ_j), z_j iid N(0, 1). Draw i uses
// substream i of `seed`.
SampleBatch sample_igmrf(const SpectralDecomposition& decomp, double lambda, int null_dim,
                         Index count, std::uint64_t seed, std::string model_label = {});

// Per-node sample standard deviation with denominator count - 1.
Eigen::VectorXd empirical_marginal_sd(const SampleBatch& batch);

// One draw per row, header node_0..node_{n-1}.
void write_batch_csv(std::ostream& out, const SampleBatch& batch, int significant_digits = 17);

inline constexpr Index kOracleMaxDimension = 400;

// Full generalized inverse Γ_kept Λ_kept⁻¹ Γ_keptᵀ, assembled by explicit
// matrix products from Eigen's own symmetric solver (independent of the
// LAPACK path used by eigendecompose).
Eigen::MatrixXd dense_pinv_oracle(const SparseSymmetricMatrix& matrix, int null_dim);

// Same reassembly from an existing decomposition. Needed when the cut at
// null_dim splits a degenerate eigenvalue cluster, where the result depends
// on the basis chosen inside the cluster.
Eigen::MatrixXd dense_pinv_oracle(const SpectralDecomposition& decomp, int null_dim);

// True when eigenvalues null_dim - 1 and null_dim are within rel_gap * λ_max.
bool cut_splits_cluster(const SpectralDecomposition& decomp, int null_dim,
                        double rel_gap = 1e-9);

struct VerificationReport {
  std::string model;
  double lambda = 1.0;
  Index count = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  double empirical_sref = 0.0;
  double expected = 0.0;
  double rel_dev = 0.0;
  // Relative Monte Carlo standard error of a single node's sd, 1/sqrt(2(N-1)).
  double relative_standard_error = 0.0;
  bool pass = false;
  std::string note;
};

// Compares the geometric mean of empirical per-node sds against σ_ref/sqrt(λ).
// Fails when the deviation exceeds `tolerance`, or when three standard errors
// already exceed it (sample too small to decide).
VerificationReport verify_sref_montecarlo(const IgmrfModel& model, double lambda, Index count,
                                          double tolerance, std::uint64_t seed,
                                          const EigenOptions& options = {});

nlohmann::json to_json(const VerificationReport& report);

}  // namespace igmrf
