#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "igmrf/builders.hpp"

namespace igmrf {

struct PosteriorMean {
  Eigen::VectorXd mean;
  // ‖A x − rhs‖ / ‖rhs‖ for the solved system.
  double relative_residual = 0.0;
};

// Posterior mean of u given y = u + ε, ε ~ N(0, noise_sd² I), and the prior
// precision λP: solves (λP + I/noise_sd²) x = y/noise_sd².
PosteriorMean smooth_posterior_mean(const SparseSymmetricMatrix& structure, double lambda,
                                    const Eigen::Ref<const Eigen::VectorXd>& observations,
                                    double noise_sd);

// Smooth test surface on the lattice (a plane plus a low-frequency bump).
Eigen::VectorXd synthetic_surface(const LatticeSpec& lattice);

// Residual norm after removing the least-squares fit of {1, d, s}.
double plane_residual(const LatticeSpec& lattice, const Eigen::Ref<const Eigen::VectorXd>& values);

struct SmoothingDemo {
  Eigen::VectorXd truth;
  Eigen::VectorXd noisy;
  PosteriorMean posterior;
};

SmoothingDemo run_smoothing_demo(const IgmrfModel& model, double noise_sd, double lambda,
                                 std::uint64_t seed);

}  // namespace igmrf
