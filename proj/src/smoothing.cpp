#include "igmrf/smoothing.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "igmrf/error.hpp"
#include "igmrf/sampling.hpp"

namespace igmrf {

PosteriorMean smooth_posterior_mean(const SparseSymmetricMatrix& structure, double lambda,
                                    const Eigen::Ref<const Eigen::VectorXd>& observations,
                                    double noise_sd) {
  if (!(lambda > 0.0)) throw ConfigError(fmt::format("lambda must be positive, got {}", lambda));
  if (!(noise_sd > 0.0)) throw ConfigError(fmt::format("noise_sd must be positive, got {}", noise_sd));
  if (observations.size() != structure.dimension()) {
    throw ConfigError("observation count does not match the lattice");
  }
  const double tau = 1.0 / (noise_sd * noise_sd);
  Eigen::SparseMatrix<double> a = structure.to_sparse() * lambda;
  for (Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) += tau;
  const Eigen::VectorXd rhs = tau * observations;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) throw NumericalError("posterior precision factorization failed");
  PosteriorMean out;
  out.mean = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw NumericalError("posterior solve failed");
  out.relative_residual = (a * out.mean - rhs).norm() / std::max(rhs.norm(), 1e-300);
  return out;
}

Eigen::VectorXd synthetic_surface(const LatticeSpec& lattice) {
  Eigen::VectorXd u(lattice.total_nodes());
  const double h1 = lattice.n1() > 1 ? 1.0 / (lattice.n1() - 1) : 0.0;
  const double h2 = lattice.n2() > 1 ? 1.0 / (lattice.n2() - 1) : 0.0;
  for (int d = 1; d <= lattice.n1(); ++d) {
    for (int s = 1; s <= lattice.n2(); ++s) {
      const double x = (d - 1) * h1;
      const double y = (s - 1) * h2;
      u(lattice.node_index(d, s)) = 1.0 + 0.5 * x - 0.25 * y +
                                    std::sin(std::numbers::pi * x) * std::cos(std::numbers::pi * y);
    }
  }
  return u;
}

double plane_residual(const LatticeSpec& lattice, const Eigen::Ref<const Eigen::VectorXd>& values) {
  Eigen::MatrixXd basis(lattice.total_nodes(), 3);
  for (int d = 1; d <= lattice.n1(); ++d) {
    for (int s = 1; s <= lattice.n2(); ++s) {
      basis.row(lattice.node_index(d, s)) << 1.0, d, s;
    }
  }
  const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(values);
  return (values - basis * coef).norm();
}

SmoothingDemo run_smoothing_demo(const IgmrfModel& model, double noise_sd, double lambda,
                                 std::uint64_t seed) {
  if (!(noise_sd > 0.0)) throw ConfigError(fmt::format("noise_sd must be positive, got {}", noise_sd));
  SmoothingDemo demo;
  demo.truth = synthetic_surface(model.lattice);
  Xoshiro256 rng(seed);
  demo.noisy = demo.truth;
  for (Index i = 0; i < demo.noisy.size(); ++i) demo.noisy(i) += noise_sd * rng.normal();
  demo.posterior = smooth_posterior_mean(model.structure, lambda, demo.noisy, noise_sd);
  return demo;
}

}  // namespace igmrf
