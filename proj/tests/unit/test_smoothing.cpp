#include <cmath>

#include "doctest.h"
#include "igmrf/builders.hpp"
#include "igmrf/error.hpp"
#include "igmrf/smoothing.hpp"

using namespace igmrf;

TEST_CASE("vanishing noise reproduces the observations") {
  const auto m = build_bound1(8, 8);
  const Eigen::VectorXd y = synthetic_surface(m.lattice);
  const auto post = smooth_posterior_mean(m.structure, 1.0, y, 1e-6);
  CHECK((post.mean - y).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(post.relative_residual <= 1e-10);
}

TEST_CASE("plane residual") {
  const auto lattice = LatticeSpec::grid(6, 7, Topology::bounded);
  Eigen::VectorXd plane(lattice.total_nodes());
  for (int d = 1; d <= 6; ++d)
    for (int s = 1; s <= 7; ++s) plane(lattice.node_index(d, s)) = 2.0 - 0.3 * d + 0.7 * s;
  CHECK(plane_residual(lattice, plane) <= 1e-10);
  CHECK(plane_residual(lattice, synthetic_surface(lattice)) > 0.1);
}

TEST_CASE("posterior mean flattens with growing precision") {
  const auto m = build_bound1(10, 10);
  const auto a = run_smoothing_demo(m, 0.3, 1.0, 7);
  const auto b = run_smoothing_demo(m, 0.3, 10.0, 7);
  const auto c = run_smoothing_demo(m, 0.3, 100.0, 7);
  CHECK(a.noisy == b.noisy);
  const double ra = plane_residual(m.lattice, a.posterior.mean);
  const double rb = plane_residual(m.lattice, b.posterior.mean);
  const double rc = plane_residual(m.lattice, c.posterior.mean);
  CHECK(ra > rb);
  CHECK(rb > rc);
}

TEST_CASE("smoothing demo is deterministic and validates input") {
  const auto m = build_bound2(7, 7);
  const auto a = run_smoothing_demo(m, 0.2, 3.0, 11);
  const auto b = run_smoothing_demo(m, 0.2, 3.0, 11);
  CHECK(a.posterior.mean == b.posterior.mean);
  CHECK_THROWS_AS(run_smoothing_demo(m, 0.0, 3.0, 11), ConfigError);
  CHECK_THROWS_AS(smooth_posterior_mean(m.structure, -1.0, a.truth, 0.2), ConfigError);
  CHECK_THROWS_AS(smooth_posterior_mean(m.structure, 1.0, Eigen::VectorXd::Zero(3), 0.2),
                  ConfigError);
}
