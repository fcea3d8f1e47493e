#include <cmath>
#include <random>

#include "doctest.h"
#include "igmrf/error.hpp"
#include "igmrf/scaling.hpp"
#include "oracles.hpp"

using namespace igmrf;

namespace {

// Full-precision σ_ref values produced by the spectral module (see
// test_spectral / acceptance for their checks against published values).
constexpr double kRw1At11 = 1.2849251013293104;
constexpr double kRw2At11 = 1.5421426434935068;
constexpr double kRw2dAt11 = 0.8313610734770817;

}  // namespace

TEST_CASE("gaussian quantile") {
  CHECK(gaussian_quantile(0.5, 7.0) == doctest::Approx(7.0).epsilon(1e-14));
  const double z = oracle::normal_quantile(0.001);
  CHECK(z == doctest::Approx(-3.0902).epsilon(1e-4));
  CHECK(gaussian_quantile(0.001, 0.0) == doctest::Approx(z).epsilon(1e-10));
  CHECK(gaussian_quantile(0.001, 7.0) == doctest::Approx(7.0 + z).epsilon(1e-10));
  CHECK(gaussian_quantile(0.001, 7.0) == doctest::Approx(3.9098).epsilon(1e-4));
  for (double p : {0.01, 0.025, 0.2, 0.9}) {
    CHECK(gaussian_quantile(p, 0.0) == doctest::Approx(oracle::normal_quantile(p)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(gaussian_quantile(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(gaussian_quantile(1.0, 1.0), ConfigError);
}

TEST_CASE("upper limit") {
  CHECK(std::abs(upper_limit(2, 10.486, 0.001, 7) - 7.5) <= 0.01);
  CHECK(std::abs(upper_limit(2, 2.91, 0.001, 7) - 2.08) <= 0.01);

  const double b = 1.7, alpha = 0.01, mu = 5.0, u0 = 3.3;
  const double sigma = std::sqrt(gaussian_quantile(alpha, mu) / b) * u0;
  CHECK(upper_limit(b, sigma, alpha, mu) == doctest::Approx(u0).epsilon(1e-13));

  try {
    upper_limit(2, 1.0, 0.001, 2.0);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("upper-limit formula undefined") != std::string::npos);
  }
  CHECK_THROWS_AS(upper_limit(0.0, 1.0, 0.001, 7.0), ConfigError);
  CHECK_THROWS_AS(upper_limit(1.0, -1.0, 0.001, 7.0), ConfigError);
}

TEST_CASE("aggregate upper limit") {
  CHECK(std::abs(aggregate_upper_limit({7.5, 2.08}) - 4.79) <= 1e-12);
  CHECK(aggregate_upper_limit({3.0}) == 3.0);
  CHECK(aggregate_upper_limit({1.0, 100.0, 2.0}) == 2.0);
  CHECK(aggregate_upper_limit({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK_THROWS_AS(aggregate_upper_limit({}), ConfigError);
}

TEST_CASE("scaled sd parameter") {
  CHECK(std::abs(scaled_sd_parameter(4.79, 0.001, 7, 10.486) - 0.81) <= 0.01);
  CHECK(std::abs(scaled_sd_parameter(4.79, 0.001, 7, 2.91) - 10.59) <= 0.01);
  CHECK_THROWS_AS(scaled_sd_parameter(4.79, 0.001, -1.0, 2.91), NumericalError);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.05, 20.0);
  std::uniform_real_distribution<double> tail(0.0005, 0.2);
  for (int i = 0; i < 200; ++i) {
    const double b = pos(rng), s = pos(rng), a = tail(rng), mu = 6.0 + pos(rng);
    CHECK(scaled_sd_parameter(upper_limit(b, s, a, mu), a, mu, s) ==
          doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("transfer sd parameter") {
  // Direct formula with the rounded input.
  CHECK(transfer_sd_parameter(0.81, 10.486, 2.91) ==
        doctest::Approx(0.81 * 10.486 * 10.486 / (2.91 * 2.91)).epsilon(1e-14));
  // The published 10.59 comes from the unrounded b_rw2.
  const auto report = scaling_pipeline({7, 2, 0.001}, {{"rw2", 10.486}, {"rw2d", 2.91}});
  CHECK(std::abs(transfer_sd_parameter(report.models[0].b_new, 10.486, 2.91) - 10.59) <= 0.01);

  CHECK(transfer_sd_parameter(1.3, 2.2, 2.2) == doctest::Approx(1.3).epsilon(1e-15));
  const double direct = transfer_sd_parameter(0.7, kRw1At11, kRw2dAt11);
  const double chained =
      transfer_sd_parameter(transfer_sd_parameter(0.7, kRw1At11, kRw2At11), kRw2At11, kRw2dAt11);
  CHECK(std::abs(direct - chained) <= 1e-12 * direct);
  CHECK_THROWS_AS(transfer_sd_parameter(0.0, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(transfer_sd_parameter(1.0, 1.0, -1.0), ConfigError);
}

TEST_CASE("subdivision precision") {
  CHECK(subdivision_precision(1.0, 2, ModelClass::rw2) == 8.0);
  CHECK(subdivision_precision(1.0, 2, ModelClass::rw1) == 2.0);
  for (auto c : {ModelClass::rw1, ModelClass::rw2, ModelClass::bound1, ModelClass::torus2}) {
    CHECK(subdivision_precision(5.0, 1, c) == 5.0);
  }
  CHECK(subdivision_precision(1.0, 3, ModelClass::bound1) == 9.0);
  CHECK(subdivision_precision(1.0, 3, ModelClass::bound2) == 9.0);
  CHECK_THROWS_AS(subdivision_precision(1.0, 2, ModelClass::custom), ConfigError);
  CHECK_THROWS_AS(subdivision_precision(1.0, 0, ModelClass::rw1), ConfigError);
  CHECK_THROWS_AS(subdivision_precision(-1.0, 2, ModelClass::rw1), ConfigError);
}

TEST_CASE("scaling pipeline reproduces the worked example") {
  const auto r = scaling_pipeline({7, 2, 0.001}, {{"rw2", 10.486}, {"rw2d", 2.91}});
  CHECK(std::abs(r.models[0].upper - 7.5) <= 0.01);
  CHECK(std::abs(r.models[1].upper - 2.08) <= 0.01);
  CHECK(std::abs(r.aggregated_upper - 4.79) <= 0.01);
  CHECK(std::abs(r.models[0].b_new - 0.81) <= 0.01);
  CHECK(std::abs(r.models[1].b_new - 10.59) <= 0.01);
}

TEST_CASE("scaling pipeline with computed 11-node sigmas") {
  const auto two = scaling_pipeline({7, 0.9, 0.001}, {{"rw2", kRw2At11}, {"rw2d", kRw2dAt11}});
  CHECK(std::abs(two.models[0].b_new - 0.53) <= 0.01);
  CHECK(std::abs(two.models[1].b_new - 1.83) <= 0.01);

  const auto three = scaling_pipeline(
      {7, 1, 0.001}, {{"rw1", kRw1At11}, {"rw2", kRw2At11}, {"rw2d", kRw2dAt11}});
  CHECK(three.models[0].b_new == 1.0);
  CHECK(std::abs(three.models[1].b_new - 0.69) <= 0.01);
  CHECK(std::abs(three.models[2].b_new - 2.39) <= 0.01);

  CHECK_THROWS_AS(scaling_pipeline({7, 1, 0.001}, {}), ConfigError);
  CHECK_THROWS_AS(scaling_pipeline({0, 1, 0.001}, {{"x", 1.0}}), NumericalError);
  CHECK_THROWS_AS(scaling_pipeline({7, 1, 0.7}, {{"x", 1.0}}), ConfigError);
}

TEST_CASE("scaling pipeline properties") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> sig(0.1, 50.0);
  std::uniform_real_distribution<double> bdist(0.1, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int count = 1 + trial % 5;
    std::vector<ModelSigma> models;
    for (int i = 0; i < count; ++i) models.push_back({"m" + std::to_string(i), sig(rng)});
    const HyperpriorSpec spec{7.0, bdist(rng), 0.001};
    const auto r = scaling_pipeline(spec, models);

    const double invariant = r.aggregated_upper * r.aggregated_upper * r.quantile;
    for (const auto& m : r.models) {
      CHECK(m.b_new * m.sigma_ref * m.sigma_ref == doctest::Approx(invariant).epsilon(1e-10));
    }
    if (count % 2 == 1) {
      int fixed = 0;
      for (const auto& m : r.models) {
        if (m.upper == r.aggregated_upper) {
          CHECK(std::abs(m.b_new - spec.b) <= 1e-10);
          ++fixed;
        }
      }
      CHECK(fixed >= 1);
    }
    // Inverse ordering in σ_ref.
    for (const auto& a : r.models)
      for (const auto& b : r.models)
        if (a.sigma_ref < b.sigma_ref) CHECK(a.b_new > b.b_new);

    // Transfer reproduces the pipeline's ratios.
    for (std::size_t j = 1; j < r.models.size(); ++j) {
      CHECK(transfer_sd_parameter(r.models[0].b_new, r.models[0].sigma_ref, r.models[j].sigma_ref) ==
            doctest::Approx(r.models[j].b_new).epsilon(1e-12));
    }
  }
}

TEST_CASE("hyperprior spec validation") {
  CHECK_NOTHROW(HyperpriorSpec{7, 2, 0.001}.validate());
  CHECK_THROWS_AS((HyperpriorSpec{7, 2, 0.5}.validate()), ConfigError);
  CHECK_THROWS_AS((HyperpriorSpec{7, 0, 0.01}.validate()), ConfigError);
  CHECK_THROWS_AS((HyperpriorSpec{1, 2, 0.001}.validate()), NumericalError);
}

TEST_CASE("generic precision quantile") {
  // Gamma(1, rate) is exponential: q_alpha = -log(1 - alpha) / rate.
  const double rate = 0.5, alpha = 0.01, sigma = 2.4;
  const double q = -std::log1p(-alpha) / rate;
  CHECK(gamma_precision_quantile(1.0, rate)(alpha) == doctest::Approx(q).epsilon(1e-12));
  const double u = upper_limit_generic(sigma, alpha, gamma_precision_quantile(1.0, rate));
  CHECK(u == doctest::Approx(sigma / std::sqrt(q)).epsilon(1e-12));
  // Pr(λ/σ² < 1/U²) = 1 - exp(-rate σ²/U²) = alpha.
  CHECK(1.0 - std::exp(-rate * sigma * sigma / (u * u)) == doctest::Approx(alpha).epsilon(1e-12));
  CHECK_THROWS_AS(upper_limit_generic(sigma, alpha, [](double) { return -1.0; }), NumericalError);
  CHECK_THROWS_AS(gamma_precision_quantile(0.0, 1.0), ConfigError);
}

TEST_CASE("report json") {
  const auto r = scaling_pipeline({7, 2, 0.001}, {{"rw2", 10.486}, {"rw2d", 2.91}});
  const auto j = to_json(r);
  CHECK(j.at("inputs").at("mu") == 7.0);
  CHECK(j.at("models").size() == 2);
  CHECK(j.at("models")[1].at("label") == "rw2d");
  const auto back = scaling_report_from_json(j);
  CHECK(back.aggregated_upper == r.aggregated_upper);
  CHECK(back.models[1].b_new == r.models[1].b_new);
  CHECK_THROWS_AS(scaling_report_from_json(nlohmann::json::object()), ConfigError);
}
