#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "igmrf/builders.hpp"

namespace igmrf {

// Gaussian hyperprior on a precision parameter, parameterized by location mu
// and the adjusted standard-deviation parameter b, evaluated at tail
// probability alpha.
struct HyperpriorSpec {
  double mu = 0.0;
  double b = 1.0;
  double alpha = 0.001;

  // Checks alpha in (0, 0.5), b > 0 and a positive quantile; throws ConfigError.
  void validate() const;
};

// mu + z_alpha: the alpha-quantile of a unit-variance Gaussian centred at mu.
double gaussian_quantile(double alpha, double mu);

// U = sqrt(b σ_ref² / q) with q = gaussian_quantile(alpha, mu). Throws
// NumericalError when q <= 0.
double upper_limit(double b, double sigma_ref, double alpha, double mu);

// Statistical median; the mean of the two middle values for even counts.
double aggregate_upper_limit(std::vector<double> limits);

// b_new = U² q / σ_ref².
double scaled_sd_parameter(double upper, double alpha, double mu, double sigma_ref);

// b_src σ_src² / σ_dst².
double transfer_sd_parameter(double b_src, double sigma_ref_src, double sigma_ref_dst);

// Precision of the refined field after splitting each interval into k:
// kλ for RW1, k³λ for RW2, k²λ for two-dimensional second-order classes.
double subdivision_precision(double lambda, int k, ModelClass model_class);

// Generic hyperprior family: Pr(λ / σ_ref² < 1 / U²) = alpha, so
// U = σ_ref / sqrt(q_alpha) where q_alpha is the alpha-quantile of λ.
using PrecisionQuantile = std::function<double(double alpha)>;
double upper_limit_generic(double sigma_ref, double alpha, const PrecisionQuantile& quantile);
// Quantile function of a Gamma(shape, rate) precision.
PrecisionQuantile gamma_precision_quantile(double shape, double rate);

struct ModelSigma {
  std::string label;
  double sigma_ref;
};

struct ScaledModel {
  std::string label;
  double sigma_ref;
  double upper;
  double b_new;
};

struct ScalingReport {
  HyperpriorSpec inputs;
  double quantile = 0.0;
  std::vector<ScaledModel> models;
  double aggregated_upper = 0.0;
};

// Per-model U with the shared b, median U, then b_new for every model.
ScalingReport scaling_pipeline(const HyperpriorSpec& spec, const std::vector<ModelSigma>& models);

// {inputs:{mu,b,alpha}, models:[{label,sigma_ref,U,b_new}], aggregated_U}
nlohmann::json to_json(const ScalingReport& report);
ScalingReport scaling_report_from_json(const nlohmann::json& doc);

}  // namespace igmrf
