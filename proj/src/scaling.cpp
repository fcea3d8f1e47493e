#include "igmrf/scaling.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "igmrf/error.hpp"

namespace igmrf {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{} must be positive and finite, got {}", name, value));
  }
}

double positive_quantile(double alpha, double mu) {
  const double q = gaussian_quantile(alpha, mu);
  if (!(q > 0.0)) {
    throw NumericalError(fmt::format(
        "upper-limit formula undefined for this (alpha, mu): quantile {} at alpha={} mu={} "
        "is not positive",
        q, alpha, mu));
  }
  return q;
}

}  // namespace

void HyperpriorSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw ConfigError(fmt::format("alpha must lie in (0, 0.5), got {}", alpha));
  }
  require_positive(b, "b");
  if (!std::isfinite(mu)) throw ConfigError("mu must be finite");
  if (!(gaussian_quantile(alpha, mu) > 0.0)) {
    throw NumericalError(fmt::format(
        "upper-limit formula undefined for this (alpha, mu): quantile at alpha={} mu={} is "
        "not positive",
        alpha, mu));
  }
}

double gaussian_quantile(double alpha, double mu) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError(fmt::format("alpha must lie in (0, 1), got {}", alpha));
  }
  return mu + boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), alpha);
}

double upper_limit(double b, double sigma_ref, double alpha, double mu) {
  require_positive(b, "b");
  require_positive(sigma_ref, "sigma_ref");
  return std::sqrt(b * sigma_ref * sigma_ref / positive_quantile(alpha, mu));
}

double aggregate_upper_limit(std::vector<double> limits) {
  if (limits.empty()) throw ConfigError("median of an empty list of upper limits");
  std::sort(limits.begin(), limits.end());
  const std::size_t mid = limits.size() / 2;
  if (limits.size() % 2 == 1) return limits[mid];
  return 0.5 * (limits[mid - 1] + limits[mid]);
}

double scaled_sd_parameter(double upper, double alpha, double mu, double sigma_ref) {
  require_positive(upper, "U");
  require_positive(sigma_ref, "sigma_ref");
  return upper * upper * positive_quantile(alpha, mu) / (sigma_ref * sigma_ref);
}

double transfer_sd_parameter(double b_src, double sigma_ref_src, double sigma_ref_dst) {
  require_positive(b_src, "b_src");
  require_positive(sigma_ref_src, "sigma_ref_src");
  require_positive(sigma_ref_dst, "sigma_ref_dst");
  return b_src * (sigma_ref_src * sigma_ref_src) / (sigma_ref_dst * sigma_ref_dst);
}

double subdivision_precision(double lambda, int k, ModelClass model_class) {
  require_positive(lambda, "lambda");
  if (k < 1) throw ConfigError(fmt::format("subdivision factor must be >= 1, got {}", k));
  const double kk = k;
  switch (model_class) {
    case ModelClass::rw1: return kk * lambda;
    case ModelClass::rw2: return kk * kk * kk * lambda;
    case ModelClass::torus1:
    case ModelClass::torus2:
    case ModelClass::bound1:
    case ModelClass::bound2: return kk * kk * lambda;
    case ModelClass::custom: break;
  }
  throw ConfigError("no subdivision law for custom models");
}

double upper_limit_generic(double sigma_ref, double alpha, const PrecisionQuantile& quantile) {
  require_positive(sigma_ref, "sigma_ref");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const double q = quantile(alpha);
  if (!(q > 0.0)) {
    throw NumericalError(fmt::format("precision quantile {} at alpha={} is not positive", q, alpha));
  }
  return sigma_ref / std::sqrt(q);
}

PrecisionQuantile gamma_precision_quantile(double shape, double rate) {
  require_positive(shape, "shape");
  require_positive(rate, "rate");
  return [shape, rate](double alpha) {
    return boost::math::quantile(boost::math::gamma_distribution<double>(shape, 1.0 / rate),
                                 alpha);
  };
}

ScalingReport scaling_pipeline(const HyperpriorSpec& spec, const std::vector<ModelSigma>& models) {
  if (models.empty()) throw ConfigError("scaling pipeline needs at least one model");
  if (!(spec.alpha > 0.0 && spec.alpha < 0.5)) {
    throw ConfigError(fmt::format("alpha must lie in (0, 0.5), got {}", spec.alpha));
  }
  require_positive(spec.b, "b");

  ScalingReport report;
  report.inputs = spec;
  report.quantile = positive_quantile(spec.alpha, spec.mu);
  std::vector<double> limits;
  for (const auto& m : models) {
    const double u = upper_limit(spec.b, m.sigma_ref, spec.alpha, spec.mu);
    limits.push_back(u);
    report.models.push_back({m.label, m.sigma_ref, u, 0.0});
  }
  report.aggregated_upper = aggregate_upper_limit(limits);
  for (auto& m : report.models) {
    // The median model gets b back exactly rather than through a round trip.
    m.b_new = m.upper == report.aggregated_upper
                  ? spec.b
                  : scaled_sd_parameter(report.aggregated_upper, spec.alpha, spec.mu, m.sigma_ref);
  }
  return report;
}

nlohmann::json to_json(const ScalingReport& report) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : report.models) {
    models.push_back({{"label", m.label}, {"sigma_ref", m.sigma_ref}, {"U", m.upper},
                      {"b_new", m.b_new}});
  }
  return {{"inputs", {{"mu", report.inputs.mu}, {"b", report.inputs.b},
                      {"alpha", report.inputs.alpha}}},
          {"quantile", report.quantile},
          {"models", models},
          {"aggregated_U", report.aggregated_upper}};
}

ScalingReport scaling_report_from_json(const nlohmann::json& doc) {
  try {
    ScalingReport report;
    const auto& in = doc.at("inputs");
    report.inputs = {in.at("mu").get<double>(), in.at("b").get<double>(),
                     in.at("alpha").get<double>()};
    report.quantile = doc.value("quantile", gaussian_quantile(report.inputs.alpha, report.inputs.mu));
    for (const auto& m : doc.at("models")) {
      report.models.push_back({m.at("label").get<std::string>(), m.at("sigma_ref").get<double>(),
                               m.at("U").get<double>(), m.at("b_new").get<double>()});
    }
    report.aggregated_upper = doc.at("aggregated_U").get<double>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed scaling report: {}", e.what()));
  }
}

}  // namespace igmrf
