#include "igmrf/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "igmrf/error.hpp"

namespace igmrf {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  return mix64(state);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64(sm);
}

Xoshiro256 Xoshiro256::substream(std::uint64_t seed, std::uint64_t stream) {
  return Xoshiro256(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Xoshiro256::uniform_open_closed() {
  return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

double Xoshiro256::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform_open_closed()));
  const double angle = 2.0 * std::numbers::pi * uniform_open_closed();
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

int configured_threads() {
  if (const char* env = std::getenv("IGMRF_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

SampleBatch sample_igmrf(const SpectralDecomposition& decomp, double lambda, int null_dim,
                         Index count, std::uint64_t seed, std::string model_label) {
  if (!(lambda > 0.0)) throw ConfigError(fmt::format("lambda must be positive, got {}", lambda));
  if (count < 1) throw ConfigError("sample count must be at least 1");
  const Index n = decomp.dimension();
  if (null_dim < 0 || null_dim >= n) {
    throw ConfigError(fmt::format("null_dim {} must lie in [0, {})", null_dim, n));
  }
  const Index kept = n - null_dim;
  const double floor = 1e-12 * std::abs(decomp.largest());
  Eigen::VectorXd scale(kept);
  for (Index j = 0; j < kept; ++j) {
    const double ev = decomp.eigenvalues(null_dim + j);
    if (ev <= floor) {
      throw NumericalError(fmt::format(
          "retained eigenvalue {} (index {} ascending) is not positive", ev, null_dim + j));
    }
    scale(j) = 1.0 / std::sqrt(lambda * ev);
  }

  // Column i holds the standard normals of draw i.
  Eigen::MatrixXd z(kept, count);
  auto fill = [&](Index first, Index last) {
    for (Index i = first; i < last; ++i) {
      auto rng = Xoshiro256::substream(seed, static_cast<std::uint64_t>(i));
      for (Index j = 0; j < kept; ++j) z(j, i) = rng.normal();
    }
  };
  const Index workers = std::min<Index>(configured_threads(), count);
  if (workers <= 1) {
    fill(0, count);
  } else {
    std::vector<std::jthread> pool;
    const Index chunk = (count + workers - 1) / workers;
    for (Index w = 0; w < workers; ++w) {
      const Index first = w * chunk;
      const Index last = std::min(count, first + chunk);
      if (first < last) pool.emplace_back(fill, first, last);
    }
  }

  SampleBatch batch;
  batch.model_label = std::move(model_label);
  batch.lambda = lambda;
  batch.count = count;
  batch.seed = seed;
  batch.draws = (decomp.eigenvectors.rightCols(kept) * scale.asDiagonal() * z).transpose();
  return batch;
}

Eigen::VectorXd empirical_marginal_sd(const SampleBatch& batch) {
  const Index count = batch.draws.rows();
  if (count < 2) throw ConfigError("empirical sd needs at least two draws");
  const Eigen::RowVectorXd mean = batch.draws.colwise().mean();
  const Eigen::MatrixXd centred = batch.draws.rowwise() - mean;
  return (centred.colwise().squaredNorm() / static_cast<double>(count - 1))
      .transpose()
      .cwiseSqrt();
}

void write_batch_csv(std::ostream& out, const SampleBatch& batch, int significant_digits) {
  const Index nodes = batch.draws.cols();
  for (Index j = 0; j < nodes; ++j) out << (j ? "," : "") << "node_" << j;
  out << '\n';
  for (Index i = 0; i < batch.draws.rows(); ++i) {
    for (Index j = 0; j < nodes; ++j) {
      out << (j ? "," : "") << fmt::format("{:.{}g}", batch.draws(i, j), significant_digits);
    }
    out << '\n';
  }
}

VerificationReport verify_sref_montecarlo(const IgmrfModel& model, double lambda, Index count,
                                          double tolerance, std::uint64_t seed,
                                          const EigenOptions& options) {
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (count < 2) throw ConfigError("verification needs at least two draws");
  const auto decomp = eigendecompose(model, options);
  const auto summary = summarize(decomp, model.null_dim);
  const auto batch = sample_igmrf(decomp, lambda, model.null_dim, count, seed, model.label);
  const Eigen::VectorXd sd = empirical_marginal_sd(batch);

  VerificationReport report;
  report.model = model.label;
  report.lambda = lambda;
  report.count = count;
  report.seed = seed;
  report.tolerance = tolerance;
  report.empirical_sref = reference_stddev(sd);
  report.expected = marginal_at_lambda(summary.sigma_ref, lambda);
  report.rel_dev = std::abs(report.empirical_sref - report.expected) / report.expected;
  report.relative_standard_error = 1.0 / std::sqrt(2.0 * static_cast<double>(count - 1));
  const bool resolvable = 3.0 * report.relative_standard_error <= tolerance;
  report.pass = resolvable && report.rel_dev <= tolerance;
  if (!resolvable) {
    report.note = fmt::format(
        "sample too small: 3 standard errors ({:.3g}) exceed the tolerance ({:.3g}); "
        "confidence interval too wide to confirm",
        3.0 * report.relative_standard_error, tolerance);
  } else if (!report.pass) {
    report.note = "empirical reference sd outside tolerance";
  }
  return report;
}

nlohmann::json to_json(const VerificationReport& report) {
  return {{"model", report.model},
          {"lambda", report.lambda},
          {"N", report.count},
          {"seed", report.seed},
          {"tolerance", report.tolerance},
          {"empirical_sref", report.empirical_sref},
          {"expected", report.expected},
          {"rel_dev", report.rel_dev},
          {"relative_standard_error", report.relative_standard_error},
          {"pass", report.pass},
          {"note", report.note}};
}

}  // namespace igmrf
