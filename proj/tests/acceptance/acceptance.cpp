// Acceptance suite: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// any criterion fails.
//
//   acceptance [--long-running] [--cli <path to igmrf>] [--only <n>]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "igmrf/builders.hpp"
#include "igmrf/reference.hpp"
#include "igmrf/sampling.hpp"
#include "igmrf/scaling.hpp"
#include "igmrf/spectral.hpp"

namespace fs = std::filesystem;
using namespace igmrf;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

struct Options {
  bool long_running = false;
  std::string cli;
  int only = 0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects individual checks inside one criterion.
struct Checks {
  int failed = 0;
  std::vector<std::string> messages;

  void expect(bool ok, std::string what) {
    if (!ok) {
      ++failed;
      messages.push_back(std::move(what));
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    expect(std::abs(got - want) <= tol,
           fmt::format("{}: {:.6g} vs {} (tol {})", what, got, want, tol));
  }
  Outcome outcome(std::string summary) const {
    if (failed == 0) return {Status::pass, std::move(summary)};
    std::string d = fmt::format("{} failed check(s): ", failed);
    for (std::size_t i = 0; i < messages.size() && i < 4; ++i) d += (i ? "; " : "") + messages[i];
    return {Status::fail, d};
  }
};

double sigma_2d(ModelClass c, int n, const ComputeOptions& o) {
  return summarize_model(build_model(c, n, n), o.eigen()).sigma_ref;
}

// ---------------------------------------------------------------------------

Outcome bound1_reference(const Options& opt) {
  const auto& table = reference_data().at("tables").at("1");
  const auto columns = table.at("columns").get<std::vector<std::string>>();
  const auto col = std::distance(columns.begin(),
                                 std::find(columns.begin(), columns.end(), "bound1"));
  Checks c;
  const auto t0 = Clock::now();
  std::string values;
  for (const auto& row : table.at("rows")) {
    const int n = row.at("nodes");
    if (row.value("long_running", false)) continue;
    const double got = sigma_2d(ModelClass::bound1, n, {});
    values += fmt::format(" {}x{}={:.4f}", n, n, got);
    c.near(got, row.at("values")[col], table.at("tolerance").at("bound1"), fmt::format("{}x{}", n, n));
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed <= 60.0, fmt::format("runtime {:.1f}s exceeds 60s", elapsed));
  std::string summary = fmt::format("{} in {:.1f}s", values, elapsed);

  if (opt.long_running) {
    const auto t1 = Clock::now();
    ComputeOptions lr;
    lr.long_running = true;
    const double got = sigma_2d(ModelClass::bound1, 100, lr);
    const double dt = seconds_since(t1);
    for (const auto& row : table.at("rows")) {
      if (row.at("nodes") != 100) continue;
      c.near(got, row.at("values")[col], table.at("long_running_tolerance").at("bound1"),
             "100x100");
    }
    c.expect(dt <= 3600.0, fmt::format("100x100 runtime {:.0f}s exceeds 1h", dt));
    summary += fmt::format("; 100x100={:.4f} in {:.0f}s", got, dt);
  } else {
    summary += "; 100x100 not run (needs --long-running)";
  }
  return c.outcome(summary);
}

Outcome one_dimensional(const Options&) {
  Checks c;
  std::string values;
  auto check = [&](ModelClass mc, int n, double want, double tol) {
    const double got = summarize_model(build_model(mc, n)).sigma_ref;
    values += fmt::format(" {}({})={:.4f}", to_string(mc), n, got);
    c.near(got, want, tol, fmt::format("{} n={}", to_string(mc), n));
  };
  const auto& t2 = reference_data().at("tables").at("2");
  const auto columns = t2.at("columns").get<std::vector<std::string>>();
  for (const auto& row : t2.at("rows")) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k] == "rw2d") continue;
      check(parse_model_class(columns[k]), row.at("nodes"), row.at("values")[k],
            t2.at("tolerance").at(columns[k]));
    }
  }
  for (const auto& p : reference_data().at("points")) {
    if (p.at("model") == "bound1") continue;
    check(parse_model_class(p.at("model").get<std::string>()), p.at("nodes"), p.at("sigma_ref"),
          p.at("tolerance"));
  }
  return c.outcome(values);
}

Outcome worked_example(const Options&) {
  const auto& p = reference_data().at("pipeline");
  std::vector<ModelSigma> models;
  for (const auto& m : p.at("models")) models.push_back({m.at("label"), m.at("sigma_ref")});
  const auto r = scaling_pipeline({p.at("mu"), p.at("b"), p.at("alpha")}, models);
  const double tol = p.at("tolerance");
  const auto& e = p.at("expected");
  Checks c;
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    c.near(r.models[i].upper, e.at("U")[i], tol, "U_" + r.models[i].label);
    c.near(r.models[i].b_new, e.at("b_new")[i], tol, "b_" + r.models[i].label);
  }
  c.near(r.aggregated_upper, e.at("aggregated_U"), tol, "aggregated U");
  return c.outcome(fmt::format("U=({:.3f}, {:.3f}) aggregated={:.3f} b_new=({:.3f}, {:.3f})",
                               r.models[0].upper, r.models[1].upper, r.aggregated_upper,
                               r.models[0].b_new, r.models[1].b_new));
}

Outcome table_outcome(int table, std::size_t expected_cells) {
  SigmaCache cache;
  const auto repro = reproduce_table(table, cache);
  Checks c;
  c.expect(repro.cells.size() == expected_cells,
           fmt::format("{} cells, expected {}", repro.cells.size(), expected_cells));
  double worst = 0.0;
  for (const auto& cell : repro.cells) {
    worst = std::max(worst, cell.abs_diff());
    c.expect(cell.pass(), fmt::format("{}/{}: {:.4f} vs {} (tol {})", cell.row, cell.column,
                                      cell.computed, cell.expected, cell.tolerance));
  }
  return c.outcome(fmt::format("{} values, max |diff| {:.4f}", repro.cells.size(), worst));
}

Outcome table3(const Options&) { return table_outcome(3, 36); }
Outcome table4(const Options&) { return table_outcome(4, 8); }

Outcome undefined_constructions(const Options&) {
  const auto results = calibration_report({11, 20, 40}, {});
  std::map<std::pair<std::string, int>, std::pair<double, std::string>> best;
  bool complete = true;
  for (const auto& r : results) {
    if (r.construction == "bound1") continue;
    if (!std::isfinite(r.sigma_ref) || !r.expected) complete = false;
    if (!r.expected) continue;
    const double diff = std::abs(r.sigma_ref - *r.expected);
    auto key = std::make_pair(r.construction, r.nodes);
    auto it = best.find(key);
    if (it == best.end() || diff < it->second.first) best[key] = {diff, r.variant};
  }
  int matched = 0;
  std::string misses;
  for (const auto& [key, v] : best) {
    if (v.first <= 0.02) {
      ++matched;
    } else {
      misses += fmt::format(" {}@{}", key.first, key.second);
    }
  }
  const std::size_t cells = best.size();
  if (matched == static_cast<int>(cells) && cells == 9) {
    return {Status::pass, fmt::format("best variant within 0.02 for all {} cells "
                                      "(torus1 five-point k=3, torus2 weighted nine-point, "
                                      "bound2 thin plate w=2); {} variants reported",
                                      cells, results.size())};
  }
  if (complete && cells == 9) {
    return {Status::pass, fmt::format("{} of {} cells matched; deviation report complete "
                                      "({} variants), unmatched:{}",
                                      matched, cells, results.size(), misses)};
  }
  return {Status::fail, "deviation report incomplete"};
}

Outcome oracle_equivalence(const Options&) {
  std::vector<IgmrfModel> models;
  for (int n : {3, 11, 20, 100, 400}) models.push_back(build_rw1(n));
  for (int n : {5, 11, 20, 40, 100, 400}) models.push_back(build_rw2(n));
  for (int n : {5, 11, 20}) {
    for (auto mc : {ModelClass::torus1, ModelClass::torus2, ModelClass::bound1,
                    ModelClass::bound2}) {
      models.push_back(build_model(mc, n, n));
    }
  }
  models.push_back(build_torus2(12, 15));
  models.push_back(build_bound2(9, 14));

  Checks c;
  double worst_diag = 0.0, worst_identity = 0.0;
  int shared = 0;
  for (const auto& m : models) {
    const auto dec = eigendecompose(m);
    const Eigen::VectorXd diag = pseudo_inverse_diagonal(dec, m.null_dim);
    // A cut through a degenerate cluster makes Σ* basis-dependent; the oracle
    // then reassembles from the shared eigenbasis.
    const bool split = cut_splits_cluster(dec, m.null_dim);
    if (split) ++shared;
    const Eigen::MatrixXd sigma = split ? dense_pinv_oracle(dec, m.null_dim)
                                        : dense_pinv_oracle(m.structure, m.null_dim);
    const double d = (diag - sigma.diagonal()).cwiseAbs().maxCoeff() / diag.cwiseAbs().maxCoeff();
    worst_diag = std::max(worst_diag, d);
    c.expect(d <= 1e-10, fmt::format("{} diagonal rel diff {:.2e}", m.label, d));

    // The identity holds for the inverse on the numeric range of P.
    const int rank_null = numeric_rank(dec);
    const Eigen::MatrixXd p = m.structure.to_dense();
    const Eigen::MatrixXd g = rank_null == m.null_dim && !split
                                  ? sigma
                                  : dense_pinv_oracle(m.structure, rank_null);
    const double id = (p * g * p - p).cwiseAbs().maxCoeff() / p.cwiseAbs().maxCoeff();
    worst_identity = std::max(worst_identity, id);
    c.expect(id <= 1e-6, fmt::format("{} P*S*P rel diff {:.2e}", m.label, id));
  }
  return c.outcome(fmt::format("{} models (<= 400 nodes, {} via shared basis), max diag rel diff "
                               "{:.1e}, max P*S*P-P {:.1e}",
                               models.size(), shared, worst_diag, worst_identity));
}

Outcome monte_carlo(const Options&) {
  const auto m = build_bound1(11, 11);
  const auto at1 = verify_sref_montecarlo(m, 1.0, 20000, 0.02, 20240601);
  const auto at4 = verify_sref_montecarlo(m, 4.0, 20000, 0.02, 20240602);
  Checks c;
  c.expect(at1.pass, fmt::format("lambda=1 rel dev {:.4f} {}", at1.rel_dev, at1.note));
  c.expect(at4.pass, fmt::format("lambda=4 rel dev {:.4f} {}", at4.rel_dev, at4.note));
  const double ratio = at1.empirical_sref / at4.empirical_sref;
  c.expect(std::abs(ratio / 2.0 - 1.0) <= 0.02, fmt::format("sd ratio {:.4f} vs 2", ratio));
  return c.outcome(fmt::format("lambda=1: {:.4f} vs {:.4f} ({:.2f}%); lambda=4: {:.4f} vs {:.4f} "
                               "({:.2f}%); ratio {:.4f}",
                               at1.empirical_sref, at1.expected, 100 * at1.rel_dev,
                               at4.empirical_sref, at4.expected, 100 * at4.rel_dev, ratio));
}

Outcome algebraic_properties(const Options&) {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> sig(0.05, 60.0), bd(0.05, 8.0), ad(0.0005, 0.2),
      md(6.0, 20.0);
  Checks c;
  double w_fixed = 0.0, w_const = 0.0, w_chain = 0.0, w_round = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const HyperpriorSpec spec{md(rng), bd(rng), ad(rng)};
    std::vector<ModelSigma> models;
    const int count = 1 + 2 * (trial % 3);  // odd, so a median model exists
    for (int i = 0; i < count; ++i) models.push_back({fmt::format("m{}", i), sig(rng)});
    const auto r = scaling_pipeline(spec, models);

    const double invariant = r.aggregated_upper * r.aggregated_upper * r.quantile;
    for (const auto& m : r.models) {
      const double rel = std::abs(m.b_new * m.sigma_ref * m.sigma_ref / invariant - 1.0);
      w_const = std::max(w_const, rel);
      if (m.upper == r.aggregated_upper) w_fixed = std::max(w_fixed, std::abs(m.b_new - spec.b));
    }
    if (models.size() >= 3) {
      const double direct = transfer_sd_parameter(spec.b, models[0].sigma_ref, models[2].sigma_ref);
      const double chained = transfer_sd_parameter(
          transfer_sd_parameter(spec.b, models[0].sigma_ref, models[1].sigma_ref),
          models[1].sigma_ref, models[2].sigma_ref);
      w_chain = std::max(w_chain, std::abs(chained - direct) / direct);
    }
    const double u = upper_limit(spec.b, models[0].sigma_ref, spec.alpha, spec.mu);
    const double back = scaled_sd_parameter(u, spec.alpha, spec.mu, models[0].sigma_ref);
    w_round = std::max(w_round, std::abs(back - spec.b) / spec.b);
  }
  c.expect(w_fixed <= 1e-10, fmt::format("median fixed point {:.1e}", w_fixed));
  c.expect(w_const <= 1e-10, fmt::format("b_new*sigma^2 constancy {:.1e}", w_const));
  c.expect(w_chain <= 1e-12, fmt::format("transfer chain {:.1e}", w_chain));
  c.expect(w_round <= 1e-12, fmt::format("round trip {:.1e}", w_round));
  return c.outcome(fmt::format("500 random instances: fixed point {:.1e}, constancy {:.1e}, "
                               "chain {:.1e}, round trip {:.1e}",
                               w_fixed, w_const, w_chain, w_round));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const Options& opt) {
  if (opt.cli.empty()) return {Status::skip, "no --cli path given"};
  const fs::path root = fs::temp_directory_path() / fmt::format("igmrf_accept_{}", ::getpid());
  fs::create_directories(root);
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"sref", "sref --model bound1 --n1 11 --null-dim auto"},
      {"sweep", "sweep --model rw1,rw2,bound1 --nodes 11,20"},
      {"scale", "scale --model rw2,rw2d --nodes 40"},
      {"tables", "tables --table 4"},
      {"verify", "verify --model bound1 --n1 11 --count 2000 --tol 0.1 --seed 7"},
      {"demo", "demo --n1 11 --noise-sd 1 --lambda 1 --seed 3"},
  };
  Checks c;
  int files = 0;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& [name, args] : runs) {
      const fs::path dir = root / fmt::format("run{}", pass);
      fs::create_directories(dir);
      const std::string cmd = fmt::format("\"{}\" {} --no-timestamp --out \"{}\" 2>/dev/null",
                                          opt.cli, args, (dir / (name + ".csv")).string());
      const int rc = std::system(cmd.c_str());
      c.expect(rc == 0, fmt::format("'{}' exited with {}", args, rc));
    }
  }
  for (const auto& entry : fs::directory_iterator(root / "run0")) {
    const auto other = root / "run1" / entry.path().filename();
    ++files;
    c.expect(fs::exists(other) && slurp(entry.path()) == slurp(other),
             fmt::format("{} differs between runs", entry.path().filename().string()));
  }
  c.expect(files >= static_cast<int>(runs.size()), "missing output files");
  fs::remove_all(root);
  return c.outcome(fmt::format("{} commands run twice, {} output files byte-identical",
                               runs.size(), files));
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--long-running") {
      opt.long_running = true;
    } else if (a == "--cli" && i + 1 < argc) {
      opt.cli = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      opt.only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--long-running] [--cli <igmrf>] [--only <n>]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome(const Options&)>>> criteria = {
      {"Bound 1 reference sd (11, 20, 40 grids)", bound1_reference},
      {"one-dimensional reference sds", one_dimensional},
      {"worked scaling example end to end", worked_example},
      {"Table 3 grid of scaled parameters", table3},
      {"Table 4 scaled parameters from computed sigma_ref", table4},
      {"torus and Bound 2 columns (match or deviation report)", undefined_constructions},
      {"oracle equivalence of generalized-inverse diagonals", oracle_equivalence},
      {"Monte Carlo check of sigma_ref and the 1/sqrt(lambda) law", monte_carlo},
      {"algebraic properties of the scaling formulas", algebraic_properties},
      {"byte-identical CLI outputs across runs", determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (opt.only && opt.only != id) continue;
    Outcome o;
    try {
      o = criteria[i].second(opt);
    } catch (const std::exception& e) {
      o = {Status::fail, fmt::format("exception: {}", e.what())};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::skip ? "SKIP" : "FAIL";
    if (o.status == Status::fail) ++failures;
    std::cout << fmt::format("{} [{:>2}] {}: {}", tag, id, criteria[i].first, o.detail)
              << std::endl;
  }
  std::cout << (failures ? fmt::format("{} criterion/criteria failed", failures)
                         : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
