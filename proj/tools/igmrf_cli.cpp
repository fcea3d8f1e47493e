// igmrf: batch front-end for building IGMRF structure matrices, computing
// reference standard deviations, rescaling hyperpriors and reproducing the
// reference tables.
//
// Exit codes: 0 success, 1 numerical or verification failure, 2 usage or
// configuration error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "igmrf/builders.hpp"
#include "igmrf/error.hpp"
#include "igmrf/reference.hpp"
#include "igmrf/sampling.hpp"
#include "igmrf/scaling.hpp"
#include "igmrf/smoothing.hpp"
#include "igmrf/spectral.hpp"
#include "igmrf/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kConfigSchemaVersion = 1;

struct Settings {
  std::string model = "bound1";
  int n1 = 11;
  int n2 = 0;  // 0: square grid for 2D classes
  std::string null_dim = "default";
  double lambda = 1.0;
  double b = 2.0;
  double mu = 7.0;
  double alpha = 0.001;
  std::string nodes;
  std::string sigma;
  std::string out;
  std::uint64_t seed = 1;
  std::int64_t count = 20000;
  double tol = 0.02;
  int table = 2;
  double noise_sd = 1.0;
  std::string torus2_variant = "weighted-nine-point";
  double cross_weight = 2.0;
  std::string stencil;
  bool long_running = false;
  bool soft_fail = false;
  bool no_timestamp = false;
  bool full_precision = false;
  std::string config;
};

// One flag of one subcommand: how to read it from a JSON config and how to
// echo its effective value.
struct Binding {
  std::string key;
  CLI::Option* option = nullptr;
  std::function<void(const json&)> assign;
  std::function<json()> value;
  bool echo = true;
};

std::string join_list(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number()) return fmt::format("{}", j.get<double>());
  if (!j.is_array()) throw igmrf::ConfigError("expected a string, number or list");
  std::string out;
  for (const auto& e : j) out += (out.empty() ? "" : ",") + join_list(e);
  return out;
}

class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& help, Settings& s)
      : app_(parent.add_subcommand(name, help)), settings_(s) {}

  CLI::App* app() const { return app_; }

  template <class T>
  Command& opt(const std::string& flag, T& target, const std::string& help, bool echo = true) {
    Binding b;
    b.key = key_of(flag);
    if constexpr (std::is_same_v<T, bool>) {
      b.option = app_->add_flag(flag, target, help);
    } else {
      b.option = app_->add_option(flag, target, help)->capture_default_str();
    }
    b.assign = [&target](const json& j) {
      if constexpr (std::is_same_v<T, std::string>) {
        target = join_list(j);
      } else {
        target = j.get<T>();
      }
    };
    b.value = [&target] { return json(target); };
    b.echo = echo;
    bindings_.push_back(std::move(b));
    return *this;
  }

  // Fills every flag not given on the command line from the JSON config.
  void apply_config() {
    if (settings_.config.empty()) return;
    std::ifstream in(settings_.config);
    if (!in) throw igmrf::ConfigError(fmt::format("cannot open config '{}'", settings_.config));
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw igmrf::ConfigError(fmt::format("config '{}': {}", settings_.config, e.what()));
    }
    if (!doc.is_object()) throw igmrf::ConfigError("config must be a JSON object");
    const int version = doc.value("schema_version", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion) {
      throw igmrf::ConfigError(fmt::format("unsupported config schema_version {}", version));
    }
    for (const auto& [key, value] : doc.items()) {
      if (key == "schema_version") continue;
      if (key == "command") {
        if (value.get<std::string>() != app_->get_name()) {
          throw igmrf::ConfigError(fmt::format("config is for command '{}', not '{}'",
                                               value.get<std::string>(), app_->get_name()));
        }
        continue;
      }
      auto it = std::find_if(bindings_.begin(), bindings_.end(),
                             [&](const Binding& b) { return b.key == key; });
      if (it == bindings_.end() || it->key == "config") {
        throw igmrf::ConfigError(
            fmt::format("config key '{}' is not accepted by '{}'", key, app_->get_name()));
      }
      if (it->option->count() > 0) continue;
      try {
        it->assign(value);
      } catch (const json::exception& e) {
        throw igmrf::ConfigError(fmt::format("config key '{}': {}", key, e.what()));
      }
    }
  }

  json effective_config() const {
    json j = json::object();
    j["schema_version"] = kConfigSchemaVersion;
    j["command"] = app_->get_name();
    for (const auto& b : bindings_)
      if (b.echo) j[b.key] = b.value();
    return j;
  }

 private:
  static std::string key_of(const std::string& flag) {
    std::string k = flag.substr(flag.find_first_not_of('-'));
    std::replace(k.begin(), k.end(), '-', '_');
    return k;
  }

  CLI::App* app_;
  Settings& settings_;
  std::vector<Binding> bindings_;
};

// ---------------------------------------------------------------------------
// Output plumbing.

struct Context {
  const Settings& s;
  json config;
  std::string command;

  int digits() const { return s.full_precision ? 17 : 6; }
  std::string num(double v) const { return fmt::format("{:.{}g}", v, digits()); }

  json envelope() const {
    json j;
    j["tool"] = "igmrf";
    j["version"] = igmrf::kVersion;
    j["command"] = command;
    j["config"] = config;
    if (!s.no_timestamp) j["timestamp"] = timestamp();
    return j;
  }

  std::string csv_preamble() const {
    std::string p = fmt::format("# igmrf {} {}\n# config: {}\n", igmrf::kVersion, command,
                                config.dump());
    if (!s.no_timestamp) p += fmt::format("# timestamp: {}\n", timestamp());
    return p;
  }

  static std::string timestamp() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                       fmt::gmtime(std::chrono::system_clock::to_time_t(
                           std::chrono::system_clock::now())));
  }
};

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path() && !fs::exists(path.parent_path())) {
    throw igmrf::ConfigError(fmt::format("output directory '{}' does not exist",
                                         path.parent_path().string()));
  }
  const fs::path tmp = path.string() + fmt::format(".tmp{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw igmrf::ConfigError(fmt::format("cannot write '{}'", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
  }
  fs::rename(tmp, path);
}

fs::path sidecar(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  return p.string() + suffix;
}

// CSV at --out with a JSON sidecar, or the fallback document on stdout.
void emit(const Context& ctx, const std::string& csv, const json& sidecar_doc,
          bool stdout_json) {
  if (ctx.s.out.empty()) {
    if (stdout_json) {
      std::cout << sidecar_doc.dump(2) << '\n';
    } else {
      std::cout << ctx.csv_preamble() << csv;
    }
    return;
  }
  const fs::path out = ctx.s.out;
  if (out.extension() == ".json") {
    throw igmrf::ConfigError("--out names the CSV artifact; the JSON sidecar is derived from it");
  }
  write_atomic(out, ctx.csv_preamble() + csv);
  write_atomic(sidecar(out, ".json"), sidecar_doc.dump(2) + "\n");
}

void emit_json(const Context& ctx, const json& doc) {
  if (ctx.s.out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_atomic(ctx.s.out, doc.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// Parsing helpers.

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

int parse_int(const std::string& text, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw igmrf::ConfigError(fmt::format("{}: '{}' is not an integer", what, text));
  }
  return v;
}

std::vector<int> parse_nodes(const std::string& text) {
  std::vector<int> nodes;
  for (const auto& part : split(text)) nodes.push_back(parse_int(part, "--nodes"));
  if (nodes.empty()) throw igmrf::ConfigError("--nodes must list at least one node count");
  return nodes;
}

struct NullDimChoice {
  std::optional<int> value;
  bool automatic = false;
};

NullDimChoice parse_null_dim(const std::string& text) {
  if (text == "default") return {};
  if (text == "auto") return {std::nullopt, true};
  const int v = parse_int(text, "--null-dim");
  if (v < 0) throw igmrf::ConfigError("--null-dim must be nonnegative");
  return {v, false};
}

igmrf::ComputeOptions compute_options(const Settings& s) {
  igmrf::ComputeOptions o;
  o.long_running = s.long_running;
  o.torus2_variant = igmrf::parse_torus2_variant(s.torus2_variant);
  o.bound2_cross_weight = s.cross_weight;
  return o;
}

igmrf::IgmrfModel make_model(const Settings& s, const std::string& class_name) {
  const auto nd = parse_null_dim(s.null_dim);
  if (!s.stencil.empty()) {
    const auto cfg = igmrf::load_stencil_config(s.stencil);
    const auto lattice = s.n2 > 0 ? igmrf::LatticeSpec::grid(s.n1, s.n2, cfg.topology)
                                  : igmrf::LatticeSpec::chain(s.n1, cfg.topology);
    auto model = igmrf::load_custom_stencil(cfg, lattice);
    if (nd.value) model.null_dim = *nd.value;
    return model;
  }
  const auto mc = igmrf::parse_model_class(class_name);
  igmrf::BuildOptions opts;
  opts.torus2_variant = igmrf::parse_torus2_variant(s.torus2_variant);
  opts.bound2_cross_weight = s.cross_weight;
  opts.null_dim = nd.value;
  const int n2 = igmrf::is_two_dimensional(mc) ? (s.n2 > 0 ? s.n2 : s.n1) : 1;
  return igmrf::build_model(mc, s.n1, n2, opts);
}

json diagnostics_json(const igmrf::MarginalSummary& m) {
  return {{"smallest_retained_eigenvalue", m.diagnostics.smallest_retained_eigenvalue},
          {"largest_dropped_eigenvalue", m.diagnostics.largest_dropped_eigenvalue},
          {"largest_eigenvalue", m.diagnostics.largest_eigenvalue}};
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_sref(const Context& ctx) {
  const auto& s = ctx.s;
  const auto model = make_model(s, s.model);
  const auto nd = parse_null_dim(s.null_dim);
  const auto summary = igmrf::summarize_model(model, compute_options(s).eigen(), std::nullopt,
                                              nd.automatic);
  std::string csv = "node_index,sigma_unit_lambda\n";
  for (igmrf::Index i = 0; i < summary.sigma_at_unit_lambda.size(); ++i) {
    csv += fmt::format("{},{}\n", i, ctx.num(summary.sigma_at_unit_lambda(i)));
  }
  json doc = ctx.envelope();
  doc["result"] = {{"model", model.label},
                   {"nodes", model.structure.dimension()},
                   {"sigma_ref", summary.sigma_ref},
                   {"sigma_at_lambda", igmrf::marginal_at_lambda(summary.sigma_ref, s.lambda)},
                   {"null_dim_used", summary.null_dim_used},
                   {"numeric_null_dim", summary.numeric_null_dim},
                   {"diagnostics", diagnostics_json(summary)}};
  if (summary.warning) {
    doc["result"]["warning"] = *summary.warning;
    std::cerr << "warning: " << *summary.warning << '\n';
  }
  emit(ctx, csv, doc, true);
  return 0;
}

int cmd_sweep(const Context& ctx) {
  const auto& s = ctx.s;
  const auto nodes = parse_nodes(s.nodes);
  const auto models = split(s.model);
  if (models.empty()) throw igmrf::ConfigError("--model must list at least one class");
  const auto nd = parse_null_dim(s.null_dim);
  if (nd.automatic) throw igmrf::ConfigError("sweep does not support --null-dim auto");
  std::vector<igmrf::ModelClass> classes;
  for (const auto& m : models) classes.push_back(igmrf::parse_model_class(m));

  igmrf::SigmaCache cache(compute_options(s));
  std::string csv = "model,nodes,sigma_ref\n";
  json rows = json::array();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (int n : nodes) {
      const double v = cache.sigma_ref(classes[i], n, nd.value);
      csv += fmt::format("{},{},{}\n", models[i], n, ctx.num(v));
      rows.push_back({{"model", models[i]}, {"nodes", n}, {"sigma_ref", v}});
    }
  }
  json doc = ctx.envelope();
  doc["result"] = rows;
  emit(ctx, csv, doc, false);
  return 0;
}

int cmd_scale(const Context& ctx) {
  const auto& s = ctx.s;
  const igmrf::HyperpriorSpec spec{s.mu, s.b, s.alpha};
  spec.validate();

  std::vector<igmrf::ModelSigma> models;
  if (!s.sigma.empty()) {
    for (const auto& item : split(s.sigma)) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw igmrf::ConfigError(fmt::format("--sigma entry '{}' must be label=value", item));
      }
      double v = 0.0;
      try {
        v = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw igmrf::ConfigError(fmt::format("--sigma entry '{}' has no numeric value", item));
      }
      models.push_back({item.substr(0, eq), v});
    }
  } else {
    const auto nodes = parse_nodes(s.nodes);
    const auto names = split(s.model);
    if (names.empty()) throw igmrf::ConfigError("--model must list at least one class");
    if (nodes.size() != 1 && nodes.size() != names.size()) {
      throw igmrf::ConfigError("--nodes must give one count or one per model");
    }
    std::vector<igmrf::ModelClass> classes;
    for (const auto& m : names) classes.push_back(igmrf::parse_model_class(m));
    igmrf::SigmaCache cache(compute_options(s));
    for (std::size_t i = 0; i < names.size(); ++i) {
      const int n = nodes.size() == 1 ? nodes[0] : nodes[i];
      models.push_back({names[i], cache.sigma_ref(classes[i], n)});
    }
  }

  const auto report = igmrf::scaling_pipeline(spec, models);
  std::string csv = "label,sigma_ref,U,b_new\n";
  for (const auto& m : report.models) {
    csv += fmt::format("{},{},{},{}\n", m.label, ctx.num(m.sigma_ref), ctx.num(m.upper),
                       ctx.num(m.b_new));
  }
  json doc = ctx.envelope();
  doc["result"] = igmrf::to_json(report);
  emit(ctx, csv, doc, true);
  return 0;
}

int cmd_tables(const Context& ctx) {
  const auto& s = ctx.s;
  if (s.table < 1 || s.table > 4) throw igmrf::ConfigError("--table must be 1, 2, 3 or 4");
  igmrf::SigmaCache cache(compute_options(s));
  const auto repro = igmrf::reproduce_table(s.table, cache);

  std::ostringstream table_csv, diff_csv;
  igmrf::write_table_csv(table_csv, repro, ctx.digits());
  igmrf::write_diff_csv(diff_csv, repro);

  json failures = json::array();
  for (const auto& c : repro.cells) {
    if (!c.pass()) {
      failures.push_back({{"row", c.row},
                          {"column", c.column},
                          {"computed", c.computed},
                          {"expected", c.expected},
                          {"tolerance", c.tolerance}});
    }
  }
  json doc = ctx.envelope();
  doc["result"] = {{"table", repro.table},
                   {"cells", repro.cells.size()},
                   {"pass", repro.pass()},
                   {"failures", failures},
                   {"notes", repro.notes}};

  for (const auto& note : repro.notes) std::cerr << "note: " << note << '\n';
  if (s.out.empty()) {
    std::cout << ctx.csv_preamble() << table_csv.str();
    std::cerr << diff_csv.str();
  } else {
    emit(ctx, table_csv.str(), doc, false);
    write_atomic(sidecar(s.out, ".diff.csv"), ctx.csv_preamble() + diff_csv.str());
  }
  if (!repro.pass()) {
    std::cerr << fmt::format("table {}: {} of {} values outside tolerance{}\n", repro.table,
                             failures.size(), repro.cells.size(),
                             s.soft_fail ? " (soft-fail)" : "");
    return s.soft_fail ? 0 : 1;
  }
  return 0;
}

int cmd_verify(const Context& ctx) {
  const auto& s = ctx.s;
  const auto model = make_model(s, s.model);
  const auto report = igmrf::verify_sref_montecarlo(model, s.lambda, s.count, s.tol, s.seed,
                                                    compute_options(s).eigen());
  json doc = ctx.envelope();
  doc["result"] = igmrf::to_json(report);
  emit_json(ctx, doc);
  if (!report.pass) {
    std::cerr << "verification failed"
              << (report.note.empty() ? "" : ": " + report.note) << '\n';
    return 1;
  }
  return 0;
}

int cmd_demo(const Context& ctx) {
  const auto& s = ctx.s;
  const igmrf::HyperpriorSpec spec{s.mu, s.b, s.alpha};
  spec.validate();
  const auto model = make_model(s, s.model);
  const auto summary = igmrf::summarize_model(model, compute_options(s).eigen());
  const double upper = igmrf::upper_limit(spec.b, summary.sigma_ref, spec.alpha, spec.mu);
  const auto demo = igmrf::run_smoothing_demo(model, s.noise_sd, s.lambda, s.seed);

  const auto& lat = model.lattice;
  std::string csv = "d,s,truth,noisy,posterior_mean\n";
  for (int d = 1; d <= lat.n1(); ++d) {
    for (int c = 1; c <= lat.n2(); ++c) {
      const auto i = lat.node_index(d, c);
      csv += fmt::format("{},{},{},{},{}\n", d, c, ctx.num(demo.truth(i)), ctx.num(demo.noisy(i)),
                         ctx.num(demo.posterior.mean(i)));
    }
  }
  json doc = ctx.envelope();
  doc["result"] = {{"model", model.label},
                   {"sigma_ref", summary.sigma_ref},
                   {"U", upper},
                   {"lambda", s.lambda},
                   {"relative_residual", demo.posterior.relative_residual},
                   {"rmse_noisy", std::sqrt((demo.noisy - demo.truth).squaredNorm() /
                                            double(demo.truth.size()))},
                   {"rmse_posterior", std::sqrt((demo.posterior.mean - demo.truth).squaredNorm() /
                                                double(demo.truth.size()))}};
  emit(ctx, csv, doc, false);
  return 0;
}

int cmd_calibrate(const Context& ctx) {
  const auto& s = ctx.s;
  const auto results = igmrf::calibration_report(parse_nodes(s.nodes), compute_options(s));
  std::string csv = "construction,variant,nodes,sigma_ref,expected,abs_diff,numeric_null_dim,"
                    "null_dim_used\n";
  for (const auto& r : results) {
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", r.construction, r.variant, r.nodes,
                       ctx.num(r.sigma_ref), r.expected ? fmt::format("{}", *r.expected) : "",
                       r.expected ? ctx.num(std::abs(r.sigma_ref - *r.expected)) : "",
                       r.numeric_null_dim, r.null_dim_used);
  }
  json doc = ctx.envelope();
  doc["result"] = igmrf::to_json(results);
  emit(ctx, csv, doc, true);
  return 0;
}

int cmd_matrix(const Context& ctx) {
  const auto model = make_model(ctx.s, ctx.s.model);
  std::ostringstream csv;
  model.structure.write_csv(csv);
  json doc = ctx.envelope();
  doc["result"] = {{"model", model.label},
                   {"dimension", model.structure.dimension()},
                   {"entries", model.structure.entries().size()},
                   {"null_dim", model.null_dim}};
  emit(ctx, csv.str(), doc, false);
  return 0;
}

// ---------------------------------------------------------------------------

struct Registered {
  std::unique_ptr<Command> command;
  std::function<int(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"Intrinsic GMRF reference standard deviations and hyperprior scaling", "igmrf"};
  app.set_version_flag("--version", std::string(igmrf::kVersion));
  app.require_subcommand(1);

  std::vector<Registered> commands;
  auto add = [&](const std::string& name, const std::string& help,
                 std::function<int(const Context&)> run) -> Command& {
    commands.push_back({std::make_unique<Command>(app, name, help, s), std::move(run)});
    auto& c = *commands.back().command;
    c.opt("--config", s.config, "JSON file supplying any flag not given on the command line",
          false);
    c.opt("--out", s.out, "Output path (CSV; JSON sidecar written next to it)", false);
    c.opt("--no-timestamp", s.no_timestamp, "Omit the timestamp from outputs", false);
    return c;
  };
  auto model_flags = [&](Command& c) {
    c.opt("--model", s.model, "Model class: rw1, rw2, torus1, torus2, bound1 (rw2d), bound2")
        .opt("--n1", s.n1, "Nodes along the first axis")
        .opt("--n2", s.n2, "Nodes along the second axis (default: n1 for 2D classes)")
        .opt("--null-dim", s.null_dim, "Dropped eigenvalues: integer, 'auto' or 'default'")
        .opt("--torus2-variant", s.torus2_variant, "Torus 2 construction variant")
        .opt("--cross-weight", s.cross_weight, "Bound 2 mixed-derivative weight")
        .opt("--stencil", s.stencil, "Custom stencil JSON (overrides --model)");
  };
  auto precision = [&](Command& c) {
    c.opt("--full-precision", s.full_precision, "17 significant digits instead of 6");
  };
  auto long_running = [&](Command& c) {
    c.opt("--long-running", s.long_running, "Allow dense solves above 2500 nodes");
  };
  auto hyperprior = [&](Command& c) {
    c.opt("--b", s.b, "Hyperprior sd parameter b")
        .opt("--mu", s.mu, "Location mu")
        .opt("--alpha", s.alpha, "Tail probability alpha");
  };

  {
    auto& c = add("sref", "Per-node marginal sd and sigma_ref of one model", cmd_sref);
    model_flags(c);
    c.opt("--lambda", s.lambda, "Precision at which sigma_ref/sqrt(lambda) is also reported");
    precision(c);
    long_running(c);
  }
  {
    auto& c = add("sweep", "sigma_ref over node counts (long-format CSV)", cmd_sweep);
    s.nodes = "11,20,40";
    c.opt("--model", s.model, "Comma list of model classes")
        .opt("--nodes", s.nodes, "Comma list of node counts (2D: side length)")
        .opt("--null-dim", s.null_dim, "Dropped eigenvalues: integer or 'default'")
        .opt("--torus2-variant", s.torus2_variant, "Torus 2 construction variant")
        .opt("--cross-weight", s.cross_weight, "Bound 2 mixed-derivative weight");
    precision(c);
    long_running(c);
  }
  {
    auto& c = add("scale", "Rescale the hyperprior sd parameter across models", cmd_scale);
    hyperprior(c);
    c.opt("--model", s.model, "Comma list of model classes")
        .opt("--nodes", s.nodes, "Node count, or one per model")
        .opt("--sigma", s.sigma, "Supplied sigma_ref values as label=value,... (skips solves)")
        .opt("--torus2-variant", s.torus2_variant, "Torus 2 construction variant")
        .opt("--cross-weight", s.cross_weight, "Bound 2 mixed-derivative weight");
    precision(c);
    long_running(c);
  }
  {
    auto& c = add("tables", "Reproduce a reference table with a diff report", cmd_tables);
    c.opt("--table", s.table, "Table number (1-4)")
        .opt("--soft-fail", s.soft_fail, "Exit 0 even when values fall outside tolerance")
        .opt("--torus2-variant", s.torus2_variant, "Torus 2 construction variant")
        .opt("--cross-weight", s.cross_weight, "Bound 2 mixed-derivative weight");
    precision(c);
    long_running(c);
  }
  {
    auto& c = add("verify", "Monte Carlo check of sigma_ref", cmd_verify);
    model_flags(c);
    c.opt("--lambda", s.lambda, "Precision")
        .opt("--count", s.count, "Number of draws")
        .opt("--seed", s.seed, "Random seed")
        .opt("--tol", s.tol, "Relative tolerance");
    long_running(c);
  }
  {
    auto& c = add("demo", "Posterior-mean smoothing of a synthetic surface", cmd_demo);
    model_flags(c);
    hyperprior(c);
    c.opt("--lambda", s.lambda, "Prior precision used for the posterior mean")
        .opt("--noise-sd", s.noise_sd, "Observation noise sd")
        .opt("--seed", s.seed, "Random seed");
    precision(c);
  }
  {
    auto& c = add("calibrate", "sigma_ref of every documented construction variant",
                  cmd_calibrate);
    c.opt("--nodes", s.nodes, "Comma list of grid side lengths");
    precision(c);
    long_running(c);
  }
  {
    auto& c = add("matrix", "Structure matrix as coordinate-list CSV", cmd_matrix);
    model_flags(c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (auto& r : commands) {
      if (!r.command->app()->parsed()) continue;
      r.command->apply_config();
      const Context ctx{s, r.command->effective_config(), r.command->app()->get_name()};
      return r.run(ctx);
    }
    return 2;
  } catch (const igmrf::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const igmrf::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
