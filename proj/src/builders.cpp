#include "igmrf/builders.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "igmrf/error.hpp"

namespace igmrf {

namespace {

// 0-based (d, s) with cyclic wrap on a torus; bounded lattices must stay inside.
Index wrap_index(const LatticeSpec& lattice, int d, int s) {
  const int n1 = lattice.n1();
  const int n2 = lattice.n2();
  if (lattice.topology() == Topology::torus) {
    d = ((d % n1) + n1) % n1;
    s = ((s % n2) + n2) % n2;
  } else if (d < 0 || d >= n1 || s < 0 || s >= n2) {
    throw ConfigError(fmt::format("stencil reaches node ({}, {}) outside the bounded {}x{} lattice",
                                  d + 1, s + 1, n1, n2));
  }
  return Index{d} * n2 + s;
}

IncrementRow stencil_row(const LatticeSpec& lattice, int d, int s,
                         const std::vector<StencilOffset>& offsets) {
  IncrementRow row;
  row.reserve(offsets.size());
  for (const auto& o : offsets) {
    row.push_back({wrap_index(lattice, d + o.d_offset, s + o.s_offset), o.coefficient});
  }
  return row;
}

const std::vector<StencilOffset> kLaplacian = {
    {0, 0, -4.0}, {1, 0, 1.0}, {-1, 0, 1.0}, {0, 1, 1.0}, {0, -1, 1.0}};

const std::vector<StencilOffset> kWeightedNinePoint = {
    {0, 0, -20.0}, {1, 0, 4.0},  {-1, 0, 4.0}, {0, 1, 4.0},  {0, -1, 4.0},
    {1, 1, 1.0},   {1, -1, 1.0}, {-1, 1, 1.0}, {-1, -1, 1.0}};

LatticeSpec torus(int n1, int n2) { return LatticeSpec::grid(n1, n2, Topology::torus); }

bool is_corner(const LatticeSpec& lattice, int d, int s) {
  return (d == 0 || d == lattice.n1() - 1) && (s == 0 || s == lattice.n2() - 1);
}

IgmrfModel make_model(ModelClass model_class, const LatticeSpec& lattice,
                      const IncrementSet& increments, std::string label) {
  return IgmrfModel{model_class, lattice,
                    assemble_structure_matrix(increments, lattice.total_nodes()),
                    default_null_dim(model_class), std::move(label), increments};
}

}  // namespace

const char* to_string(ModelClass model_class) {
  switch (model_class) {
    case ModelClass::rw1: return "rw1";
    case ModelClass::rw2: return "rw2";
    case ModelClass::torus1: return "torus1";
    case ModelClass::torus2: return "torus2";
    case ModelClass::bound1: return "bound1";
    case ModelClass::bound2: return "bound2";
    case ModelClass::custom: return "custom";
  }
  return "unknown";
}

ModelClass parse_model_class(std::string_view name) {
  for (auto c : {ModelClass::rw1, ModelClass::rw2, ModelClass::torus1, ModelClass::torus2,
                 ModelClass::bound1, ModelClass::bound2, ModelClass::custom}) {
    if (name == to_string(c)) return c;
  }
  if (name == "rw2d" || name == "rw2D") return ModelClass::bound1;
  throw ConfigError(fmt::format("unknown model class '{}'", name));
}

int default_null_dim(ModelClass model_class) {
  switch (model_class) {
    case ModelClass::rw1: return 1;
    case ModelClass::rw2: return 2;
    case ModelClass::custom: return 0;
    default: return 3;
  }
}

bool is_two_dimensional(ModelClass model_class) {
  return model_class != ModelClass::rw1 && model_class != ModelClass::rw2;
}

const char* to_string(Torus2Variant variant) {
  switch (variant) {
    case Torus2Variant::weighted_nine_point: return "weighted-nine-point";
    case Torus2Variant::corner_rows_removed: return "corner-rows-removed";
    case Torus2Variant::corner_rows_one_sided: return "corner-rows-one-sided";
  }
  return "unknown";
}

Torus2Variant parse_torus2_variant(std::string_view name) {
  for (auto v : {Torus2Variant::weighted_nine_point, Torus2Variant::corner_rows_removed,
                 Torus2Variant::corner_rows_one_sided}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError(fmt::format("unknown torus2 variant '{}'", name));
}

IncrementSet rw1_increments(int n) {
  const auto lattice = LatticeSpec::chain(n);
  IncrementSet set;
  for (int s = 0; s + 1 < n; ++s) {
    set.add(stencil_row(lattice, s, 0, {{0, 0, -1.0}, {1, 0, 1.0}}));
  }
  return set;
}

IncrementSet rw2_increments(int n) {
  const auto lattice = LatticeSpec::chain(n);
  IncrementSet set;
  for (int s = 0; s + 2 < n; ++s) {
    set.add(stencil_row(lattice, s, 0, {{0, 0, 1.0}, {1, 0, -2.0}, {2, 0, 1.0}}));
  }
  return set;
}

IncrementSet torus1_increments(const LatticeSpec& lattice) {
  IncrementSet set;
  for (int d = 0; d < lattice.n1(); ++d) {
    for (int s = 0; s < lattice.n2(); ++s) set.add(stencil_row(lattice, d, s, kLaplacian));
  }
  return set;
}

IncrementSet torus2_increments(const LatticeSpec& lattice, Torus2Variant variant) {
  IncrementSet set;
  for (int d = 0; d < lattice.n1(); ++d) {
    for (int s = 0; s < lattice.n2(); ++s) {
      switch (variant) {
        case Torus2Variant::weighted_nine_point:
          set.add(stencil_row(lattice, d, s, kWeightedNinePoint));
          break;
        case Torus2Variant::corner_rows_removed:
          if (!is_corner(lattice, d, s)) set.add(stencil_row(lattice, d, s, kLaplacian));
          break;
        case Torus2Variant::corner_rows_one_sided:
          if (is_corner(lattice, d, s)) {
            const int dd = d == 0 ? 1 : -1;
            const int ds = s == 0 ? 1 : -1;
            set.add(stencil_row(lattice, d, s,
                                {{0, 0, 2.0}, {dd, 0, -2.0}, {2 * dd, 0, 1.0},
                                 {0, ds, -2.0}, {0, 2 * ds, 1.0}}));
          } else {
            set.add(stencil_row(lattice, d, s, kLaplacian));
          }
          break;
      }
    }
  }
  return set;
}

IncrementSet bound1_increments(const LatticeSpec& lattice) {
  // Laplacian increment at every node; at edges and corners the neighbours
  // outside the lattice are dropped and the centre weight is minus the number
  // of neighbours that remain.
  IncrementSet set;
  const int n1 = lattice.n1();
  const int n2 = lattice.n2();
  for (int d = 0; d < n1; ++d) {
    for (int s = 0; s < n2; ++s) {
      std::vector<StencilOffset> offsets;
      for (auto [a, b] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        if (d + a >= 0 && d + a < n1 && s + b >= 0 && s + b < n2) {
          offsets.push_back({a, b, 1.0});
        }
      }
      offsets.push_back({0, 0, -static_cast<double>(offsets.size())});
      set.add(stencil_row(lattice, d, s, offsets));
    }
  }
  return set;
}

IgmrfModel build_rw1(int n) {
  return make_model(ModelClass::rw1, LatticeSpec::chain(n), rw1_increments(n),
                    fmt::format("rw1 n={}", n));
}

IgmrfModel build_rw2(int n) {
  if (n < 5) throw ConfigError(fmt::format("rw2 needs at least 5 nodes, got {}", n));
  return make_model(ModelClass::rw2, LatticeSpec::chain(n), rw2_increments(n),
                    fmt::format("rw2 n={}", n));
}

IgmrfModel build_torus1(int n1, int n2) {
  const auto lattice = torus(n1, n2);
  return make_model(ModelClass::torus1, lattice, torus1_increments(lattice),
                    fmt::format("torus1 {}x{}", n1, n2));
}

IgmrfModel build_torus2(int n1, int n2, Torus2Variant variant) {
  const auto lattice = torus(n1, n2);
  return make_model(ModelClass::torus2, lattice, torus2_increments(lattice, variant),
                    fmt::format("torus2 {}x{} ({})", n1, n2, to_string(variant)));
}

IgmrfModel build_bound1(int n1, int n2) {
  const auto lattice = LatticeSpec::grid(n1, n2);
  return make_model(ModelClass::bound1, lattice, bound1_increments(lattice),
                    fmt::format("bound1 {}x{}", n1, n2));
}

IgmrfModel build_bound2(int n1, int n2, double cross_weight) {
  if (!(cross_weight >= 0.0) || !std::isfinite(cross_weight)) {
    throw ConfigError("bound2 cross-term weight must be finite and nonnegative");
  }
  const auto lattice = LatticeSpec::grid(n1, n2);
  // Three blocks: second differences along d, along s, and the mixed
  // difference scaled so its square carries the cross weight.
  IncrementSet set;
  for (int d = 1; d + 1 < n1; ++d) {
    for (int s = 0; s < n2; ++s) {
      set.add(stencil_row(lattice, d, s, {{-1, 0, 1.0}, {0, 0, -2.0}, {1, 0, 1.0}}));
    }
  }
  for (int d = 0; d < n1; ++d) {
    for (int s = 1; s + 1 < n2; ++s) {
      set.add(stencil_row(lattice, d, s, {{0, -1, 1.0}, {0, 0, -2.0}, {0, 1, 1.0}}));
    }
  }
  if (cross_weight > 0.0) {
    const double r = std::sqrt(cross_weight);
    for (int d = 0; d + 1 < n1; ++d) {
      for (int s = 0; s + 1 < n2; ++s) {
        set.add(stencil_row(lattice, d, s, {{0, 0, r}, {1, 0, -r}, {0, 1, -r}, {1, 1, r}}));
      }
    }
  }
  return make_model(ModelClass::bound2, lattice, set,
                    fmt::format("bound2 {}x{} w={}", n1, n2, cross_weight));
}

IgmrfModel build_model(ModelClass model_class, int n1, int n2, const BuildOptions& options) {
  IgmrfModel model = [&] {
    switch (model_class) {
      case ModelClass::rw1: return build_rw1(n1);
      case ModelClass::rw2: return build_rw2(n1);
      case ModelClass::torus1: return build_torus1(n1, n2);
      case ModelClass::torus2: return build_torus2(n1, n2, options.torus2_variant);
      case ModelClass::bound1: return build_bound1(n1, n2);
      case ModelClass::bound2: return build_bound2(n1, n2, options.bound2_cross_weight);
      case ModelClass::custom: break;
    }
    throw ConfigError("custom models are built with load_custom_stencil");
  }();
  if (options.null_dim) {
    if (*options.null_dim < 0 || *options.null_dim >= model.lattice.total_nodes()) {
      throw ConfigError(fmt::format("null_dim {} out of range", *options.null_dim));
    }
    model.null_dim = *options.null_dim;
  }
  return model;
}

// ---------------------------------------------------------------------------

const char* to_string(StencilRegion region) {
  switch (region) {
    case StencilRegion::interior: return "interior";
    case StencilRegion::edges: return "edges";
    case StencilRegion::corners: return "corners";
    case StencilRegion::all: return "all";
  }
  return "unknown";
}

namespace {

StencilRegion parse_region(const std::string& name) {
  for (auto r : {StencilRegion::interior, StencilRegion::edges, StencilRegion::corners,
                 StencilRegion::all}) {
    if (name == to_string(r)) return r;
  }
  throw ConfigError(fmt::format("unknown stencil region '{}'", name));
}

Topology parse_topology(const std::string& name) {
  if (name == "bounded") return Topology::bounded;
  if (name == "torus") return Topology::torus;
  throw ConfigError(fmt::format("unknown topology '{}'", name));
}

AnchorRange parse_range(const nlohmann::json& value) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
      !value[1].is_number_integer()) {
    throw ConfigError("anchor range must be [first, last] integers");
  }
  return {value[0].get<int>(), value[1].get<int>()};
}

// Resolves a 1-based, possibly negative bound to a 0-based position.
int resolve(int bound, int n) { return bound < 0 ? n + bound : bound - 1; }

// 1D chains have their two end nodes as "corners" and no edges.
StencilRegion region_of(const LatticeSpec& lattice, int d, int s) {
  const bool d_end = d == 0 || d == lattice.n1() - 1;
  if (lattice.kind() == LatticeKind::chain) {
    return d_end ? StencilRegion::corners : StencilRegion::interior;
  }
  const bool s_end = s == 0 || s == lattice.n2() - 1;
  if (d_end && s_end) return StencilRegion::corners;
  if (d_end || s_end) return StencilRegion::edges;
  return StencilRegion::interior;
}

}  // namespace

StencilConfig parse_stencil_config(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ConfigError("stencil config must be a JSON object");
    const int version = doc.value("schema_version", StencilConfig::kSchemaVersion);
    if (version != StencilConfig::kSchemaVersion) {
      throw ConfigError(fmt::format("unsupported stencil schema_version {}", version));
    }
    StencilConfig config;
    config.name = doc.at("name").get<std::string>();
    config.topology = parse_topology(doc.value("topology", std::string("bounded")));
    config.null_dim = doc.at("null_dim").get<int>();
    if (config.null_dim < 0) throw ConfigError("null_dim must be nonnegative");
    for (const auto& t : doc.at("templates")) {
      StencilTemplate tpl;
      tpl.region = parse_region(t.value("region", std::string("all")));
      if (t.contains("rows")) tpl.rows = parse_range(t["rows"]);
      if (t.contains("cols")) tpl.cols = parse_range(t["cols"]);
      if (t.contains("order")) tpl.order = t["order"].get<int>();
      for (const auto& o : t.at("offsets")) {
        if (!o.is_array() || o.size() != 3) {
          throw ConfigError("each offset must be [dr, dc, coef]");
        }
        tpl.offsets.push_back({o[0].get<int>(), o[1].get<int>(), o[2].get<double>()});
      }
      if (tpl.offsets.size() < 2) throw ConfigError("template needs at least two offsets");
      if (tpl.order == 2) {
        double sum = 0.0;
        for (const auto& o : tpl.offsets) sum += o.coefficient;
        if (std::abs(sum) > 1e-12) {
          throw ConfigError(fmt::format(
              "second-order template coefficients sum to {} instead of 0", sum));
        }
      }
      config.templates.push_back(std::move(tpl));
    }
    if (config.templates.empty()) throw ConfigError("stencil config has no templates");
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed stencil config: {}", e.what()));
  }
}

StencilConfig load_stencil_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open stencil config {}", path.string()));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("cannot parse {}: {}", path.string(), e.what()));
  }
  return parse_stencil_config(doc);
}

nlohmann::json to_json(const StencilConfig& config) {
  nlohmann::json templates = nlohmann::json::array();
  for (const auto& t : config.templates) {
    nlohmann::json offsets = nlohmann::json::array();
    for (const auto& o : t.offsets) offsets.push_back({o.d_offset, o.s_offset, o.coefficient});
    nlohmann::json j = {{"region", to_string(t.region)},
                        {"rows", {t.rows.first, t.rows.last}},
                        {"cols", {t.cols.first, t.cols.last}},
                        {"offsets", offsets}};
    if (t.order) j["order"] = *t.order;
    templates.push_back(std::move(j));
  }
  return {{"schema_version", StencilConfig::kSchemaVersion},
          {"name", config.name},
          {"topology", to_string(config.topology)},
          {"null_dim", config.null_dim},
          {"templates", templates}};
}

IncrementSet stencil_increments(const StencilConfig& config, const LatticeSpec& lattice) {
  if (config.topology != lattice.topology()) {
    throw ConfigError(fmt::format("stencil '{}' is {} but the lattice is {}", config.name,
                                  to_string(config.topology), to_string(lattice.topology())));
  }
  IncrementSet set;
  // Rows are emitted node-major, templates in file order at each node.
  for (int d = 0; d < lattice.n1(); ++d) {
    for (int s = 0; s < lattice.n2(); ++s) {
      const StencilRegion here = region_of(lattice, d, s);
      for (const auto& t : config.templates) {
        if (t.region != StencilRegion::all && t.region != here) continue;
        if (d < resolve(t.rows.first, lattice.n1()) || d > resolve(t.rows.last, lattice.n1()))
          continue;
        if (s < resolve(t.cols.first, lattice.n2()) || s > resolve(t.cols.last, lattice.n2()))
          continue;
        set.add(stencil_row(lattice, d, s, t.offsets));
      }
    }
  }
  if (set.empty()) {
    throw ConfigError(fmt::format("stencil '{}' produced no increments on this lattice",
                                  config.name));
  }
  return set;
}

IgmrfModel load_custom_stencil(const StencilConfig& config, const LatticeSpec& lattice) {
  if (config.null_dim >= lattice.total_nodes()) {
    throw ConfigError("null_dim must be smaller than the number of nodes");
  }
  auto increments = stencil_increments(config, lattice);
  auto structure = assemble_structure_matrix(increments, lattice.total_nodes());
  return IgmrfModel{ModelClass::custom, lattice, std::move(structure), config.null_dim,
                    config.name, std::move(increments)};
}

}  // namespace igmrf
