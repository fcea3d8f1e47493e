#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "igmrf/lattice.hpp"

namespace igmrf {

enum class ModelClass { rw1, rw2, torus1, torus2, bound1, bound2, custom };

const char* to_string(ModelClass model_class);
// Accepts the to_string() names plus "rw2d" as an alias for bound1.
ModelClass parse_model_class(std::string_view name);
// 1 for RW1, 2 for RW2, 3 for every two-dimensional second-order class.
int default_null_dim(ModelClass model_class);
bool is_two_dimensional(ModelClass model_class);

// An IGMRF structure matrix together with the number of eigenvalues that are
// treated as infinite (reciprocal zeroed) when forming the generalized inverse.
struct IgmrfModel {
  ModelClass model_class;
  LatticeSpec lattice;
  SparseSymmetricMatrix structure;
  int null_dim;
  std::string label;
  // The rows of D with P = DᵀD, when known. Lets the spectral module work
  // from D and avoid squaring the condition number.
  IncrementSet increments;
};

// How Torus 2 departs from the plain torus.
enum class Torus2Variant {
  // Laplacian increment with the 9-point weights (-20; 4 on edge neighbours,
  // 1 on diagonal neighbours) at every node, all indices cyclic.
  weighted_nine_point,
  // Torus 1 with the increment rows anchored at the four corner nodes dropped.
  corner_rows_removed,
  // Torus 1 with the corner rows replaced by non-wrapping one-sided second
  // differences along both axes.
  corner_rows_one_sided,
};

const char* to_string(Torus2Variant variant);
Torus2Variant parse_torus2_variant(std::string_view name);

// Increment sets, exposed so tests and the stencil loader can compare
// against the exact rows each builder stacks.
IncrementSet rw1_increments(int n);
IncrementSet rw2_increments(int n);
IncrementSet torus1_increments(const LatticeSpec& lattice);
IncrementSet torus2_increments(const LatticeSpec& lattice, Torus2Variant variant);
IncrementSet bound1_increments(const LatticeSpec& lattice);

IgmrfModel build_rw1(int n);
IgmrfModel build_rw2(int n);
IgmrfModel build_torus1(int n1, int n2);
IgmrfModel build_torus2(int n1, int n2,
                        Torus2Variant variant = Torus2Variant::weighted_nine_point);
IgmrfModel build_bound1(int n1, int n2);
// Thin-plate energy u_xx² + w·u_xy² + u_yy² with free boundaries; w = 2 is the
// isotropic plate.
IgmrfModel build_bound2(int n1, int n2, double cross_weight = 2.0);

struct BuildOptions {
  Torus2Variant torus2_variant = Torus2Variant::weighted_nine_point;
  double bound2_cross_weight = 2.0;
  std::optional<int> null_dim;  // overrides the class default
};

// Dispatches on the class; n2 is ignored for chains. Not valid for custom.
IgmrfModel build_model(ModelClass model_class, int n1, int n2 = 1,
                       const BuildOptions& options = {});

// ---------------------------------------------------------------------------
// User-defined stencils.

enum class StencilRegion { interior, edges, corners, all };

const char* to_string(StencilRegion region);

struct StencilOffset {
  int d_offset;
  int s_offset;
  double coefficient;
};

// Inclusive 1-based anchor range along one axis; negative values count from
// the far end (-1 is the last node).
struct AnchorRange {
  int first = 1;
  int last = -1;
};

struct StencilTemplate {
  StencilRegion region = StencilRegion::all;
  std::vector<StencilOffset> offsets;
  AnchorRange rows;
  AnchorRange cols;
  // When set to 2 the coefficients must sum to zero.
  std::optional<int> order;
};

struct StencilConfig {
  static constexpr int kSchemaVersion = 1;

  std::string name;
  Topology topology = Topology::bounded;
  int null_dim = 0;
  std::vector<StencilTemplate> templates;
};

// JSON schema (version 1):
//   {"schema_version": 1, "name": str, "topology": "bounded"|"torus",
//    "null_dim": int,
//    "templates": [{"region": "interior"|"edges"|"corners"|"all",
//                   "order": int?,
//                   "rows": [first, last]?, "cols": [first, last]?,
//                   "offsets": [[dr, dc, coef], ...]}]}
StencilConfig parse_stencil_config(const nlohmann::json& doc);
StencilConfig load_stencil_config(const std::filesystem::path& path);
nlohmann::json to_json(const StencilConfig& config);

// Throws ConfigError on validation failure, including an offset that leaves
// a bounded lattice.
IncrementSet stencil_increments(const StencilConfig& config, const LatticeSpec& lattice);
IgmrfModel load_custom_stencil(const StencilConfig& config, const LatticeSpec& lattice);

}  // namespace igmrf
