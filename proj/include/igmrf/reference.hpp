#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "igmrf/builders.hpp"
#include "igmrf/spectral.hpp"

namespace igmrf {

// Published reference values compiled in from data/reference_tables.json.
const nlohmann::json& reference_data();

// Dimension above which the dense solve requires the long-running opt-in.
inline constexpr Index kStandardMaxDimension = 2500;

struct ComputeOptions {
  bool long_running = false;
  Torus2Variant torus2_variant = Torus2Variant::weighted_nine_point;
  double bound2_cross_weight = 2.0;

  EigenOptions eigen() const {
    return {long_running ? kDefaultMaxDimension : kStandardMaxDimension};
  }
};

// Memoizes σ_ref per (class, nodes, null_dim). Two-dimensional classes use
// square nodes x nodes grids.
class SigmaCache {
 public:
  explicit SigmaCache(ComputeOptions options = {}) : options_(options) {}

  double sigma_ref(ModelClass model_class, int nodes, std::optional<int> null_dim = std::nullopt);
  const ComputeOptions& options() const { return options_; }

 private:
  ComputeOptions options_;
  std::map<std::tuple<ModelClass, int, int>, double> cache_;
};

struct TableCell {
  std::string row;
  std::string column;
  double computed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;

  double abs_diff() const;
  bool pass() const { return abs_diff() <= tolerance; }
};

struct TableReproduction {
  int table = 0;
  std::string row_header;
  std::vector<std::string> columns;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::vector<TableCell> cells;
  std::vector<std::string> notes;

  bool pass() const;
};

// Recomputes Tables 1-4 from first principles and pairs every number with
// its reference value. Table 1's 100-node row is skipped (with a note)
// unless the cache allows long-running solves.
TableReproduction reproduce_table(int table, SigmaCache& cache);

void write_table_csv(std::ostream& out, const TableReproduction& repro, int significant_digits);
// table,row,column,computed,expected,abs_diff,tolerance,pass
void write_diff_csv(std::ostream& out, const TableReproduction& repro);

struct VariantResult {
  std::string construction;
  std::string variant;
  int nodes = 0;
  double sigma_ref = 0.0;
  std::optional<double> expected;
  int numeric_null_dim = 0;
  int null_dim_used = 0;
};

// σ_ref of every documented construction variant for the torus and Bound 2
// classes (plus Bound 1) at each node count, next to the Table 1 value.
std::vector<VariantResult> calibration_report(const std::vector<int>& nodes,
                                              const ComputeOptions& options);
nlohmann::json to_json(const std::vector<VariantResult>& results);

}  // namespace igmrf
