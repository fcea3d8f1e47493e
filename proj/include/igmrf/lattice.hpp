#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace igmrf {

using Index = std::int64_t;

enum class LatticeKind { chain, grid };
enum class Topology { bounded, torus };

const char* to_string(LatticeKind kind);
const char* to_string(Topology topology);

// Geometry of the index set. Nodes are addressed by 1-based (row, column)
// coordinates and flattened row-major.
class LatticeSpec {
 public:
  // n >= 3.
  static LatticeSpec chain(int n, Topology topology = Topology::bounded);
  // n1, n2 >= 5.
  static LatticeSpec grid(int n1, int n2, Topology topology = Topology::bounded);

  LatticeKind kind() const { return kind_; }
  Topology topology() const { return topology_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  Index total_nodes() const { return Index{n1_} * n2_; }

  // Row-major: (d - 1) * n2 + (s - 1). Throws std::out_of_range.
  Index node_index(int d, int s = 1) const;

  bool operator==(const LatticeSpec&) const = default;

 private:
  LatticeSpec(LatticeKind kind, int n1, int n2, Topology topology)
      : kind_(kind), n1_(n1), n2_(n2), topology_(topology) {}

  LatticeKind kind_;
  int n1_;
  int n2_;
  Topology topology_;
};

struct IncrementTerm {
  Index node;
  double coefficient;
};

// One increment evaluated at one location: a sparse linear functional of u.
using IncrementRow = std::vector<IncrementTerm>;

// Stacked increment rows, i.e. the rows of D in P = DᵀD. Rows with repeated
// node indices are merged; every row must keep at least two nonzeros.
class IncrementSet {
 public:
  IncrementSet() = default;

  void add(IncrementRow row);
  void append(const IncrementSet& other);

  std::span<const IncrementRow> rows() const { return rows_; }
  std::size_t row_count() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  // Evaluates every increment on x.
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  std::vector<IncrementRow> rows_;
};

struct MatrixEntry {
  Index row;
  Index col;
  double value;

  bool operator==(const MatrixEntry&) const = default;
};

// Symmetric matrix stored as its upper triangle (row <= col), sorted by
// (row, col) with exact zeros removed.
class SparseSymmetricMatrix {
 public:
  SparseSymmetricMatrix() = default;
  // Entries with row > col are mirrored into the upper triangle; duplicates
  // are summed.
  SparseSymmetricMatrix(Index dimension, std::vector<MatrixEntry> entries);

  Index dimension() const { return dimension_; }
  std::span<const MatrixEntry> entries() const { return entries_; }

  double max_abs() const;
  Eigen::VectorXd diagonal() const;
  Eigen::MatrixXd to_dense() const;
  Eigen::SparseMatrix<double> to_sparse() const;
  Eigen::VectorXd multiply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  SparseSymmetricMatrix scaled(double factor) const;

  // `i,j,value` with header; upper triangle only.
  void write_csv(std::ostream& out) const;

  bool operator==(const SparseSymmetricMatrix&) const = default;

 private:
  Index dimension_ = 0;
  std::vector<MatrixEntry> entries_;
};

// P = DᵀD. Throws ConfigError on an empty set or an index >= dimension.
SparseSymmetricMatrix assemble_structure_matrix(const IncrementSet& increments,
                                                Index dimension);

}  // namespace igmrf
