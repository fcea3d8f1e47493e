#include "igmrf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "igmrf/error.hpp"

namespace igmrf {

const char* to_string(LatticeKind kind) {
  return kind == LatticeKind::chain ? "chain" : "grid";
}

const char* to_string(Topology topology) {
  return topology == Topology::bounded ? "bounded" : "torus";
}

LatticeSpec LatticeSpec::chain(int n, Topology topology) {
  if (n < 3) {
    throw ConfigError(fmt::format("chain needs at least 3 nodes, got {}", n));
  }
  return LatticeSpec(LatticeKind::chain, n, 1, topology);
}

LatticeSpec LatticeSpec::grid(int n1, int n2, Topology topology) {
  if (n1 < 5 || n2 < 5) {
    throw ConfigError(
        fmt::format("grid needs at least 5 nodes per axis, got {}x{}", n1, n2));
  }
  return LatticeSpec(LatticeKind::grid, n1, n2, topology);
}

Index LatticeSpec::node_index(int d, int s) const {
  if (d < 1 || d > n1_ || s < 1 || s > n2_) {
    throw std::out_of_range(fmt::format(
        "node ({}, {}) outside {}x{} lattice", d, s, n1_, n2_));
  }
  return Index{d - 1} * n2_ + (s - 1);
}

void IncrementSet::add(IncrementRow row) {
  std::sort(row.begin(), row.end(),
            [](const IncrementTerm& a, const IncrementTerm& b) { return a.node < b.node; });
  IncrementRow merged;
  merged.reserve(row.size());
  for (const auto& term : row) {
    if (term.node < 0) {
      throw ConfigError(fmt::format("negative node index {} in increment", term.node));
    }
    if (!merged.empty() && merged.back().node == term.node) {
      merged.back().coefficient += term.coefficient;
    } else {
      merged.push_back(term);
    }
  }
  std::erase_if(merged, [](const IncrementTerm& t) { return t.coefficient == 0.0; });
  if (merged.size() < 2) {
    throw ConfigError("increment row needs at least two nonzero coefficients");
  }
  rows_.push_back(std::move(merged));
}

void IncrementSet::append(const IncrementSet& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

Eigen::VectorXd IncrementSet::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows_.size()));
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    double acc = 0.0;
    for (const auto& term : rows_[r]) {
      if (term.node >= x.size()) {
        throw ConfigError("increment references a node beyond the vector length");
      }
      acc += term.coefficient * x(term.node);
    }
    out(static_cast<Eigen::Index>(r)) = acc;
  }
  return out;
}

SparseSymmetricMatrix::SparseSymmetricMatrix(Index dimension,
                                             std::vector<MatrixEntry> entries)
    : dimension_(dimension) {
  if (dimension < 0) {
    throw ConfigError("negative matrix dimension");
  }
  std::map<std::pair<Index, Index>, double> acc;
  for (const auto& e : entries) {
    if (e.row < 0 || e.col < 0 || e.row >= dimension || e.col >= dimension) {
      throw ConfigError(fmt::format("entry ({}, {}) outside dimension {}", e.row,
                                    e.col, dimension));
    }
    acc[{std::min(e.row, e.col), std::max(e.row, e.col)}] += e.value;
  }
  entries_.reserve(acc.size());
  for (const auto& [key, value] : acc) {
    if (value != 0.0) entries_.push_back({key.first, key.second, value});
  }
}

double SparseSymmetricMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, std::abs(e.value));
  return m;
}

Eigen::VectorXd SparseSymmetricMatrix::diagonal() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(dimension_);
  for (const auto& e : entries_) {
    if (e.row == e.col) d(e.row) = e.value;
  }
  return d;
}

Eigen::MatrixXd SparseSymmetricMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dimension_, dimension_);
  for (const auto& e : entries_) {
    m(e.row, e.col) = e.value;
    m(e.col, e.row) = e.value;
  }
  return m;
}

Eigen::SparseMatrix<double> SparseSymmetricMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * entries_.size());
  for (const auto& e : entries_) {
    triplets.emplace_back(e.row, e.col, e.value);
    if (e.row != e.col) triplets.emplace_back(e.col, e.row, e.value);
  }
  Eigen::SparseMatrix<double> m(dimension_, dimension_);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Eigen::VectorXd SparseSymmetricMatrix::multiply(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension_) {
    throw ConfigError("vector length does not match matrix dimension");
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dimension_);
  for (const auto& e : entries_) {
    y(e.row) += e.value * x(e.col);
    if (e.row != e.col) y(e.col) += e.value * x(e.row);
  }
  return y;
}

double SparseSymmetricMatrix::quadratic_form(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return x.dot(multiply(x));
}

SparseSymmetricMatrix SparseSymmetricMatrix::scaled(double factor) const {
  SparseSymmetricMatrix out = *this;
  for (auto& e : out.entries_) e.value *= factor;
  if (factor == 0.0) out.entries_.clear();
  return out;
}

void SparseSymmetricMatrix::write_csv(std::ostream& out) const {
  out << "i,j,value\n";
  for (const auto& e : entries_) {
    out << fmt::format("{},{},{}\n", e.row, e.col, e.value);
  }
}

SparseSymmetricMatrix assemble_structure_matrix(const IncrementSet& increments,
                                                Index dimension) {
  if (increments.empty()) {
    throw ConfigError("cannot assemble a structure matrix from an empty increment set");
  }
  // Each row r contributes r rᵀ; accumulate the upper triangle only.
  std::map<std::pair<Index, Index>, double> acc;
  for (const auto& row : increments.rows()) {
    for (const auto& a : row) {
      if (a.node >= dimension) {
        throw ConfigError(fmt::format("increment node {} outside dimension {}",
                                      a.node, dimension));
      }
      for (const auto& b : row) {
        if (b.node < a.node) continue;
        acc[{a.node, b.node}] += a.coefficient * b.coefficient;
      }
    }
  }
  std::vector<MatrixEntry> entries;
  entries.reserve(acc.size());
  for (const auto& [key, value] : acc) entries.push_back({key.first, key.second, value});
  return SparseSymmetricMatrix(dimension, std::move(entries));
}

}  // namespace igmrf
