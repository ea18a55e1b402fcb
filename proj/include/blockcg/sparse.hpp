#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blockcg/mat.hpp"

namespace blockcg {

// Sparse symmetric positive-definite-patterned matrix in CSR form.
// Both triangles are stored after ingestion; rows are sorted by column.
class SparseSym {
 public:
  SparseSym() = default;

  struct Triplet {
    int row, col;
    double val;
  };

  // Assembles from triplets (duplicates summed). Validates structural
  // symmetry (values equal to 1e-14 relative) and a positive diagonal.
  static SparseSym from_triplets(int n, std::vector<Triplet> entries);

  // Dense to sparse; entries with |v| <= drop are discarded.
  static SparseSym from_dense(const Mat& dense, double drop = 0.0);

  static SparseSym identity(int n);

  int n() const { return n_; }
  long nnz() const { return static_cast<long>(colind_.size()); }

  const std::vector<long>& rowptr() const { return rowptr_; }
  const std::vector<int>& colind() const { return colind_; }
  const std::vector<double>& values() const { return values_; }

  std::vector<double> diagonal() const;

  // max absolute row sum; cheap norm estimate used for relative tolerances
  double inf_norm() const;

 private:
  int n_ = 0;
  std::vector<long> rowptr_;
  std::vector<int> colind_;
  std::vector<double> values_;
};

// a x for an n x m block. Pure; counting operator applications is the
// caller's business.
Mat spmm(const SparseSym& a, const Block& x);

// MatrixMarket coordinate ingestion ("symmetric" files, or "general" files
// whose assembled values are numerically symmetric). Transparently reads
// gzip-compressed files. Parse failures carry the 1-based line number.
SparseSym load_matrix_market(const std::string& path);

// Lower triangle, 1-based, %.17g values: load -> write -> load is exact.
void write_matrix_market(const std::string& path, const SparseSym& a);

// Dense n x m block in MatrixMarket array format (for RhsSpec file sources).
Mat load_matrix_market_array(const std::string& path);
void write_matrix_market_array(const std::string& path, const Mat& b);

}  // namespace blockcg
