#pragma once

#include <string>
#include <vector>

#include "blockcg/mat.hpp"
#include "blockcg/sparse.hpp"

namespace blockcg {

// Symmetric positive definite preconditioner M = L L^T with split (L, L^T)
// and unsplit (M^{-1}) application. Preconditioned DR-BCG needs the split,
// DP-BCG only M^{-1}.
class Preconditioner {
 public:
  enum class Kind { identity, jacobi, incomplete_cholesky };

  static Preconditioner identity(int n);
  static Preconditioner jacobi(const SparseSym& a);
  // Incomplete Cholesky of a + shift*diag(a). droptol = 0 keeps exactly A's
  // lower pattern (IC(0)); droptol > 0 additionally keeps fill entries with
  // |v| >= droptol * |row of a|_2. On a nonpositive pivot the shift escalates
  // (x10, at most 6 times) and the factorization restarts.
  static Preconditioner incomplete_cholesky(const SparseSym& a, double shift, double droptol);

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  bool has_split() const { return true; }
  bool has_inverse() const { return true; }
  double shift_used() const { return shift_used_; }
  long factor_nnz() const { return static_cast<long>(l_colind_.size()); }

  Mat apply_inv(const Block& r) const;    // M^{-1} r
  Mat solve_lower(const Block& x) const;  // L^{-1} x
  Mat solve_upper(const Block& x) const;  // L^{-T} x

  static std::string kind_name(Kind k);

 private:
  Kind kind_ = Kind::identity;
  int n_ = 0;
  double shift_used_ = 0.0;
  std::vector<double> diag_sqrt_;  // jacobi
  // incomplete Cholesky factor L (CSR, rows sorted, diagonal last) and its
  // transpose for the L^{-T} solves
  std::vector<long> l_rowptr_;
  std::vector<int> l_colind_;
  std::vector<double> l_values_;
  std::vector<long> lt_rowptr_;
  std::vector<int> lt_colind_;
  std::vector<double> lt_values_;

  bool try_factor(const SparseSym& a, double shift, double droptol);
  void build_transpose();
};

}  // namespace blockcg
