#pragma once

// Test-side oracles, deliberately independent of the block solver paths:
// scalar CG and scalar Lanczos are literal textbook loops on raw vectors.

#include <cstdint>
#include <vector>

#include "blockcg/mat.hpp"
#include "blockcg/sparse.hpp"

namespace blockcg::test {

struct ScalarCgRun {
  std::vector<std::vector<double>> x_hist;  // x_0..x_k
  std::vector<double> gammas;
  std::vector<double> deltas;
};

ScalarCgRun scalar_cg(const SparseSym& a, const std::vector<double>& b, int iters);

struct ScalarLanczosRun {
  std::vector<double> alphas;  // alpha_1..alpha_k
  std::vector<double> betas;   // beta_2..beta_k
  double beta1 = 0.0;
};

// No reorthogonalization: tracks the same finite-precision trajectory the
// CG coefficients live on.
ScalarLanczosRun scalar_lanczos(const SparseSym& a, const std::vector<double>& v, int steps);

Mat dense_from_sparse(const SparseSym& a);

// sin of the largest principal angle between the column spans of two
// orthonormal blocks: |q1 - q2 (q2^T q1)|_2-ish (Frobenius bound).
double subspace_residual(const Mat& q1, const Mat& q2);

std::vector<double> mat_col(const Mat& m, int j);

double rel_err(double got, double want);

}  // namespace blockcg::test
