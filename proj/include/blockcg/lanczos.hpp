#pragma once

#include <optional>
#include <vector>

#include "blockcg/kernels.hpp"
#include "blockcg/mat.hpp"
#include "blockcg/sparse.hpp"

namespace blockcg {

// Symmetric block tridiagonal matrix T_k: diagonal blocks alpha_1..alpha_k,
// subdiagonal blocks beta_2..beta_k (upper triangular, nonnegative diagonal),
// plus the initial normalization beta_1.
struct BlockTridiag {
  int m = 0;
  std::vector<Mat> alphas;
  std::vector<Mat> betas;  // beta_{j+1}, j = 1..k-1
  Mat beta1;

  int steps() const { return static_cast<int>(alphas.size()); }
};

// Dense km x km assembly of T_k.
Mat densify(const BlockTridiag& t);

enum class Orthog { mgs, classical, full_reorth };

struct LanczosOptions {
  int k_max = 10;
  Orthog orthog = Orthog::mgs;
  bool keep_basis = false;
};

struct LanczosResult {
  BlockTridiag t;
  // v_1..v_{k+1} when keep_basis (v_{k+1} omitted after a breakdown)
  std::vector<Block> basis;
  Mat beta_next;  // beta_{k+1} produced at the last completed step
  bool breakdown = false;
  int steps = 0;
};

// Block Lanczos with QR normalization (beta upper triangular, nonnegative
// diagonal). Stops early, with the breakdown flag set, when beta_{k+1} is
// numerically singular (min diag < 1e-12 * max diag): this module does not
// deflate or regularize. A rank-deficient starting block throws
// singular_gram_error.
LanczosResult block_lanczos(const SparseSym& a, const Block& v, const LanczosOptions& opts);

// |A V_k - V_k T_k - v_{k+1} beta_{k+1} e_k^T|_F / |A|_inf; needs the basis.
double verify_lanczos_relation(const SparseSym& a, const LanczosResult& res);

}  // namespace blockcg
