#pragma once

#include "blockcg/mat.hpp"

namespace blockcg {

// Relative pivot tolerances, at machine-epsilon scale so exact singularities
// are caught but well-conditioned blocks never trip.
inline constexpr double kEpsPd = 1e-14;
inline constexpr double kEpsTri = 1e-14;

struct QrFactors {
  Block q;  // n x m, orthonormal columns (even for rank-deficient input)
  Coeff r;  // m x m upper triangular, nonnegative diagonal
};

// Thin Householder QR of a tall block. The Q columns are images of identity
// columns under exact reflections, so they stay orthonormal no matter how
// rank deficient v is; R's diagonal is made nonnegative by sign flips.
QrFactors householder_qr(const Block& v);

// Upper Cholesky factor R with R^T R = a (a is symmetrized first).
// Throws singular_gram_error when a pivot falls below kEpsPd * |a|_F.
Coeff cholesky_upper(const Mat& a);

// x with a x = rhs for numerically SPD a, via cholesky_upper + two
// triangular solves.
Mat spd_solve(const Mat& a, const Mat& rhs);

enum class TriSide {
  left,        // r^{-1} b
  left_trans,  // r^{-T} b
  right,       // b r^{-1}
  right_trans  // b r^{-T}
};

// Triangular substitution against an upper-triangular r.
Mat tri_solve(const Mat& r, const Mat& rhs, TriSide side);
Mat tri_inverse(const Mat& r);

// Partial-pivoted LU solve for small general square systems (coefficient
// matrices like DP's gamma are not symmetric).
Mat lu_solve(const Mat& a, const Mat& rhs);

// x^T y. When x and y are the same object the result is symmetrized to
// suppress roundoff asymmetry in Gram matrices.
Mat block_inner(const Block& x, const Block& y);
// Symmetrized x^T x.
Mat gram(const Block& x);

Mat mat_mul(const Mat& a, const Mat& b);     // a b
Mat mat_mul_nt(const Mat& a, const Mat& b);  // a b^T
Mat mat_tmul(const Mat& a, const Mat& b);    // a^T b  (no symmetrization)

inline Mat block_scale(const Block& x, const Coeff& c) { return mat_mul(x, c); }

// x + y c, fused.
Mat block_axpy(const Block& x, const Block& y, const Coeff& c);

Mat mat_add(const Mat& a, const Mat& b);
Mat mat_sub(const Mat& a, const Mat& b);
Mat mat_scale(const Mat& a, double s);

}  // namespace blockcg
