#pragma once

#include "blockcg/mat.hpp"

namespace blockcg {

class SparseSym;

// Plain serial reference kernels. These are the brute-force counterparts of
// the OpenMP kernels: the tests use them as oracles and the benchmark tool
// compares against them. Keep them boring.
namespace ref {

Mat spmm(const SparseSym& a, const Block& x);
Mat block_inner(const Block& x, const Block& y);
Mat block_scale(const Block& x, const Coeff& c);
Mat block_axpy(const Block& x, const Block& y, const Coeff& c);

}  // namespace ref
}  // namespace blockcg
