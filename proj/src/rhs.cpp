#include "blockcg/rhs.hpp"

#include "blockcg/rng.hpp"

namespace blockcg {

namespace {

Block random_block(int n, int m, std::uint64_t seed) {
  Block b(n, m);
  SplitMix64 rng(seed);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) b(i, j) = rng.uniform01();
  return b;
}

void duplicate_first(Block& b) {
  if (b.cols() < 2) throw invalid_input_error("duplicate_column requires m >= 2");
  for (int i = 0; i < b.rows(); ++i) b(i, 1) = b(i, 0);
}

}  // namespace

Rhs make_rhs(const RhsSpec& spec, const SparseSym& a) {
  if (spec.m < 1) throw invalid_input_error("make_rhs: m must be >= 1");
  const int n = a.n();
  switch (spec.source) {
    case RhsSpec::Source::random: {
      Block b = random_block(n, spec.m, spec.seed);
      if (spec.duplicate_column) duplicate_first(b);
      return {std::move(b), std::nullopt};
    }
    case RhsSpec::Source::constructed_solution: {
      Block xt = random_block(n, spec.m, spec.seed);
      if (spec.duplicate_column) duplicate_first(xt);
      Block b = spmm(a, xt);
      return {std::move(b), std::move(xt)};
    }
    case RhsSpec::Source::file: {
      Block b = load_matrix_market_array(spec.path);
      if (b.rows() != n) throw invalid_input_error("make_rhs: rhs file rows do not match matrix");
      if (spec.duplicate_column) duplicate_first(b);
      return {std::move(b), std::nullopt};
    }
  }
  throw invalid_input_error("make_rhs: unknown source");
}

}  // namespace blockcg
