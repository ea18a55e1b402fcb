#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "blockcg/mat.hpp"
#include "blockcg/sparse.hpp"

namespace blockcg {

// How to produce the block right-hand side.
struct RhsSpec {
  enum class Source { random, file, constructed_solution };

  Source source = Source::constructed_solution;
  std::uint64_t seed = 0;
  int m = 1;
  std::string path;  // file source only
  // Test hook: copy column 0 over column 1 so the block is exactly rank
  // deficient (drives the singular-Gram paths).
  bool duplicate_column = false;
};

struct Rhs {
  Block b;
  std::optional<Block> x_true;
};

// Entries are i.i.d. uniform(0,1) from SplitMix64(seed), filled column by
// column, so the same seed reproduces the same block bit for bit anywhere.
Rhs make_rhs(const RhsSpec& spec, const SparseSym& a);

}  // namespace blockcg
