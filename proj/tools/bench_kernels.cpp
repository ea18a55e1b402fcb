// Compares the OpenMP kernels against the serial reference implementations:
// sparse-times-block, block inner products, block axpy.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "blockcg/kernels.hpp"
#include "blockcg/rng.hpp"
#include "blockcg/serial_ref.hpp"
#include "blockcg/sparse.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using blockcg::Block;
using blockcg::Mat;
using blockcg::SparseSym;

double time_median(const std::function<void()>& fn, int reps) {
  std::vector<double> t(reps);
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    t[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  std::sort(t.begin(), t.end());
  return t[reps / 2];
}

SparseSym random_spd(int n, int extras_per_row, std::uint64_t seed) {
  blockcg::SplitMix64 rng(seed);
  std::vector<SparseSym::Triplet> tr;
  for (int i = 0; i < n; ++i)
    for (int e = 0; e < extras_per_row; ++e) {
      const int j = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
      if (j == i) continue;
      const double v = rng.uniform01() - 0.5;
      tr.push_back({i, j, v});
      tr.push_back({j, i, v});
    }
  // diagonally dominant, so also usable with the solvers
  std::vector<double> rowsum(n, 0.0);
  for (const auto& t : tr) rowsum[t.row] += std::fabs(t.val);
  for (int i = 0; i < n; ++i) tr.push_back({i, i, rowsum[i] + 1.0});
  return SparseSym::from_triplets(n, std::move(tr));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  int n = 400000, m = 8, extras = 6, reps = 5;
  app.add_option("--n", n, "matrix dimension");
  app.add_option("--m", m, "block width");
  app.add_option("--nnz-per-row", extras, "random off-diagonal entries per row");
  app.add_option("--reps", reps, "repetitions (median reported)");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("OpenMP: %d threads\n", omp_get_max_threads());
#else
  std::printf("OpenMP: disabled at build time\n");
#endif

  const SparseSym a = random_spd(n, extras, 42);
  blockcg::SplitMix64 rng(7);
  Block x(n, m), y(n, m);
  Mat c(m, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      x(i, j) = rng.uniform01();
      y(i, j) = rng.uniform01();
    }
    for (int i = 0; i < m; ++i) c(i, j) = rng.uniform01();
  }

  std::printf("n=%d m=%d nnz=%ld reps=%d\n\n", n, m, a.nnz(), reps);
  std::printf("%-14s %12s %12s %9s\n", "kernel", "serial [ms]", "openmp [ms]", "speedup");

  struct Row {
    const char* name;
    std::function<void()> serial, parallel;
  };
  Mat sink;
  const Row rows[] = {
      {"spmm", [&] { sink = blockcg::ref::spmm(a, x); }, [&] { sink = blockcg::spmm(a, x); }},
      {"block_inner", [&] { sink = blockcg::ref::block_inner(x, y); },
       [&] { sink = blockcg::block_inner(x, y); }},
      {"block_axpy", [&] { sink = blockcg::ref::block_axpy(x, y, c); },
       [&] { sink = blockcg::block_axpy(x, y, c); }},
  };
  for (const Row& r : rows) {
    const double ts = time_median(r.serial, reps);
    const double tp = time_median(r.parallel, reps);
    std::printf("%-14s %12.3f %12.3f %8.2fx\n", r.name, 1e3 * ts, 1e3 * tp, ts / tp);
  }
  return 0;
}
