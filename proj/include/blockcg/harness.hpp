#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockcg/mat.hpp"
#include "blockcg/solver.hpp"
#include "blockcg/sparse.hpp"
#include "blockcg/trace.hpp"

namespace blockcg {

// omega_k = sqrt(trace((x - x_k)^T A (x - x_k)) / trace(x^T A x)), the block
// analogue of the relative A-norm of the error.
double compute_omega(const SparseSym& a, const Block& x_true, const Block& x_k);

struct ExperimentOptions {
  std::string matrix;  // .mtx path (optionally .gz) or "synth:..." spec
  int m = 1;
  std::vector<std::string> variants = {"dr"};
  std::string precond = "none";  // none | jacobi | ic
  double ic_shift = 0.0;
  double ic_droptol = 0.0;
  double tol = 1e-8;
  int maxit = 100;
  std::uint64_t seed = 1;
  bool random_b = false;  // paper protocol; default is constructed-solution
  double bf_tol = 1e-10;
  std::string dump_jacobi;  // directory for reconstructed T_k / LDL dumps
  std::string out_dir = "traces";
};

// process exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitBuild = 3;
inline constexpr int kExitSolver = 4;

// Runs one trace per requested variant and writes CSV files into out_dir.
// Identical options (and seed) produce byte-identical trace payload rows.
// On a step failure the partial trace is still written and the exit code is
// kExitSolver. `log` receives the human-readable summary.
int run_experiment(const ExperimentOptions& opts, std::ostream& log);

}  // namespace blockcg
