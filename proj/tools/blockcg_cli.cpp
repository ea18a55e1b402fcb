// Experiment driver: load (or synthesize) an SPD matrix, build a
// preconditioner, generate right-hand sides, run the requested BCG variants,
// and emit one CSV convergence trace per variant.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "blockcg/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"block conjugate gradient benchmark harness"};
  blockcg::ExperimentOptions opts;
  std::string variants_csv = "dr";

  app.add_option("--matrix", opts.matrix,
                 ".mtx / .mtx.gz file, or synth:<logspace|clustered|tridiag>:n=..:cond=..:seed=..")
      ->required()
      ->envname("BLOCKCG_MATRIX");
  app.add_option("--m", opts.m, "block width (number of right-hand sides)")->envname("BLOCKCG_M");
  app.add_option("--variants", variants_csv, "comma-separated subset of hs,ol,dr,dp,bf")
      ->envname("BLOCKCG_VARIANTS");
  app.add_option("--precond", opts.precond, "none | jacobi | ic")->envname("BLOCKCG_PRECOND");
  app.add_option("--ic-shift", opts.ic_shift, "IC diagonal shift (relative to diag)")
      ->envname("BLOCKCG_IC_SHIFT");
  app.add_option("--ic-droptol", opts.ic_droptol, "IC drop tolerance (0 = IC(0))")
      ->envname("BLOCKCG_IC_DROPTOL");
  app.add_option("--tol", opts.tol, "per-column relative residual stopping tolerance")
      ->envname("BLOCKCG_TOL");
  app.add_option("--maxit", opts.maxit, "iteration cap")->envname("BLOCKCG_MAXIT");
  app.add_option("--seed", opts.seed, "right-hand side seed")->envname("BLOCKCG_SEED");
  app.add_flag("--random-b", opts.random_b,
               "random right-hand side (paper protocol) instead of constructed solution")
      ->envname("BLOCKCG_RANDOM_B");
  app.add_option("--bf-tol", opts.bf_tol, "BF-BCG SVD truncation tolerance")->envname("BLOCKCG_BF_TOL");
  app.add_option("--dump-jacobi", opts.dump_jacobi,
                 "directory for reconstructed block Jacobi matrices (T, L, D)")
      ->envname("BLOCKCG_DUMP_JACOBI");
  app.add_option("--out", opts.out_dir, "trace output directory")->envname("BLOCKCG_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_name() == "CallForHelp" ? blockcg::kExitOk : blockcg::kExitParse;
  }

  opts.variants.clear();
  std::stringstream ss(variants_csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) opts.variants.push_back(item);

  try {
    return blockcg::run_experiment(opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return blockcg::kExitSolver;
  }
}
