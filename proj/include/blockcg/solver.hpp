#pragma once

#include <functional>
#include <optional>
#include <string>

#include "blockcg/kernels.hpp"
#include "blockcg/mat.hpp"
#include "blockcg/precond.hpp"
#include "blockcg/sparse.hpp"
#include "blockcg/trace.hpp"

namespace blockcg {

enum class Variant { ol, hs, dr, dp, bf };

std::string variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& s);

enum class PhiPolicy { identity, qr_normalize };

struct SolverConfig {
  Variant variant = Variant::hs;
  double tol = 1e-8;  // per-column relative residual stopping tolerance
  int max_iters = 100;
  PhiPolicy phi_policy = PhiPolicy::identity;  // OL only
  double bf_trunc_tol = 1e-10;                 // BF only
  const Preconditioner* precond = nullptr;     // null = identity

  void validate() const;
};

// Per-step coefficient matrices, for consumers that reconstruct the block
// Lanczos quantities (Theorems 2-4). Only the fields the variant produces
// are set.
struct StepQuantities {
  int k = 0;
  std::optional<Mat> gamma;     // OL/HS, DP, BF
  std::optional<Mat> delta;     // OL/HS, DP, BF
  std::optional<Mat> phi;       // OL/HS: phi_{k-1}
  std::optional<Mat> phi_inv;   // OL/HS: phi_{k-1}^{-1}
  std::optional<Mat> gram_r;    // OL/HS: r_k^T r_k
  std::optional<Mat> gram_pap;  // OL/HS, DP, BF: p^T A p
  std::optional<Mat> gram_sas;  // DR: s^T A s (= xi^{-1})
  std::optional<Mat> xi;        // DR
  std::optional<Mat> zeta;      // DR
  std::optional<Mat> sigma;     // DR: sigma_k
  std::optional<Mat> psi_prev;  // DP: psi_{k-1}
  std::optional<Mat> psi;       // DP: psi_k
  std::optional<Mat> cross_pr;  // DP: p_k^T r_k
};

struct StepReport {
  std::vector<double> res_norm;  // per-column 2-norms (DR: reconstructed)
  double gram_cond_est = 0.0;    // rough kappa of the inverted Gram
  int warnings = 0;
};

// All recurrence carriers in one bag; each variant touches its own subset.
struct SolverState {
  Variant variant = Variant::hs;
  int n = 0, m = 0;
  int iter = 0;
  long matvecs = 0;

  Block x;
  Block r;        // OL/HS, DP, BF
  Block p;        // OL/HS, DP (orthonormal), BF (may be narrower than m)
  Block z;        // DP, BF: M^{-1} r
  Block w;        // DR (orthonormal)
  Block s;        // DR
  Mat phi, phi_inv;  // OL/HS
  Mat gram_r;        // OL/HS cached r^T r
  Mat sigma;         // DR
  Mat psi;           // DP
  std::vector<double> stop_denom;  // per-column stopping denominators

  StepQuantities last;
};

SolverState init_solver(const SolverConfig& cfg, const SparseSym& a, const Block& b, const Block& x0);

StepReport ol_bcg_step(SolverState& state, const SparseSym& a, PhiPolicy policy);
StepReport dr_bcg_step(SolverState& state, const SparseSym& a, const Preconditioner& prec);
StepReport dp_bcg_step(SolverState& state, const SparseSym& a, const Preconditioner& prec);
StepReport bf_bcg_step(SolverState& state, const SparseSym& a, const Preconditioner& prec, double trunc_tol);

// Left singular vectors of `v` whose singular values satisfy
// sigma_i / sigma_max > trunc_tol (one-sided Jacobi SVD). May return fewer
// columns than v; returns an empty block only when v is exactly zero.
Block left_singular_basis(const Block& v, double trunc_tol);

struct RunHooks {
  std::function<void(const SolverState&)> on_init;
  std::function<void(const SolverState&, const StepQuantities&, const StepReport&)> on_step;
  const Block* x_true = nullptr;  // enables omega and per-column A-norm errors
};

// Iterates until every column's relative residual falls to cfg.tol or
// max_iters is hit; step failures land in the trace (termination
// "step-failure") rather than propagating.
ConvergenceTrace run_solver(const SolverConfig& cfg, const SparseSym& a, const Block& b, const Block& x0,
                            const RunHooks& hooks = {});

}  // namespace blockcg
