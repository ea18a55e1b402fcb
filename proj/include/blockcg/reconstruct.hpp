#pragma once

#include <span>
#include <string>
#include <vector>

#include "blockcg/lanczos.hpp"
#include "blockcg/mat.hpp"
#include "blockcg/solver.hpp"

namespace blockcg {

// Block LDL^T factors of T_k: unit-lower block bidiagonal L (off-diagonal
// blocks ell_1..ell_{k-1}) and block diagonal D (d_1..d_k).
struct LdlFactors {
  int m = 0;
  std::vector<Mat> ells;
  std::vector<Mat> ds;
};

Mat densify_unit_lower(const LdlFactors& f);
Mat densify_block_diag(const LdlFactors& f);

// Running reconstruction of the block Lanczos coefficients from inside a BCG
// run. Consumes only coefficients the solver already computes; performs no
// operator applications. A singular Gram disables reconstruction from that
// step on (the corresponding Lanczos block does not exist); the solver run
// is unaffected.
struct ReconState {
  Variant variant = Variant::hs;
  int m = 0;
  int steps = 0;
  bool active = true;
  int disabled_at = -1;
  std::string disabled_reason;

  // running quantities entering step j: sigma_{j-1}, theta_{j-1}, ell_{j-1},
  // and beta_j (held in beta_next until step j folds it into T)
  Mat sigma_prev, theta_prev, ell_prev;
  BlockTridiag t;
  LdlFactors ldl;
  Mat beta_next;

  bool keep_lanczos = false;
  std::vector<Block> lanczos_blocks;  // v_2, v_3, ... (v_1 = r_0 sigma_0^{-1})
};

ReconState recon_init_ol(const Mat& gram_r0);  // sigma_0 = chol(r_0^T r_0)
ReconState recon_init_dr(const Mat& sigma0);
ReconState recon_init_dp(const Mat& psi0);  // sigma_0 = psi_0

// One reconstruction step per BCG iteration. phi_inv is phi_{k-1}^{-1};
// gram_r is r_k^T r_k. No-ops once disabled.
void recon_ol_step(ReconState& rec, const Mat& gamma, const Mat& phi_inv, const Mat& gram_r);
// gram_sas = s_{k-1}^T A s_{k-1} (that is, xi_{k-1}^{-1}); never inverts
// sigma or zeta.
void recon_dr_step(ReconState& rec, const Mat& gram_sas, const Mat& zeta);
// cross = p_k^T r_k; sigma_k = chol(psi_k^T cross).
void recon_dp_step(ReconState& rec, const Mat& gamma, const Mat& psi_prev, const Mat& psi, const Mat& cross);

// v_{k+1} from the current residual block (HS/OL/DP paths, needs sigma_k
// invertible) or from w_k (DR path, no inversion).
Block lanczos_block(const ReconState& rec, const Block& residual_or_w, int k);

// Wires the right recon step into solver callbacks.
struct ReconRunner {
  ReconState state;
  RunHooks hooks(Variant v);
};

// Lemma 1 oracle: the km x km matrix T-hat, assembled directly from its
// block tridiagonal display and from the three-factor product. The two must
// agree to roundoff.
Mat assemble_that_direct(std::span<const Mat> gammas, std::span<const Mat> deltas, std::span<const Mat> phis);
Mat assemble_that_factored(std::span<const Mat> gammas, std::span<const Mat> deltas, std::span<const Mat> phis);

// Theorem 1 oracle: eta_1 = I, [eta_{j+1}, .] = qr(beta_tilde_{j+1} eta_j);
// returns max entrywise deviation of U^T T-tilde U from densify(t_lanczos).
double verify_unitary_similarity(const BlockTridiag& t_lanczos, const Mat& t_tilde,
                                 std::span<const Mat> beta_tildes);

// Galerkin solution from the reconstructed data: x = x0 + V_k Y with
// densify(T_k) Y = E_1 beta_1.
Block galerkin_solution(const BlockTridiag& t, std::span<const Block> basis, const Block& x0, const Mat& beta1);

}  // namespace blockcg
