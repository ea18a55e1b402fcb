#include "blockcg/reconstruct.hpp"

#include <cmath>

namespace blockcg {

Mat densify_unit_lower(const LdlFactors& f) {
  const int k = static_cast<int>(f.ds.size()), m = f.m;
  Mat l = Mat::identity(k * m);
  for (int j = 0; j + 1 < k; ++j)
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) l((j + 1) * m + r, j * m + c) = f.ells[j](r, c);
  return l;
}

Mat densify_block_diag(const LdlFactors& f) {
  const int k = static_cast<int>(f.ds.size()), m = f.m;
  Mat d(k * m, k * m);
  for (int j = 0; j < k; ++j)
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) d(j * m + r, j * m + c) = f.ds[j](r, c);
  return d;
}

namespace {

ReconState init_common(Mat sigma0, Variant v) {
  ReconState rec;
  rec.variant = v;
  rec.m = sigma0.rows();
  rec.t.m = rec.m;
  rec.t.beta1 = sigma0;
  rec.ldl.m = rec.m;
  rec.sigma_prev = std::move(sigma0);
  rec.theta_prev = Mat::identity(rec.m);
  rec.ell_prev = Mat(rec.m, rec.m);
  rec.beta_next = rec.t.beta1;
  return rec;
}

void symmetrize(Mat& a) {
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < j; ++i) {
      const double s = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = s;
      a(j, i) = s;
    }
}

// theta products compound over k; re-orthonormalize on drift
void refresh_theta(Mat& theta) {
  const double dev = shape_deviation(theta, Shape::orthogonal);
  if (dev > 1e-10) theta = householder_qr(theta).q;
}

void push_step(ReconState& rec, Mat alpha, Mat d, Mat ell, Mat sigma, Mat theta, Mat beta_new) {
  symmetrize(alpha);
  if (rec.steps >= 1) rec.t.betas.push_back(rec.beta_next);  // beta_j joins T_k
  rec.t.alphas.push_back(std::move(alpha));
  rec.ldl.ds.push_back(std::move(d));
  rec.ldl.ells.push_back(ell);  // ell_j; the LDL of T_k reads ells[0..k-2]
  rec.beta_next = std::move(beta_new);
  rec.sigma_prev = std::move(sigma);
  refresh_theta(theta);
  rec.theta_prev = std::move(theta);
  rec.ell_prev = std::move(ell);
  rec.steps++;
}

}  // namespace

ReconState recon_init_ol(const Mat& gram_r0) { return init_common(cholesky_upper(gram_r0), Variant::hs); }
ReconState recon_init_dr(const Mat& sigma0) { return init_common(sigma0, Variant::dr); }
ReconState recon_init_dp(const Mat& psi0) { return init_common(psi0, Variant::dp); }

void recon_ol_step(ReconState& rec, const Mat& gamma, const Mat& phi_inv, const Mat& gram_r) {
  if (!rec.active) return;
  try {
    const Mat t1 = tri_solve(rec.sigma_prev, rec.theta_prev, TriSide::left);
    const Mat tau = lu_solve(gamma, mat_mul(phi_inv, t1));
    const Mat d = mat_tmul(rec.theta_prev, mat_mul(rec.sigma_prev, tau));
    Mat alpha = rec.steps == 0 ? d : mat_add(d, mat_mul_nt(rec.ell_prev, rec.beta_next));
    const Mat sigma = cholesky_upper(gram_r);
    QrFactors qr = householder_qr(mat_mul(sigma, tau));
    const Mat w = tri_solve(rec.sigma_prev, sigma, TriSide::right);  // sigma_j sigma_{j-1}^{-1}
    const Mat ell = mat_tmul(qr.q, mat_mul(w, rec.theta_prev));
    push_step(rec, std::move(alpha), d, ell, sigma, qr.q, qr.r);
  } catch (const solver_error& e) {
    rec.active = false;
    rec.disabled_at = rec.steps + 1;
    rec.disabled_reason = e.what();
  }
}

void recon_dr_step(ReconState& rec, const Mat& gram_sas, const Mat& zeta) {
  if (!rec.active) return;
  try {
    const Mat tau = mat_mul(gram_sas, rec.theta_prev);  // xi^{-1} theta
    const Mat d = mat_tmul(rec.theta_prev, tau);
    Mat alpha = rec.steps == 0 ? d : mat_add(d, mat_mul_nt(rec.ell_prev, rec.beta_next));
    QrFactors qr = householder_qr(mat_mul(zeta, tau));
    const Mat ell = mat_tmul(qr.q, mat_mul(zeta, rec.theta_prev));
    push_step(rec, std::move(alpha), d, ell, rec.sigma_prev, qr.q, qr.r);
  } catch (const solver_error& e) {
    rec.active = false;
    rec.disabled_at = rec.steps + 1;
    rec.disabled_reason = e.what();
  }
}

void recon_dp_step(ReconState& rec, const Mat& gamma, const Mat& psi_prev, const Mat& psi, const Mat& cross) {
  if (!rec.active) return;
  try {
    const Mat t1 = tri_solve(rec.sigma_prev, rec.theta_prev, TriSide::left);
    const Mat tau = lu_solve(gamma, mat_mul(psi_prev, t1));
    const Mat d = mat_tmul(rec.theta_prev, mat_mul(rec.sigma_prev, tau));
    Mat alpha = rec.steps == 0 ? d : mat_add(d, mat_mul_nt(rec.ell_prev, rec.beta_next));
    Mat g = mat_tmul(psi, cross);  // psi_k^T p_k^T r_k = r_k^T r_k
    symmetrize(g);
    const Mat sigma = cholesky_upper(g);
    QrFactors qr = householder_qr(mat_mul(sigma, tau));
    const Mat w = tri_solve(rec.sigma_prev, sigma, TriSide::right);
    const Mat ell = mat_tmul(qr.q, mat_mul(w, rec.theta_prev));
    push_step(rec, std::move(alpha), d, ell, sigma, qr.q, qr.r);
  } catch (const solver_error& e) {
    rec.active = false;
    rec.disabled_at = rec.steps + 1;
    rec.disabled_reason = e.what();
  }
}

Block lanczos_block(const ReconState& rec, const Block& residual_or_w, int k) {
  if (k != rec.steps) throw invalid_input_error("lanczos_block: k does not match reconstruction state");
  Block v;
  if (residual_or_w.cols() != rec.m) throw dim_error("lanczos_block: block width mismatch");
  // theta is orthogonal, so theta^{-T} = theta; the DR path takes w_k and
  // never touches sigma
  if (rec.variant == Variant::dr) {
    v = mat_mul(residual_or_w, rec.theta_prev);
  } else {
    v = mat_mul(tri_solve(rec.sigma_prev, residual_or_w, TriSide::right), rec.theta_prev);
  }
  if (k % 2 == 1) v = mat_scale(v, -1.0);
  v.shape = Shape::orthogonal;
  return v;
}

RunHooks ReconRunner::hooks(Variant v) {
  RunHooks h;
  h.on_init = [this, v](const SolverState& st) {
    switch (v) {
      case Variant::ol:
      case Variant::hs:
        state = recon_init_ol(st.gram_r);
        break;
      case Variant::dr:
        state = recon_init_dr(st.sigma);
        break;
      case Variant::dp:
        state = recon_init_dp(st.psi);
        break;
      case Variant::bf:
        throw invalid_input_error("reconstruction is not defined for bf");
    }
  };
  h.on_step = [this, v](const SolverState& st, const StepQuantities& q, const StepReport&) {
    const bool was_active = state.active;
    switch (v) {
      case Variant::ol:
      case Variant::hs:
        recon_ol_step(state, *q.gamma, *q.phi_inv, *q.gram_r);
        break;
      case Variant::dr:
        recon_dr_step(state, *q.gram_sas, *q.zeta);
        break;
      case Variant::dp:
        recon_dp_step(state, *q.gamma, *q.psi_prev, *q.psi, *q.cross_pr);
        break;
      case Variant::bf:
        break;
    }
    if (state.keep_lanczos && state.active && was_active) {
      try {
        state.lanczos_blocks.push_back(lanczos_block(state, v == Variant::dr ? st.w : st.r, state.steps));
      } catch (const solver_error&) {
        // sigma singular: the Lanczos block does not exist; stop collecting
        state.keep_lanczos = false;
      }
    }
  };
  return h;
}

namespace {

void place_block(Mat& dense, int br, int bc, const Mat& blk, double scale = 1.0) {
  const int m = blk.rows();
  for (int c = 0; c < blk.cols(); ++c)
    for (int r = 0; r < m; ++r) dense(br * m + r, bc * m + c) = scale * blk(r, c);
}

}  // namespace

Mat assemble_that_direct(std::span<const Mat> gammas, std::span<const Mat> deltas, std::span<const Mat> phis) {
  const int k = static_cast<int>(gammas.size());
  if (k < 1) throw invalid_input_error("assemble_that_direct: need k >= 1");
  if (static_cast<int>(deltas.size()) != k - 1 || static_cast<int>(phis.size()) != k)
    throw invalid_input_error("assemble_that_direct: need k gammas/phis and k-1 deltas");
  const int m = gammas[0].rows();
  const Mat eye = Mat::identity(m);
  std::vector<Mat> gi(k), gphi(k);
  for (int j = 0; j < k; ++j) {
    gi[j] = lu_solve(gammas[j], eye);
    gphi[j] = mat_mul(gi[j], lu_solve(phis[j], eye));
  }
  Mat that(k * m, k * m);
  for (int t = 0; t < k; ++t) {
    Mat diag = gphi[t];
    if (t >= 1) diag = mat_add(diag, mat_mul(gi[t - 1], deltas[t - 1]));
    place_block(that, t, t, diag);
    if (t + 1 < k) {
      place_block(that, t, t + 1, mat_mul(gi[t], deltas[t]), -1.0);
      place_block(that, t + 1, t, gphi[t], -1.0);
    }
  }
  return that;
}

Mat assemble_that_factored(std::span<const Mat> gammas, std::span<const Mat> deltas, std::span<const Mat> phis) {
  const int k = static_cast<int>(gammas.size());
  const int m = gammas[0].rows();
  const Mat eye = Mat::identity(m);
  Mat lhat = Mat::identity(k * m);
  Mat dhat(k * m, k * m);
  Mat uhat = Mat::identity(k * m);
  for (int t = 0; t < k; ++t) {
    if (t + 1 < k) place_block(lhat, t + 1, t, eye, -1.0);
    place_block(dhat, t, t, mat_mul(lu_solve(gammas[t], eye), lu_solve(phis[t], eye)));
    if (t + 1 < k) place_block(uhat, t, t + 1, mat_mul(phis[t], deltas[t]), -1.0);
  }
  return mat_mul(lhat, mat_mul(dhat, uhat));
}

double verify_unitary_similarity(const BlockTridiag& t_lanczos, const Mat& t_tilde,
                                 std::span<const Mat> beta_tildes) {
  const int k = t_lanczos.steps(), m = t_lanczos.m;
  if (t_tilde.rows() != k * m) throw dim_error("verify_unitary_similarity: size mismatch");
  if (static_cast<int>(beta_tildes.size()) != k - 1)
    throw invalid_input_error("verify_unitary_similarity: need k-1 beta_tilde blocks");

  std::vector<Mat> etas;
  etas.push_back(Mat::identity(m));
  for (int j = 0; j + 1 < k; ++j) etas.push_back(householder_qr(mat_mul(beta_tildes[j], etas[j])).q);

  Mat u(k * m, k * m);
  for (int j = 0; j < k; ++j) place_block(u, j, j, etas[j]);
  const Mat sim = mat_mul(transpose(u), mat_mul(t_tilde, u));
  const Mat dense = densify(t_lanczos);
  double dev = 0.0;
  for (int j = 0; j < k * m; ++j)
    for (int i = 0; i < k * m; ++i) dev = std::max(dev, std::fabs(sim(i, j) - dense(i, j)));
  return dev;
}

Block galerkin_solution(const BlockTridiag& t, std::span<const Block> basis, const Block& x0, const Mat& beta1) {
  const int k = t.steps(), m = t.m;
  if (static_cast<int>(basis.size()) < k) throw invalid_input_error("galerkin_solution: basis too short");
  Mat rhs(k * m, m);
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < m; ++r) rhs(r, c) = beta1(r, c);
  const Mat y = spd_solve(densify(t), rhs);
  Block x = x0;
  for (int j = 0; j < k; ++j) {
    Mat yj(m, m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) yj(r, c) = y(j * m + r, c);
    x = block_axpy(x, basis[j], yj);
  }
  return x;
}

}  // namespace blockcg
