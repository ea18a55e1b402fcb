#include "blockcg/lanczos.hpp"

#include <cmath>

namespace blockcg {

Mat densify(const BlockTridiag& t) {
  const int k = t.steps(), m = t.m;
  Mat d(k * m, k * m);
  for (int j = 0; j < k; ++j)
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) d(j * m + r, j * m + c) = t.alphas[j](r, c);
  for (int j = 0; j + 1 < k; ++j)
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) {
        d((j + 1) * m + r, j * m + c) = t.betas[j](r, c);
        d(j * m + c, (j + 1) * m + r) = t.betas[j](r, c);
      }
  return d;
}

namespace {

bool numerically_singular(const Mat& beta) {
  double lo = beta(0, 0), hi = beta(0, 0);
  for (int j = 1; j < beta.rows(); ++j) {
    lo = std::min(lo, beta(j, j));
    hi = std::max(hi, beta(j, j));
  }
  return lo < 1e-12 * hi;
}

}  // namespace

LanczosResult block_lanczos(const SparseSym& a, const Block& v, const LanczosOptions& opts) {
  const int m = v.cols();
  if (a.n() != v.rows()) throw dim_error("block_lanczos: dimension mismatch");
  if (static_cast<long>(opts.k_max) * m > a.n())
    throw invalid_input_error("block_lanczos: k_max * m exceeds n");

  LanczosResult res;
  res.t.m = m;

  QrFactors init = householder_qr(v);
  if (numerically_singular(init.r))
    throw singular_gram_error("block_lanczos: rank-deficient starting block", 0);
  res.t.beta1 = init.r;

  std::vector<Block> basis;  // kept even without keep_basis: reorth needs it
  basis.push_back(std::move(init.q));
  Block v_prev(a.n(), m);  // v_0 = 0
  Mat beta_prev(m, m);

  for (int k = 0; k < opts.k_max; ++k) {
    const Block& vk = basis.back();
    const Block av = spmm(a, vk);
    Block w = av;
    if (k > 0) w = mat_sub(w, mat_mul_nt(v_prev, beta_prev));

    Mat alpha = (opts.orthog == Orthog::classical) ? block_inner(vk, av) : block_inner(vk, w);
    // alpha = vk^T A vk is symmetric in exact arithmetic
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < j; ++i) {
        const double s = 0.5 * (alpha(i, j) + alpha(j, i));
        alpha(i, j) = s;
        alpha(j, i) = s;
      }
    w = mat_sub(w, mat_mul(vk, alpha));

    if (opts.orthog == Orthog::full_reorth) {
      for (int pass = 0; pass < 2; ++pass)
        for (const Block& vb : basis) w = mat_sub(w, mat_mul(vb, mat_tmul(vb, w)));
    }

    QrFactors qr = householder_qr(w);
    res.t.alphas.push_back(std::move(alpha));
    res.steps = k + 1;
    res.beta_next = qr.r;

    if (numerically_singular(qr.r)) {
      res.breakdown = true;
      break;
    }
    if (k + 1 < opts.k_max) res.t.betas.push_back(qr.r);
    v_prev = basis.back();
    beta_prev = qr.r;
    basis.push_back(std::move(qr.q));
  }

  // after a clean final step the last beta belongs to beta_next, not to T_k
  while (static_cast<int>(res.t.betas.size()) > res.steps - 1) res.t.betas.pop_back();

  if (opts.keep_basis) res.basis = std::move(basis);
  return res;
}

double verify_lanczos_relation(const SparseSym& a, const LanczosResult& res) {
  if (res.basis.empty()) throw invalid_input_error("verify_lanczos_relation: basis not kept");
  const int k = res.steps, m = res.t.m;
  const bool have_next = static_cast<int>(res.basis.size()) > k;

  double err2 = 0.0;
  for (int j = 0; j < k; ++j) {
    Mat col = spmm(a, res.basis[j]);  // A v_{j+1}
    col = mat_sub(col, mat_mul(res.basis[j], res.t.alphas[j]));
    if (j > 0) col = mat_sub(col, mat_mul_nt(res.basis[j - 1], res.t.betas[j - 1]));
    if (j + 1 < k) col = mat_sub(col, mat_mul(res.basis[j + 1], res.t.betas[j]));
    if (j == k - 1 && have_next && !res.breakdown)
      col = mat_sub(col, mat_mul(res.basis[k], res.beta_next));
    const double f = col.frobenius_norm();
    err2 += f * f;
  }
  return std::sqrt(err2) / a.inf_norm();
}

}  // namespace blockcg
