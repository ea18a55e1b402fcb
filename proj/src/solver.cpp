#include "blockcg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace blockcg {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::ol: return "ol";
    case Variant::hs: return "hs";
    case Variant::dr: return "dr";
    case Variant::dp: return "dp";
    case Variant::bf: return "bf";
  }
  return "?";
}

std::optional<Variant> variant_from_name(const std::string& s) {
  if (s == "ol") return Variant::ol;
  if (s == "hs") return Variant::hs;
  if (s == "dr") return Variant::dr;
  if (s == "dp") return Variant::dp;
  if (s == "bf") return Variant::bf;
  return std::nullopt;
}

void SolverConfig::validate() const {
  if (!(tol >= 0.0 && tol < 1.0)) throw invalid_input_error("SolverConfig: tol must lie in [0,1)");
  if (max_iters < 0) throw invalid_input_error("SolverConfig: max_iters must be >= 0");
  if (variant == Variant::bf && !(bf_trunc_tol >= 1e-16 && bf_trunc_tol <= 1e-2))
    throw invalid_input_error("SolverConfig: bf_trunc_tol must lie in [1e-16, 1e-2]");
  if (precond && precond->kind() != Preconditioner::Kind::identity &&
      (variant == Variant::ol || variant == Variant::hs))
    throw invalid_input_error("SolverConfig: hs/ol variants run unpreconditioned");
}

namespace {

double cond_estimate(const Mat& chol_r) {
  double lo = std::fabs(chol_r(0, 0)), hi = lo;
  for (int j = 1; j < chol_r.rows(); ++j) {
    const double d = std::fabs(chol_r(j, j));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return (hi / lo) * (hi / lo);
}

std::vector<double> column_norms(const Mat& x) {
  std::vector<double> out(x.cols());
  for (int j = 0; j < x.cols(); ++j) out[j] = x.col_norm(j);
  return out;
}

StepReport make_report(const std::vector<double>& res, const Mat* chol_r) {
  StepReport rep;
  rep.res_norm = res;
  if (chol_r) {
    rep.gram_cond_est = cond_estimate(*chol_r);
    if (!(rep.gram_cond_est < 1e14)) rep.warnings++;  // nearly singular Gram
  }
  return rep;
}

}  // namespace

Block left_singular_basis(const Block& v, double trunc_tol) {
  const int n = v.rows(), m = v.cols();
  Mat u = v;

  // one-sided Jacobi: rotate column pairs until all are mutually orthogonal
  const double conv = 1e-14;
  for (int sweep = 0; sweep < 30; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        double a = 0.0, b = 0.0, c = 0.0;
        const double* ci = u.col(i);
        const double* cj = u.col(j);
        for (int r = 0; r < n; ++r) {
          a += ci[r] * ci[r];
          b += ci[r] * cj[r];
          c += cj[r] * cj[r];
        }
        if (a == 0.0 || c == 0.0) continue;
        if (std::fabs(b) <= conv * std::sqrt(a * c)) continue;
        const double tau = (c - a) / (2.0 * b);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * cs;
        double* wi = u.col(i);
        double* wj = u.col(j);
        for (int r = 0; r < n; ++r) {
          const double vi = wi[r], vj = wj[r];
          wi[r] = cs * vi - sn * vj;
          wj[r] = sn * vi + cs * vj;
        }
        rotated = true;
      }
    if (!rotated) break;
  }

  std::vector<double> sv(m);
  for (int j = 0; j < m; ++j) sv[j] = u.col_norm(j);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&sv](int a, int b) { return sv[a] > sv[b]; });

  const double smax = sv[order[0]];
  if (smax == 0.0) return Block(n, 0);
  int keep = 0;
  while (keep < m && sv[order[keep]] / smax > trunc_tol) ++keep;

  Block q(n, keep);
  for (int j = 0; j < keep; ++j) {
    const double* c = u.col(order[j]);
    double* qc = q.col(j);
    const double inv = 1.0 / sv[order[j]];
    for (int r = 0; r < n; ++r) qc[r] = c[r] * inv;
  }
  q.shape = Shape::orthogonal;
  return q;
}

SolverState init_solver(const SolverConfig& cfg, const SparseSym& a, const Block& b, const Block& x0) {
  cfg.validate();
  if (b.rows() != a.n() || x0.rows() != a.n() || b.cols() != x0.cols())
    throw dim_error("init_solver: dimension mismatch");
  if (!b.all_finite() || !x0.all_finite()) throw invalid_input_error("init_solver: non-finite input");

  Preconditioner ident = Preconditioner::identity(a.n());
  const Preconditioner& prec = cfg.precond ? *cfg.precond : ident;

  SolverState st;
  st.variant = cfg.variant;
  st.n = a.n();
  st.m = b.cols();
  st.x = x0;
  if (x0.max_abs() == 0.0) {
    st.r = b;
  } else {
    st.r = mat_sub(b, spmm(a, x0));
    st.matvecs += st.m;
  }

  switch (cfg.variant) {
    case Variant::ol:
    case Variant::hs: {
      st.gram_r = gram(st.r);
      if (cfg.variant == Variant::ol && cfg.phi_policy == PhiPolicy::qr_normalize) {
        QrFactors qr = householder_qr(st.r);
        st.p = std::move(qr.q);
        st.phi = tri_inverse(qr.r);
        st.phi_inv = std::move(qr.r);
      } else {
        st.p = st.r;
        st.phi = Mat::identity(st.m);
        st.phi_inv = Mat::identity(st.m);
      }
      st.stop_denom = column_norms(b);
      break;
    }
    case Variant::dr: {
      QrFactors qr = householder_qr(prec.solve_lower(st.r));
      st.w = std::move(qr.q);
      st.sigma = std::move(qr.r);
      st.s = prec.solve_upper(st.w);
      // sigma tracks the preconditioned residual; measure b the same way
      st.stop_denom = column_norms(prec.solve_lower(b));
      break;
    }
    case Variant::dp:
    case Variant::bf: {
      st.z = prec.apply_inv(st.r);
      if (cfg.variant == Variant::dp) {
        QrFactors qr = householder_qr(st.z);
        st.p = std::move(qr.q);
        st.psi = std::move(qr.r);
      } else {
        st.p = left_singular_basis(st.z, cfg.bf_trunc_tol);
      }
      st.stop_denom = column_norms(b);
      break;
    }
  }
  for (double& d : st.stop_denom)
    if (d == 0.0) d = 1.0;
  return st;
}

StepReport ol_bcg_step(SolverState& st, const SparseSym& a, PhiPolicy policy) {
  const Block ap = spmm(a, st.p);
  st.matvecs += st.p.cols();

  const Mat gram_pap = block_inner(st.p, ap);
  Mat pap_sym = gram_pap;
  for (int j = 0; j < pap_sym.cols(); ++j)
    for (int i = 0; i < j; ++i) {
      const double s = 0.5 * (pap_sym(i, j) + pap_sym(j, i));
      pap_sym(i, j) = s;
      pap_sym(j, i) = s;
    }
  const Mat chol_pap = cholesky_upper(pap_sym);  // singular-gram: the HS failure mode

  // gamma_{k-1} = (p^T A p)^{-1} phi^T r^T r
  const Mat rhs = mat_mul(transpose(st.phi), st.gram_r);
  const Mat gamma = tri_solve(chol_pap, tri_solve(chol_pap, rhs, TriSide::left_trans), TriSide::left);

  st.x = block_axpy(st.x, st.p, gamma);
  st.r = block_axpy(st.r, ap, mat_scale(gamma, -1.0));

  const Mat gram_r_new = gram(st.r);
  // delta_k = phi^{-1} (r_{k-1}^T r_{k-1})^{-1} r_k^T r_k
  const Mat delta = mat_mul(st.phi_inv, spd_solve(st.gram_r, gram_r_new));

  const Block cand = block_axpy(st.r, st.p, delta);

  StepQuantities q;
  q.k = ++st.iter;
  q.gamma = gamma;
  q.delta = delta;
  q.phi = st.phi;
  q.phi_inv = st.phi_inv;
  q.gram_r = gram_r_new;
  q.gram_pap = pap_sym;

  if (policy == PhiPolicy::qr_normalize) {
    QrFactors qr = householder_qr(cand);
    st.p = std::move(qr.q);
    st.phi = tri_inverse(qr.r);  // singular-triangular when cand is rank deficient
    st.phi_inv = std::move(qr.r);
  } else {
    st.p = cand;
    st.phi = Mat::identity(st.m);
    st.phi_inv = Mat::identity(st.m);
  }
  st.gram_r = gram_r_new;
  st.last = std::move(q);
  return make_report(column_norms(st.r), &chol_pap);
}

StepReport dr_bcg_step(SolverState& st, const SparseSym& a, const Preconditioner& prec) {
  const Block as = spmm(a, st.s);
  st.matvecs += st.s.cols();

  const Mat gram_sas = block_inner(st.s, as);
  Mat sas_sym = gram_sas;
  for (int j = 0; j < sas_sym.cols(); ++j)
    for (int i = 0; i < j; ++i) {
      const double s = 0.5 * (sas_sym(i, j) + sas_sym(j, i));
      sas_sym(i, j) = s;
      sas_sym(j, i) = s;
    }
  const Mat chol_sas = cholesky_upper(sas_sym);  // the only inversion DR needs
  const Mat xi = tri_solve(chol_sas, tri_solve(chol_sas, Mat::identity(st.m), TriSide::left_trans), TriSide::left);

  st.x = block_axpy(st.x, st.s, mat_mul(xi, st.sigma));

  const Block cand = block_axpy(st.w, prec.solve_lower(as), mat_scale(xi, -1.0));
  QrFactors qr = householder_qr(cand);
  st.w = std::move(qr.q);
  const Mat zeta = std::move(qr.r);

  st.s = block_axpy(prec.solve_upper(st.w), st.s, transpose(zeta));
  st.sigma = mat_mul(zeta, st.sigma);

  StepQuantities q;
  q.k = ++st.iter;
  q.xi = xi;
  q.gram_sas = sas_sym;
  q.zeta = zeta;
  q.sigma = st.sigma;
  st.last = std::move(q);

  // reconstructed residual norms: diag(sigma^T sigma) are the squared
  // per-column norms of w sigma = L^{-1} r
  return make_report(column_norms(st.sigma), &chol_sas);
}

StepReport dp_bcg_step(SolverState& st, const SparseSym& a, const Preconditioner& prec) {
  const Block ap = spmm(a, st.p);
  st.matvecs += st.p.cols();

  Mat pap = block_inner(st.p, ap);
  for (int j = 0; j < pap.cols(); ++j)
    for (int i = 0; i < j; ++i) {
      const double s = 0.5 * (pap(i, j) + pap(j, i));
      pap(i, j) = s;
      pap(j, i) = s;
    }
  const Mat chol_pap = cholesky_upper(pap);

  auto pap_solve = [&chol_pap](const Mat& rhs) {
    return tri_solve(chol_pap, tri_solve(chol_pap, rhs, TriSide::left_trans), TriSide::left);
  };

  const Mat gamma = pap_solve(mat_tmul(st.p, st.z));
  st.x = block_axpy(st.x, st.p, gamma);
  st.r = block_axpy(st.r, ap, mat_scale(gamma, -1.0));
  st.z = prec.apply_inv(st.r);

  const Block az = spmm(a, st.z);
  st.matvecs += st.z.cols();
  const Mat delta = mat_scale(pap_solve(mat_tmul(st.p, az)), -1.0);

  const Block cand = block_axpy(st.z, st.p, delta);
  QrFactors qr = householder_qr(cand);

  StepQuantities q;
  q.k = ++st.iter;
  q.gamma = gamma;
  q.delta = delta;
  q.gram_pap = pap;
  q.psi_prev = st.psi;
  q.psi = qr.r;

  st.p = std::move(qr.q);
  st.psi = std::move(qr.r);
  q.cross_pr = mat_tmul(st.p, st.r);
  st.last = std::move(q);
  return make_report(column_norms(st.r), &chol_pap);
}

StepReport bf_bcg_step(SolverState& st, const SparseSym& a, const Preconditioner& prec, double trunc_tol) {
  if (st.p.cols() == 0) throw empty_direction_error("bf_bcg_step: direction block is empty");
  const Block ap = spmm(a, st.p);
  st.matvecs += st.p.cols();

  Mat pap = block_inner(st.p, ap);
  for (int j = 0; j < pap.cols(); ++j)
    for (int i = 0; i < j; ++i) {
      const double s = 0.5 * (pap(i, j) + pap(j, i));
      pap(i, j) = s;
      pap(j, i) = s;
    }
  const Mat chol_pap = cholesky_upper(pap);
  auto pap_solve = [&chol_pap](const Mat& rhs) {
    return tri_solve(chol_pap, tri_solve(chol_pap, rhs, TriSide::left_trans), TriSide::left);
  };

  const Mat gamma = pap_solve(mat_tmul(st.p, st.z));  // rectangular in general
  st.x = block_axpy(st.x, st.p, gamma);
  st.r = block_axpy(st.r, ap, mat_scale(gamma, -1.0));
  st.z = prec.apply_inv(st.r);

  const Block az = spmm(a, st.z);
  st.matvecs += st.z.cols();
  const Mat delta = mat_scale(pap_solve(mat_tmul(st.p, az)), -1.0);

  const Block cand = block_axpy(st.z, st.p, delta);
  Block next = left_singular_basis(cand, trunc_tol);
  if (next.cols() == 0) throw empty_direction_error("bf_bcg_step: all singular values truncated");
  if (next.cols() > st.p.cols()) {
    // width never grows
    Block clipped(next.rows(), st.p.cols());
    for (int j = 0; j < clipped.cols(); ++j)
      for (int i = 0; i < clipped.rows(); ++i) clipped(i, j) = next(i, j);
    next = std::move(clipped);
  }

  StepQuantities q;
  q.k = ++st.iter;
  q.gamma = gamma;
  q.delta = delta;
  q.gram_pap = pap;
  st.p = std::move(next);
  st.last = std::move(q);
  return make_report(column_norms(st.r), &chol_pap);
}

namespace {

struct OmegaHelper {
  const SparseSym& a;
  const Block& x_true;
  double denom = 0.0;

  OmegaHelper(const SparseSym& a_, const Block& xt) : a(a_), x_true(xt) {
    const Mat axt = spmm(a, xt);
    for (int j = 0; j < xt.cols(); ++j) {
      const double* e = xt.col(j);
      const double* ae = axt.col(j);
      for (int i = 0; i < xt.rows(); ++i) denom += e[i] * ae[i];
    }
  }

  // fills row.omega and row.a_err
  void measure(const Block& x, TraceRow& row) const {
    const Mat e = mat_sub(x_true, x);
    const Mat ae = spmm(a, e);
    double num = 0.0;
    row.a_err.resize(e.cols());
    for (int j = 0; j < e.cols(); ++j) {
      double s = 0.0;
      const double* ec = e.col(j);
      const double* aec = ae.col(j);
      for (int i = 0; i < e.rows(); ++i) s += ec[i] * aec[i];
      s = std::max(s, 0.0);
      row.a_err[j] = std::sqrt(s);
      num += s;
    }
    row.omega = std::sqrt(num / denom);
  }
};

bool all_below(const std::vector<double>& res, const std::vector<double>& denom, double tol) {
  for (size_t i = 0; i < res.size(); ++i)
    if (res[i] > tol * denom[i]) return false;
  return true;
}

}  // namespace

ConvergenceTrace run_solver(const SolverConfig& cfg, const SparseSym& a, const Block& b, const Block& x0,
                            const RunHooks& hooks) {
  cfg.validate();
  Preconditioner ident = Preconditioner::identity(a.n());
  const Preconditioner& prec = cfg.precond ? *cfg.precond : ident;

  ConvergenceTrace trace;
  trace.n = a.n();
  trace.m = b.cols();
  trace.variant = variant_name(cfg.variant);
  trace.precond = Preconditioner::kind_name(prec.kind());
  trace.tol = cfg.tol;
  trace.max_iters = cfg.max_iters;
  trace.bf_trunc_tol = cfg.variant == Variant::bf ? cfg.bf_trunc_tol : 0.0;
  trace.omega_available = hooks.x_true != nullptr;

  std::optional<OmegaHelper> om;
  if (hooks.x_true) om.emplace(a, *hooks.x_true);

  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  SolverState st;
  try {
    st = init_solver(cfg, a, b, x0);
  } catch (const solver_error& e) {
    trace.termination = "step-failure";
    trace.failure_iter = 0;
    trace.failure_what = e.what();
    return trace;
  }
  if (hooks.on_init) hooks.on_init(st);

  auto push_row = [&](const std::vector<double>& res_norm, int warnings) {
    TraceRow row;
    row.iter = st.iter;
    row.matvecs = st.matvecs;
    row.rel_res.resize(res_norm.size());
    for (size_t i = 0; i < res_norm.size(); ++i) row.rel_res[i] = res_norm[i] / st.stop_denom[i];
    row.warnings = warnings;
    if (om) om->measure(st.x, row);
    row.wall_s = wall();
    trace.rows.push_back(std::move(row));
  };

  const std::vector<double> res0 =
      cfg.variant == Variant::dr ? column_norms(st.sigma) : column_norms(st.r);
  push_row(res0, 0);
  if (all_below(res0, st.stop_denom, cfg.tol)) {
    trace.termination = "converged";
    trace.total_matvecs = st.matvecs;
    return trace;
  }

  trace.termination = "maxit";
  for (int k = 1; k <= cfg.max_iters; ++k) {
    StepReport rep;
    try {
      switch (cfg.variant) {
        case Variant::ol:
          rep = ol_bcg_step(st, a, cfg.phi_policy);
          break;
        case Variant::hs:
          rep = ol_bcg_step(st, a, PhiPolicy::identity);
          break;
        case Variant::dr:
          rep = dr_bcg_step(st, a, prec);
          break;
        case Variant::dp:
          rep = dp_bcg_step(st, a, prec);
          break;
        case Variant::bf:
          rep = bf_bcg_step(st, a, prec, cfg.bf_trunc_tol);
          break;
      }
    } catch (const solver_error& e) {
      trace.termination = "step-failure";
      trace.failure_iter = k;
      trace.failure_what = e.what();
      break;
    }
    if (hooks.on_step) hooks.on_step(st, st.last, rep);
    push_row(rep.res_norm, rep.warnings);
    if (all_below(rep.res_norm, st.stop_denom, cfg.tol)) {
      trace.termination = "converged";
      break;
    }
  }
  trace.total_matvecs = st.matvecs;
  return trace;
}

}  // namespace blockcg
