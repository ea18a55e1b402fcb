#include "support/oracles.hpp"

#include <cmath>

#include "blockcg/kernels.hpp"

namespace blockcg::test {

namespace {

std::vector<double> matvec(const SparseSym& a, const std::vector<double>& x) {
  std::vector<double> y(a.n(), 0.0);
  for (int i = 0; i < a.n(); ++i)
    for (long k = a.rowptr()[i]; k < a.rowptr()[i + 1]; ++k) y[i] += a.values()[k] * x[a.colind()[k]];
  return y;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

ScalarCgRun scalar_cg(const SparseSym& a, const std::vector<double>& b, int iters) {
  const int n = a.n();
  ScalarCgRun run;
  std::vector<double> x(n, 0.0), r = b, p = b;
  run.x_hist.push_back(x);
  double rr = dot(r, r);
  for (int k = 0; k < iters; ++k) {
    const std::vector<double> ap = matvec(a, p);
    const double gamma = rr / dot(p, ap);
    for (int i = 0; i < n; ++i) x[i] += gamma * p[i];
    for (int i = 0; i < n; ++i) r[i] -= gamma * ap[i];
    const double rr_new = dot(r, r);
    const double delta = rr_new / rr;
    for (int i = 0; i < n; ++i) p[i] = r[i] + delta * p[i];
    rr = rr_new;
    run.x_hist.push_back(x);
    run.gammas.push_back(gamma);
    run.deltas.push_back(delta);
  }
  return run;
}

ScalarLanczosRun scalar_lanczos(const SparseSym& a, const std::vector<double>& v, int steps) {
  const int n = a.n();
  ScalarLanczosRun run;
  run.beta1 = std::sqrt(dot(v, v));
  std::vector<double> vk(n), vprev(n, 0.0);
  for (int i = 0; i < n; ++i) vk[i] = v[i] / run.beta1;
  double beta = 0.0;
  for (int k = 0; k < steps; ++k) {
    std::vector<double> w = matvec(a, vk);
    if (k > 0)
      for (int i = 0; i < n; ++i) w[i] -= beta * vprev[i];
    const double alpha = dot(vk, w);
    for (int i = 0; i < n; ++i) w[i] -= alpha * vk[i];
    run.alphas.push_back(alpha);
    beta = std::sqrt(dot(w, w));
    if (k + 1 < steps) run.betas.push_back(beta);
    vprev = vk;
    for (int i = 0; i < n; ++i) vk[i] = w[i] / beta;
  }
  return run;
}

Mat dense_from_sparse(const SparseSym& a) {
  Mat d(a.n(), a.n());
  for (int i = 0; i < a.n(); ++i)
    for (long k = a.rowptr()[i]; k < a.rowptr()[i + 1]; ++k) d(i, a.colind()[k]) = a.values()[k];
  return d;
}

double subspace_residual(const Mat& q1, const Mat& q2) {
  const Mat proj = mat_mul(q2, mat_tmul(q2, q1));
  return mat_sub(q1, proj).frobenius_norm();
}

std::vector<double> mat_col(const Mat& m, int j) {
  std::vector<double> v(m.rows());
  for (int i = 0; i < m.rows(); ++i) v[i] = m(i, j);
  return v;
}

double rel_err(double got, double want) {
  const double denom = std::max(std::fabs(want), 1e-300);
  return std::fabs(got - want) / denom;
}

}  // namespace blockcg::test
