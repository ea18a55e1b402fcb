#include "blockcg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blockcg {

namespace {

// Row count below which the OpenMP kernels stay serial.
constexpr int kParRows = 8192;

void check_mul_dims(const Mat& a, const Mat& b, const char* who) {
  if (a.cols() != b.rows()) throw dim_error(std::string(who) + ": inner dimensions disagree");
}

}  // namespace

QrFactors householder_qr(const Block& v) {
  const int n = v.rows(), m = v.cols();
  if (m > n) throw dim_error("householder_qr: need rows >= cols");
  if (!v.all_finite()) throw invalid_input_error("householder_qr: non-finite input");

  Mat work = v;
  Mat refl(n, m);  // Householder vector k lives in rows k..n-1 of column k

  for (int k = 0; k < m; ++k) {
    double norm_x = 0.0;
    for (int i = k; i < n; ++i) norm_x += work(i, k) * work(i, k);
    norm_x = std::sqrt(norm_x);
    if (norm_x == 0.0) continue;  // zero subcolumn: reflection is the identity

    const double alpha = work(k, k) >= 0.0 ? -norm_x : norm_x;
    double* u = refl.col(k);
    for (int i = k; i < n; ++i) u[i] = work(i, k);
    u[k] -= alpha;
    double norm_u = 0.0;
    for (int i = k; i < n; ++i) norm_u += u[i] * u[i];
    norm_u = std::sqrt(norm_u);
    for (int i = k; i < n; ++i) u[i] /= norm_u;

    work(k, k) = alpha;
    for (int i = k + 1; i < n; ++i) work(i, k) = 0.0;
#pragma omp parallel for schedule(static) if ((m - k) > 2 && (n - k) > kParRows)
    for (int j = k + 1; j < m; ++j) {
      double dot = 0.0;
      for (int i = k; i < n; ++i) dot += u[i] * work(i, j);
      dot *= 2.0;
      for (int i = k; i < n; ++i) work(i, j) -= dot * u[i];
    }
  }

  // q = H_0 ... H_{m-1} [e_0 .. e_{m-1}], applied in reverse.
  Block q(n, m);
  for (int j = 0; j < m; ++j) q(j, j) = 1.0;
  for (int k = m - 1; k >= 0; --k) {
    const double* u = refl.col(k);
    double nu = 0.0;
    for (int i = k; i < n; ++i) nu += u[i] * u[i];
    if (nu == 0.0) continue;
#pragma omp parallel for schedule(static) if (m > 2 && (n - k) > kParRows)
    for (int j = 0; j < m; ++j) {
      double dot = 0.0;
      for (int i = k; i < n; ++i) dot += u[i] * q(i, j);
      dot *= 2.0;
      for (int i = k; i < n; ++i) q(i, j) -= dot * u[i];
    }
  }

  Coeff r(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i <= j; ++i) r(i, j) = work(i, j);

  // Force a nonnegative diagonal on R (flip matching Q columns).
  for (int j = 0; j < m; ++j) {
    if (r(j, j) < 0.0) {
      for (int k2 = j; k2 < m; ++k2) r(j, k2) = -r(j, k2);
      double* c = q.col(j);
      for (int i = 0; i < n; ++i) c[i] = -c[i];
    }
  }
  r.shape = Shape::upper_triangular;
  q.shape = Shape::orthogonal;
  return {std::move(q), std::move(r)};
}

Coeff cholesky_upper(const Mat& a) {
  const int m = a.rows();
  if (a.cols() != m) throw dim_error("cholesky_upper: matrix not square");
  Mat c(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) c(i, j) = 0.5 * (a(i, j) + a(j, i));
  const double scale = c.frobenius_norm();

  Coeff r(m, m);
  for (int j = 0; j < m; ++j) {
    double d = c(j, j);
    for (int k = 0; k < j; ++k) d -= r(k, j) * r(k, j);
    if (d <= kEpsPd * scale) throw singular_gram_error("cholesky_upper: matrix not positive definite", j);
    r(j, j) = std::sqrt(d);
    for (int i = j + 1; i < m; ++i) {
      double s = c(j, i);
      for (int k = 0; k < j; ++k) s -= r(k, j) * r(k, i);
      r(j, i) = s / r(j, j);
    }
  }
  r.shape = Shape::upper_triangular;
  return r;
}

Mat spd_solve(const Mat& a, const Mat& rhs) {
  const Coeff r = cholesky_upper(a);
  return tri_solve(r, tri_solve(r, rhs, TriSide::left_trans), TriSide::left);
}

Mat tri_solve(const Mat& r, const Mat& rhs, TriSide side) {
  const int m = r.rows();
  if (r.cols() != m) throw dim_error("tri_solve: factor not square");
  double maxd = 0.0;
  for (int j = 0; j < m; ++j) maxd = std::max(maxd, std::fabs(r(j, j)));
  for (int j = 0; j < m; ++j)
    if (std::fabs(r(j, j)) <= kEpsTri * maxd || maxd == 0.0)
      throw singular_triangular_error("tri_solve: zero pivot", j);

  Mat x = rhs;
  switch (side) {
    case TriSide::left: {  // r x = rhs, back substitution
      if (rhs.rows() != m) throw dim_error("tri_solve: rhs rows");
      for (int j = 0; j < x.cols(); ++j) {
        double* c = x.col(j);
        for (int i = m - 1; i >= 0; --i) {
          double s = c[i];
          for (int k = i + 1; k < m; ++k) s -= r(i, k) * c[k];
          c[i] = s / r(i, i);
        }
      }
      break;
    }
    case TriSide::left_trans: {  // r^T x = rhs, forward substitution
      if (rhs.rows() != m) throw dim_error("tri_solve: rhs rows");
      for (int j = 0; j < x.cols(); ++j) {
        double* c = x.col(j);
        for (int i = 0; i < m; ++i) {
          double s = c[i];
          for (int k = 0; k < i; ++k) s -= r(k, i) * c[k];
          c[i] = s / r(i, i);
        }
      }
      break;
    }
    case TriSide::right: {  // x r = rhs, forward over columns
      if (rhs.cols() != m) throw dim_error("tri_solve: rhs cols");
      const int n = x.rows();
      for (int j = 0; j < m; ++j) {
        double* cj = x.col(j);
        for (int k = 0; k < j; ++k) {
          const double f = r(k, j);
          if (f == 0.0) continue;
          const double* ck = x.col(k);
          for (int i = 0; i < n; ++i) cj[i] -= f * ck[i];
        }
        for (int i = 0; i < n; ++i) cj[i] /= r(j, j);
      }
      break;
    }
    case TriSide::right_trans: {  // x r^T = rhs, backward over columns
      if (rhs.cols() != m) throw dim_error("tri_solve: rhs cols");
      const int n = x.rows();
      for (int j = m - 1; j >= 0; --j) {
        double* cj = x.col(j);
        for (int k = j + 1; k < m; ++k) {
          const double f = r(j, k);
          if (f == 0.0) continue;
          const double* ck = x.col(k);
          for (int i = 0; i < n; ++i) cj[i] -= f * ck[i];
        }
        for (int i = 0; i < n; ++i) cj[i] /= r(j, j);
      }
      break;
    }
  }
  return x;
}

Mat tri_inverse(const Mat& r) {
  Mat inv = tri_solve(r, Mat::identity(r.rows()), TriSide::left);
  inv.shape = Shape::upper_triangular;
  return inv;
}

Mat lu_solve(const Mat& a, const Mat& rhs) {
  const int m = a.rows();
  if (a.cols() != m) throw dim_error("lu_solve: matrix not square");
  if (rhs.rows() != m) throw dim_error("lu_solve: rhs rows");
  Mat lu = a;
  std::vector<int> piv(m);
  std::iota(piv.begin(), piv.end(), 0);
  double scale = lu.max_abs();
  for (int k = 0; k < m; ++k) {
    int p = k;
    for (int i = k + 1; i < m; ++i)
      if (std::fabs(lu(i, k)) > std::fabs(lu(p, k))) p = i;
    if (p != k) {
      for (int j = 0; j < m; ++j) std::swap(lu(k, j), lu(p, j));
      std::swap(piv[k], piv[p]);
    }
    if (std::fabs(lu(k, k)) <= kEpsTri * scale)
      throw singular_triangular_error("lu_solve: singular matrix", k);
    for (int i = k + 1; i < m; ++i) {
      lu(i, k) /= lu(k, k);
      const double f = lu(i, k);
      for (int j = k + 1; j < m; ++j) lu(i, j) -= f * lu(k, j);
    }
  }
  Mat x(m, rhs.cols());
  for (int j = 0; j < x.cols(); ++j) {
    for (int i = 0; i < m; ++i) x(i, j) = rhs(piv[i], j);
    double* c = x.col(j);
    for (int i = 1; i < m; ++i) {
      double s = c[i];
      for (int k = 0; k < i; ++k) s -= lu(i, k) * c[k];
      c[i] = s;
    }
    for (int i = m - 1; i >= 0; --i) {
      double s = c[i];
      for (int k = i + 1; k < m; ++k) s -= lu(i, k) * c[k];
      c[i] = s / lu(i, i);
    }
  }
  return x;
}

Mat block_inner(const Block& x, const Block& y) {
  if (x.rows() != y.rows()) throw dim_error("block_inner: row counts disagree");
  const int n = x.rows(), mx = x.cols(), my = y.cols();
  Mat g(mx, my);

#ifdef _OPENMP
  if (static_cast<long>(n) * mx * my > 4 * kParRows && n > kParRows) {
    const int nt = omp_get_max_threads();
    std::vector<Mat> part(nt, Mat(mx, my));
#pragma omp parallel num_threads(nt)
    {
      const int t = omp_get_thread_num();
      const int chunk = (n + nt - 1) / nt;
      const int lo = t * chunk, hi = std::min(n, lo + chunk);
      Mat& loc = part[t];
      for (int j = 0; j < my; ++j) {
        const double* cy = y.col(j);
        for (int i = 0; i < mx; ++i) {
          const double* cx = x.col(i);
          double s = 0.0;
          for (int r = lo; r < hi; ++r) s += cx[r] * cy[r];
          loc(i, j) += s;
        }
      }
    }
    // fixed thread-order reduction keeps results reproducible for a given
    // thread count
    for (int t = 0; t < nt; ++t)
      for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) g(i, j) += part[t](i, j);
  } else
#endif
  {
    for (int j = 0; j < my; ++j) {
      const double* cy = y.col(j);
      for (int i = 0; i < mx; ++i) {
        const double* cx = x.col(i);
        double s = 0.0;
        for (int r = 0; r < n; ++r) s += cx[r] * cy[r];
        g(i, j) = s;
      }
    }
  }

  if (&x == &y) {
    for (int j = 0; j < my; ++j)
      for (int i = 0; i < j; ++i) {
        const double s = 0.5 * (g(i, j) + g(j, i));
        g(i, j) = s;
        g(j, i) = s;
      }
  }
  return g;
}

Mat gram(const Block& x) { return block_inner(x, x); }

Mat mat_mul(const Mat& a, const Mat& b) {
  check_mul_dims(a, b, "mat_mul");
  const int n = a.rows(), k = a.cols(), m = b.cols();
  Mat res(n, m);
#pragma omp parallel for schedule(static) if (m > 2 && static_cast<long>(n) * k > kParRows)
  for (int j = 0; j < m; ++j) {
    double* cj = res.col(j);
    for (int l = 0; l < k; ++l) {
      const double f = b(l, j);
      if (f == 0.0) continue;
      const double* al = a.col(l);
      for (int i = 0; i < n; ++i) cj[i] += f * al[i];
    }
  }
  return res;
}

Mat mat_mul_nt(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) throw dim_error("mat_mul_nt: inner dimensions disagree");
  const int n = a.rows(), k = a.cols(), m = b.rows();
  Mat res(n, m);
  for (int j = 0; j < m; ++j) {
    double* cj = res.col(j);
    for (int l = 0; l < k; ++l) {
      const double f = b(j, l);
      if (f == 0.0) continue;
      const double* al = a.col(l);
      for (int i = 0; i < n; ++i) cj[i] += f * al[i];
    }
  }
  return res;
}

Mat mat_tmul(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) throw dim_error("mat_tmul: row counts disagree");
  const int n = a.rows(), ma = a.cols(), mb = b.cols();
  Mat res(ma, mb);
  for (int j = 0; j < mb; ++j) {
    const double* cb = b.col(j);
    for (int i = 0; i < ma; ++i) {
      const double* ca = a.col(i);
      double s = 0.0;
      for (int r = 0; r < n; ++r) s += ca[r] * cb[r];
      res(i, j) = s;
    }
  }
  return res;
}

Mat block_axpy(const Block& x, const Block& y, const Coeff& c) {
  if (y.cols() != c.rows()) throw dim_error("block_axpy: inner dimensions disagree");
  if (x.rows() != y.rows() || x.cols() != c.cols()) throw dim_error("block_axpy: output shape mismatch");
  const int n = x.rows(), k = y.cols(), m = x.cols();
  Mat res = x;
#pragma omp parallel for schedule(static) if (m > 2 && static_cast<long>(n) * k > kParRows)
  for (int j = 0; j < m; ++j) {
    double* cj = res.col(j);
    for (int l = 0; l < k; ++l) {
      const double f = c(l, j);
      if (f == 0.0) continue;
      const double* yl = y.col(l);
      for (int i = 0; i < n; ++i) cj[i] += f * yl[i];
    }
  }
  return res;
}

Mat mat_add(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw dim_error("mat_add: shape mismatch");
  Mat r = a;
  for (int j = 0; j < r.cols(); ++j)
    for (int i = 0; i < r.rows(); ++i) r(i, j) += b(i, j);
  return r;
}

Mat mat_sub(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw dim_error("mat_sub: shape mismatch");
  Mat r = a;
  for (int j = 0; j < r.cols(); ++j)
    for (int i = 0; i < r.rows(); ++i) r(i, j) -= b(i, j);
  return r;
}

Mat mat_scale(const Mat& a, double s) {
  Mat r = a;
  for (int j = 0; j < r.cols(); ++j)
    for (int i = 0; i < r.rows(); ++i) r(i, j) *= s;
  return r;
}

}  // namespace blockcg
