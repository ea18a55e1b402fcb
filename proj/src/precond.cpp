#include "blockcg/precond.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace blockcg {

Preconditioner Preconditioner::identity(int n) {
  Preconditioner p;
  p.kind_ = Kind::identity;
  p.n_ = n;
  return p;
}

Preconditioner Preconditioner::jacobi(const SparseSym& a) {
  Preconditioner p;
  p.kind_ = Kind::jacobi;
  p.n_ = a.n();
  p.diag_sqrt_.resize(a.n());
  const auto d = a.diagonal();
  for (int i = 0; i < a.n(); ++i) {
    if (d[i] <= 0.0) throw precond_build_error("jacobi: nonpositive diagonal");
    p.diag_sqrt_[i] = std::sqrt(d[i]);
  }
  return p;
}

bool Preconditioner::try_factor(const SparseSym& a, double shift, double droptol) {
  const int n = a.n();
  l_rowptr_.assign(1, 0);
  l_colind_.clear();
  l_values_.clear();

  // 2-norms of the full symmetric rows, for the drop rule
  std::vector<double> row_norm(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (long k = a.rowptr()[i]; k < a.rowptr()[i + 1]; ++k) s += a.values()[k] * a.values()[k];
    row_norm[i] = std::sqrt(s);
  }

  std::vector<double> work(n, 0.0);
  std::vector<int> stamp(n, -1);
  std::vector<char> in_pattern(n, 0);
  std::vector<double> diag(n, 0.0);
  // columns of L built so far, for pushing updates into later rows
  std::vector<std::vector<std::pair<int, double>>> cols(n);

  for (int i = 0; i < n; ++i) {
    std::priority_queue<int, std::vector<int>, std::greater<int>> heap;
    std::vector<int> touched;

    double di = 0.0;
    for (long k = a.rowptr()[i]; k < a.rowptr()[i + 1]; ++k) {
      const int j = a.colind()[k];
      if (j > i) continue;
      if (j == i) {
        di = a.values()[k] * (1.0 + shift);
        continue;
      }
      work[j] = a.values()[k];
      stamp[j] = i;
      in_pattern[j] = 1;
      touched.push_back(j);
      heap.push(j);
    }

    std::vector<std::pair<int, double>> rowi;
    while (!heap.empty()) {
      const int j = heap.top();
      heap.pop();
      if (stamp[j] != i) continue;
      stamp[j] = -2;  // popped
      const double lij = work[j] / diag[j];
      const bool keep = in_pattern[j] || (droptol > 0.0 && std::fabs(lij) >= droptol * row_norm[i]);
      if (!keep) continue;
      rowi.emplace_back(j, lij);
      di -= lij * lij;
      // push updates into the remaining columns of this row
      for (const auto& [t, ltj] : cols[j]) {
        if (t >= i) break;
        if (stamp[t] == -2) continue;  // already finalized
        if (stamp[t] != i) {
          if (droptol == 0.0) continue;  // IC(0): no fill
          work[t] = 0.0;
          stamp[t] = i;
          in_pattern[t] = 0;
          touched.push_back(t);
          heap.push(t);
        }
        work[t] -= lij * ltj;
      }
    }

    for (int t : touched) {
      in_pattern[t] = 0;
      if (stamp[t] == i) stamp[t] = -1;  // never popped (stale)
      else if (stamp[t] == -2) stamp[t] = -1;
    }

    if (di <= 0.0) return false;  // breakdown; caller escalates the shift
    const double lii = std::sqrt(di);
    diag[i] = lii;
    for (const auto& [j, v] : rowi) {
      l_colind_.push_back(j);
      l_values_.push_back(v);
      cols[j].emplace_back(i, v);
    }
    l_colind_.push_back(i);
    l_values_.push_back(lii);
    l_rowptr_.push_back(static_cast<long>(l_colind_.size()));
  }
  return true;
}

void Preconditioner::build_transpose() {
  const int n = n_;
  lt_rowptr_.assign(n + 1, 0);
  for (int c : l_colind_) lt_rowptr_[c + 1]++;
  for (int i = 0; i < n; ++i) lt_rowptr_[i + 1] += lt_rowptr_[i];
  lt_colind_.resize(l_colind_.size());
  lt_values_.resize(l_values_.size());
  std::vector<long> cursor(lt_rowptr_.begin(), lt_rowptr_.end() - 1);
  for (int i = 0; i < n; ++i)
    for (long k = l_rowptr_[i]; k < l_rowptr_[i + 1]; ++k) {
      const int c = l_colind_[k];
      lt_colind_[cursor[c]] = i;
      lt_values_[cursor[c]] = l_values_[k];
      ++cursor[c];
    }
}

Preconditioner Preconditioner::incomplete_cholesky(const SparseSym& a, double shift, double droptol) {
  if (shift < 0.0 || droptol < 0.0) throw invalid_input_error("incomplete_cholesky: negative parameter");
  Preconditioner p;
  p.kind_ = Kind::incomplete_cholesky;
  p.n_ = a.n();
  double s = shift;
  for (int attempt = 0; attempt <= 6; ++attempt) {
    if (p.try_factor(a, s, droptol)) {
      p.shift_used_ = s;
      p.build_transpose();
      return p;
    }
    s = (s == 0.0) ? 1e-3 : 10.0 * s;
  }
  throw precond_build_error("incomplete_cholesky: pivot breakdown persists after shift escalation");
}

Mat Preconditioner::apply_inv(const Block& r) const {
  switch (kind_) {
    case Kind::identity:
      return r;
    case Kind::jacobi: {
      Mat z = r;
      for (int j = 0; j < z.cols(); ++j) {
        double* c = z.col(j);
        for (int i = 0; i < n_; ++i) c[i] /= diag_sqrt_[i] * diag_sqrt_[i];
      }
      return z;
    }
    case Kind::incomplete_cholesky:
      return solve_upper(solve_lower(r));
  }
  throw solver_error("apply_inv: unknown kind");
}

Mat Preconditioner::solve_lower(const Block& x) const {
  if (x.rows() != n_) throw dim_error("solve_lower: dimension mismatch");
  switch (kind_) {
    case Kind::identity:
      return x;
    case Kind::jacobi: {
      Mat y = x;
      for (int j = 0; j < y.cols(); ++j) {
        double* c = y.col(j);
        for (int i = 0; i < n_; ++i) c[i] /= diag_sqrt_[i];
      }
      return y;
    }
    case Kind::incomplete_cholesky: {
      Mat y = x;
#pragma omp parallel for schedule(static) if (y.cols() > 2 && static_cast<long>(l_colind_.size()) > 16384)
      for (int j = 0; j < y.cols(); ++j) {
        double* c = y.col(j);
        for (int i = 0; i < n_; ++i) {
          double s = c[i];
          long k = l_rowptr_[i];
          const long end = l_rowptr_[i + 1] - 1;  // diagonal is last
          for (; k < end; ++k) s -= l_values_[k] * c[l_colind_[k]];
          c[i] = s / l_values_[end];
        }
      }
      return y;
    }
  }
  throw solver_error("solve_lower: unknown kind");
}

Mat Preconditioner::solve_upper(const Block& x) const {
  if (x.rows() != n_) throw dim_error("solve_upper: dimension mismatch");
  switch (kind_) {
    case Kind::identity:
      return x;
    case Kind::jacobi:
      return solve_lower(x);
    case Kind::incomplete_cholesky: {
      // rows of L^T are columns of L: lt arrays give an upper-triangular CSR
      // whose diagonal entry comes first in each row
      Mat y = x;
#pragma omp parallel for schedule(static) if (y.cols() > 2 && static_cast<long>(l_colind_.size()) > 16384)
      for (int j = 0; j < y.cols(); ++j) {
        double* c = y.col(j);
        for (int i = n_ - 1; i >= 0; --i) {
          double s = c[i];
          const long begin = lt_rowptr_[i];
          for (long k = lt_rowptr_[i + 1] - 1; k > begin; --k) s -= lt_values_[k] * c[lt_colind_[k]];
          c[i] = s / lt_values_[begin];
        }
      }
      return y;
    }
  }
  throw solver_error("solve_upper: unknown kind");
}

std::string Preconditioner::kind_name(Kind k) {
  switch (k) {
    case Kind::identity:
      return "none";
    case Kind::jacobi:
      return "jacobi";
    case Kind::incomplete_cholesky:
      return "ic";
  }
  return "?";
}

}  // namespace blockcg
