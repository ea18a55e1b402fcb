#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "blockcg/errors.hpp"

namespace blockcg {

// Structural tag for m x m coefficient matrices. Purely informational;
// shape_deviation() measures how well the data honors the tag.
enum class Shape { general, upper_triangular, unit_lower, diagonal, orthogonal };

// Dense real matrix, column-major. Used both for n x m blocks of vectors
// and for the small m x m coefficient matrices.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw dim_error("negative matrix dimension");
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    m.shape = Shape::diagonal;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(j) * rows_ + i]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(j) * rows_ + i]; }

  double* col(int j) { return a_.data() + static_cast<size_t>(j) * rows_; }
  const double* col(int j) const { return a_.data() + static_cast<size_t>(j) * rows_; }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double s = 0.0;
    for (double v : a_) s = std::max(s, std::fabs(v));
    return s;
  }

  double col_norm(int j) const {
    double s = 0.0;
    const double* c = col(j);
    for (int i = 0; i < rows_; ++i) s += c[i] * c[i];
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (double v : a_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Shape shape = Shape::general;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

using Block = Mat;
using Coeff = Mat;

inline Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

// Frobenius distance of `a` from the structure claimed by `tag`.
inline double shape_deviation(const Mat& a, Shape tag) {
  double s = 0.0;
  const int n = a.rows(), m = a.cols();
  switch (tag) {
    case Shape::general:
      return 0.0;
    case Shape::upper_triangular:
      for (int j = 0; j < m; ++j)
        for (int i = j + 1; i < n; ++i) s += a(i, j) * a(i, j);
      break;
    case Shape::diagonal:
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i)
          if (i != j) s += a(i, j) * a(i, j);
      break;
    case Shape::unit_lower:
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) {
          if (i == j)
            s += (a(i, j) - 1.0) * (a(i, j) - 1.0);
          else if (i < j)
            s += a(i, j) * a(i, j);
        }
      break;
    case Shape::orthogonal: {
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          double d = 0.0;
          for (int i = 0; i < n; ++i) d += a(i, j) * a(i, k);
          d -= (j == k) ? 1.0 : 0.0;
          s += d * d;
        }
      break;
    }
  }
  return std::sqrt(s);
}

}  // namespace blockcg
