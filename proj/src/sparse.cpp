#include "blockcg/sparse.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "blockcg/serial_ref.hpp"

namespace blockcg {

SparseSym SparseSym::from_triplets(int n, std::vector<Triplet> entries) {
  if (n <= 0) throw invalid_input_error("from_triplets: empty matrix");
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw invalid_input_error("from_triplets: index out of range");
    if (!std::isfinite(t.val)) throw invalid_input_error("from_triplets: non-finite value");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  // sum duplicates
  std::vector<Triplet> merged;
  merged.reserve(entries.size());
  for (const auto& t : entries) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col)
      merged.back().val += t.val;
    else
      merged.push_back(t);
  }

  SparseSym a;
  a.n_ = n;
  a.rowptr_.assign(n + 1, 0);
  for (const auto& t : merged) a.rowptr_[t.row + 1]++;
  for (int i = 0; i < n; ++i) a.rowptr_[i + 1] += a.rowptr_[i];
  a.colind_.resize(merged.size());
  a.values_.resize(merged.size());
  for (size_t k = 0; k < merged.size(); ++k) {
    a.colind_[k] = merged[k].col;
    a.values_[k] = merged[k].val;
  }

  // validate: structural symmetry with matching values, positive diagonal
  auto find = [&a](int i, int j) -> const double* {
    const int* lo = a.colind_.data() + a.rowptr_[i];
    const int* hi = a.colind_.data() + a.rowptr_[i + 1];
    const int* it = std::lower_bound(lo, hi, j);
    if (it == hi || *it != j) return nullptr;
    return &a.values_[it - a.colind_.data()];
  };
  for (int i = 0; i < n; ++i) {
    bool has_diag = false;
    for (long k = a.rowptr_[i]; k < a.rowptr_[i + 1]; ++k) {
      const int j = a.colind_[k];
      if (j == i) {
        has_diag = true;
        if (a.values_[k] <= 0.0) throw invalid_input_error("matrix diagonal entry not positive");
        continue;
      }
      const double* mirror = find(j, i);
      if (!mirror) throw invalid_input_error("matrix not structurally symmetric");
      const double scale = std::max(std::fabs(a.values_[k]), std::fabs(*mirror));
      if (std::fabs(a.values_[k] - *mirror) > 1e-14 * scale)
        throw invalid_input_error("matrix values not symmetric");
    }
    if (!has_diag) throw invalid_input_error("matrix diagonal entry missing");
  }
  return a;
}

SparseSym SparseSym::from_dense(const Mat& dense, double drop) {
  if (dense.rows() != dense.cols()) throw dim_error("from_dense: matrix not square");
  std::vector<Triplet> tr;
  for (int i = 0; i < dense.rows(); ++i)
    for (int j = 0; j < dense.cols(); ++j)
      if (i == j || std::fabs(dense(i, j)) > drop) tr.push_back({i, j, dense(i, j)});
  return from_triplets(dense.rows(), std::move(tr));
}

SparseSym SparseSym::identity(int n) {
  std::vector<Triplet> tr;
  tr.reserve(n);
  for (int i = 0; i < n; ++i) tr.push_back({i, i, 1.0});
  return from_triplets(n, std::move(tr));
}

std::vector<double> SparseSym::diagonal() const {
  std::vector<double> d(n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (long k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
      if (colind_[k] == i) d[i] = values_[k];
  return d;
}

double SparseSym::inf_norm() const {
  double best = 0.0;
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (long k = rowptr_[i]; k < rowptr_[i + 1]; ++k) s += std::fabs(values_[k]);
    best = std::max(best, s);
  }
  return best;
}

Mat spmm(const SparseSym& a, const Block& x) {
  if (a.n() != x.rows()) throw dim_error("spmm: dimension mismatch");
  const int n = a.n(), m = x.cols();
  Mat y(n, m);
  const auto& rp = a.rowptr();
  const auto& ci = a.colind();
  const auto& va = a.values();
#pragma omp parallel for schedule(static) if (a.nnz() * m > 32768)
  for (int i = 0; i < n; ++i) {
    for (long k = rp[i]; k < rp[i + 1]; ++k) {
      const double v = va[k];
      const int c = ci[k];
      for (int j = 0; j < m; ++j) y(i, j) += v * x(c, j);
    }
  }
  return y;
}

namespace ref {

Mat spmm(const SparseSym& a, const Block& x) {
  if (a.n() != x.rows()) throw dim_error("ref::spmm: dimension mismatch");
  Mat y(a.n(), x.cols());
  for (int i = 0; i < a.n(); ++i)
    for (long k = a.rowptr()[i]; k < a.rowptr()[i + 1]; ++k)
      for (int j = 0; j < x.cols(); ++j) y(i, j) += a.values()[k] * x(a.colind()[k], j);
  return y;
}

Mat block_inner(const Block& x, const Block& y) {
  if (x.rows() != y.rows()) throw dim_error("ref::block_inner: row counts disagree");
  Mat g(x.cols(), y.cols());
  for (int i = 0; i < x.cols(); ++i)
    for (int j = 0; j < y.cols(); ++j) {
      double s = 0.0;
      for (int r = 0; r < x.rows(); ++r) s += x(r, i) * y(r, j);
      g(i, j) = s;
    }
  return g;
}

Mat block_scale(const Block& x, const Coeff& c) {
  if (x.cols() != c.rows()) throw dim_error("ref::block_scale: inner dimensions disagree");
  Mat r(x.rows(), c.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < c.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < x.cols(); ++k) s += x(i, k) * c(k, j);
      r(i, j) = s;
    }
  return r;
}

Mat block_axpy(const Block& x, const Block& y, const Coeff& c) {
  Mat r = block_scale(y, c);
  if (r.rows() != x.rows() || r.cols() != x.cols()) throw dim_error("ref::block_axpy: shape mismatch");
  for (int j = 0; j < r.cols(); ++j)
    for (int i = 0; i < r.rows(); ++i) r(i, j) += x(i, j);
  return r;
}

}  // namespace ref

namespace {

std::string read_whole_file(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");  // reads plain files too
  if (!f) throw parse_error("cannot open '" + path + "'", 0);
  std::string out;
  char buf[1 << 16];
  int got;
  while ((got = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<size_t>(got));
  const bool bad = got < 0;
  gzclose(f);
  if (bad) throw parse_error("error while reading '" + path + "'", 0);
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct MmHeader {
  std::string object, format, field, symmetry;
};

// Reads the "%%MatrixMarket ..." banner; `line` tracks the 1-based position.
MmHeader parse_banner(std::istringstream& in, long& line) {
  std::string first;
  if (!std::getline(in, first)) throw parse_error("empty file", 0);
  ++line;
  if (first.rfind("%%MatrixMarket", 0) != 0) throw parse_error("missing MatrixMarket banner", line);
  std::istringstream hs(first.substr(14));
  MmHeader h;
  if (!(hs >> h.object >> h.format >> h.field >> h.symmetry))
    throw parse_error("malformed MatrixMarket banner", line);
  h.object = lower(h.object);
  h.format = lower(h.format);
  h.field = lower(h.field);
  h.symmetry = lower(h.symmetry);
  return h;
}

bool next_content_line(std::istringstream& in, std::string& out, long& line) {
  while (std::getline(in, out)) {
    ++line;
    size_t p = out.find_first_not_of(" \t\r");
    if (p == std::string::npos) continue;
    if (out[p] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace

SparseSym load_matrix_market(const std::string& path) {
  const std::string content = read_whole_file(path);
  std::istringstream in(content);
  long line = 0;
  const MmHeader h = parse_banner(in, line);

  if (h.object != "matrix" || h.format != "coordinate")
    throw parse_error("expected 'matrix coordinate' MatrixMarket file", line);
  if (h.field != "real") throw parse_error("expected field 'real', got '" + h.field + "'", line);
  const bool declared_symmetric = h.symmetry == "symmetric";
  if (!declared_symmetric && h.symmetry != "general")
    throw parse_error("unsupported symmetry '" + h.symmetry + "'", line);

  std::string s;
  if (!next_content_line(in, s, line)) throw parse_error("missing size line", line);
  long rows, cols, nnz;
  {
    std::istringstream ls(s);
    if (!(ls >> rows >> cols >> nnz)) throw parse_error("malformed size line", line);
  }
  if (rows != cols) throw parse_error("matrix not square", line);
  if (rows <= 0 || nnz < 0) throw parse_error("bad dimensions", line);

  std::vector<SparseSym::Triplet> tr;
  tr.reserve(static_cast<size_t>(declared_symmetric ? 2 * nnz : nnz));
  for (long e = 0; e < nnz; ++e) {
    if (!next_content_line(in, s, line)) throw parse_error("unexpected end of file", line);
    long i, j;
    double v;
    {
      std::istringstream ls(s);
      if (!(ls >> i >> j >> v)) throw parse_error("malformed entry", line);
    }
    if (i < 1 || i > rows || j < 1 || j > cols) throw parse_error("index out of range", line);
    tr.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
    if (declared_symmetric && i != j) tr.push_back({static_cast<int>(j - 1), static_cast<int>(i - 1), v});
  }

  try {
    return SparseSym::from_triplets(static_cast<int>(rows), std::move(tr));
  } catch (const invalid_input_error& e) {
    throw parse_error(std::string("validation failed: ") + e.what(), line);
  }
}

void write_matrix_market(const std::string& path, const SparseSym& a) {
  std::ofstream out(path);
  if (!out) throw solver_error("cannot write '" + path + "'");
  long lower_nnz = 0;
  for (int i = 0; i < a.n(); ++i)
    for (long k = a.rowptr()[i]; k < a.rowptr()[i + 1]; ++k)
      if (a.colind()[k] <= i) ++lower_nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.n() << " " << a.n() << " " << lower_nnz << "\n";
  char buf[64];
  for (int i = 0; i < a.n(); ++i)
    for (long k = a.rowptr()[i]; k < a.rowptr()[i + 1]; ++k)
      if (a.colind()[k] <= i) {
        std::snprintf(buf, sizeof buf, "%.17g", a.values()[k]);
        out << (i + 1) << " " << (a.colind()[k] + 1) << " " << buf << "\n";
      }
}

Mat load_matrix_market_array(const std::string& path) {
  const std::string content = read_whole_file(path);
  std::istringstream in(content);
  long line = 0;
  const MmHeader h = parse_banner(in, line);
  if (h.object != "matrix" || h.format != "array") throw parse_error("expected 'matrix array' file", line);
  if (h.field != "real") throw parse_error("expected field 'real'", line);
  if (h.symmetry != "general") throw parse_error("expected symmetry 'general'", line);

  std::string s;
  if (!next_content_line(in, s, line)) throw parse_error("missing size line", line);
  long rows, cols;
  {
    std::istringstream ls(s);
    if (!(ls >> rows >> cols)) throw parse_error("malformed size line", line);
  }
  if (rows <= 0 || cols <= 0) throw parse_error("bad dimensions", line);
  Mat b(static_cast<int>(rows), static_cast<int>(cols));
  // column-major entry order per the format
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) {
      if (!next_content_line(in, s, line)) throw parse_error("unexpected end of file", line);
      std::istringstream ls(s);
      double v;
      if (!(ls >> v)) throw parse_error("malformed entry", line);
      b(static_cast<int>(i), static_cast<int>(j)) = v;
    }
  return b;
}

void write_matrix_market_array(const std::string& path, const Mat& b) {
  std::ofstream out(path);
  if (!out) throw solver_error("cannot write '" + path + "'");
  out << "%%MatrixMarket matrix array real general\n";
  out << b.rows() << " " << b.cols() << "\n";
  char buf[64];
  for (int j = 0; j < b.cols(); ++j)
    for (int i = 0; i < b.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", b(i, j));
      out << buf << "\n";
    }
}

}  // namespace blockcg
