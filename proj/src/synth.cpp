#include "blockcg/synth.hpp"

#include <cmath>
#include <sstream>

#include "blockcg/rng.hpp"

namespace blockcg {

std::vector<double> logspace_spectrum(int n, double lo, double hi) {
  if (n < 2 || lo <= 0.0 || hi < lo) throw invalid_input_error("logspace_spectrum: bad range");
  std::vector<double> e(n);
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (int i = 0; i < n; ++i) e[i] = std::pow(10.0, llo + (lhi - llo) * i / (n - 1));
  return e;
}

namespace {

// a <- H a H with H = I - 2 u u^T, applied from both sides.
void conjugate_by_reflector(Mat& a, const std::vector<double>& u) {
  const int n = a.rows();
  std::vector<double> t(n, 0.0);
  // a <- a - 2 (a u) u^T
  for (int j = 0; j < n; ++j) {
    const double f = u[j];
    if (f == 0.0) continue;
    const double* cj = a.col(j);
    for (int i = 0; i < n; ++i) t[i] += cj[i] * f;
  }
  for (int j = 0; j < n; ++j) {
    double* cj = a.col(j);
    const double f = 2.0 * u[j];
    for (int i = 0; i < n; ++i) cj[i] -= t[i] * f;
  }
  std::fill(t.begin(), t.end(), 0.0);
  // a <- a - 2 u (u^T a)
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    const double* cj = a.col(j);
    for (int i = 0; i < n; ++i) s += cj[i] * u[i];
    t[j] = s;
  }
  for (int j = 0; j < n; ++j) {
    double* cj = a.col(j);
    const double f = 2.0 * t[j];
    for (int i = 0; i < n; ++i) cj[i] -= f * u[i];
  }
}

Mat mixed_dense(const std::vector<double>& eigs, std::uint64_t seed, int reflections) {
  const int n = static_cast<int>(eigs.size());
  Mat a(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = eigs[i];
  SplitMix64 rng(seed);
  for (int r = 0; r < reflections; ++r) {
    std::vector<double> u(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      u[i] = rng.normal();
      s += u[i] * u[i];
    }
    s = std::sqrt(s);
    for (int i = 0; i < n; ++i) u[i] /= s;
    conjugate_by_reflector(a, u);
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

}  // namespace

SparseSym spd_from_spectrum(const std::vector<double>& eigs, std::uint64_t seed, int reflections) {
  return SparseSym::from_dense(mixed_dense(eigs, seed, reflections));
}

SparseSym tridiag_from_spectrum(const std::vector<double>& eigs, std::uint64_t seed) {
  const int n = static_cast<int>(eigs.size());
  Mat a = mixed_dense(eigs, seed, 1);

  // Householder tridiagonalization; only the tridiagonal of the result is
  // kept, so the spectrum is preserved exactly (up to roundoff).
  std::vector<double> u(n), t(n);
  for (int k = 0; k < n - 2; ++k) {
    double norm_x = 0.0;
    for (int i = k + 1; i < n; ++i) norm_x += a(i, k) * a(i, k);
    norm_x = std::sqrt(norm_x);
    if (norm_x == 0.0) continue;
    const double alpha = a(k + 1, k) >= 0.0 ? -norm_x : norm_x;
    double nu = 0.0;
    for (int i = 0; i < n; ++i) u[i] = 0.0;
    for (int i = k + 1; i < n; ++i) u[i] = a(i, k);
    u[k + 1] -= alpha;
    for (int i = k + 1; i < n; ++i) nu += u[i] * u[i];
    nu = std::sqrt(nu);
    if (nu == 0.0) continue;
    for (int i = k + 1; i < n; ++i) u[i] /= nu;
    conjugate_by_reflector(a, u);
  }

  std::vector<SparseSym::Triplet> tr;
  tr.reserve(3 * n);
  for (int i = 0; i < n; ++i) {
    tr.push_back({i, i, a(i, i)});
    if (i + 1 < n) {
      const double v = 0.5 * (a(i + 1, i) + a(i, i + 1));
      if (v != 0.0) {
        tr.push_back({i + 1, i, v});
        tr.push_back({i, i + 1, v});
      }
    }
  }
  return SparseSym::from_triplets(n, std::move(tr));
}

SparseSym spd_clustered(int n, double cond, std::uint64_t seed) {
  const int n_out = std::min(8, n / 4);
  std::vector<double> eigs = logspace_spectrum(n_out, 1.0, 1e2);
  const double hi = std::log10(cond);
  std::vector<double> bulk = logspace_spectrum(n - n_out, std::pow(10.0, hi - 2.2), cond);
  eigs.insert(eigs.end(), bulk.begin(), bulk.end());
  return spd_from_spectrum(eigs, seed, 2);
}

bool parse_synth_spec(const std::string& spec, SparseSym& out, std::string& name) {
  if (spec.rfind("synth:", 0) != 0) return false;
  std::istringstream in(spec.substr(6));
  std::string kind;
  if (!std::getline(in, kind, ':')) throw invalid_input_error("synth spec: missing kind");
  int n = 0;
  double cond = 0.0;
  std::uint64_t seed = 1;
  std::string kv;
  while (std::getline(in, kv, ':')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw invalid_input_error("synth spec: expected key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "n")
      n = std::stoi(val);
    else if (key == "cond")
      cond = std::stod(val);
    else if (key == "seed")
      seed = std::stoull(val);
    else
      throw invalid_input_error("synth spec: unknown key '" + key + "'");
  }
  if (n < 2 || cond < 1.0) throw invalid_input_error("synth spec: need n>=2 and cond>=1");
  if (kind == "logspace")
    out = spd_from_spectrum(logspace_spectrum(n, 1.0, cond), seed, 2);
  else if (kind == "tridiag")
    out = tridiag_from_spectrum(logspace_spectrum(n, 1.0, cond), seed);
  else if (kind == "clustered")
    out = spd_clustered(n, cond, seed);
  else
    throw invalid_input_error("synth spec: unknown kind '" + kind + "'");
  std::ostringstream nm;
  nm << "synth-" << kind << "-n" << n << "-c" << cond << "-s" << seed;
  name = nm.str();
  return true;
}

}  // namespace blockcg
