#include "blockcg/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "blockcg/precond.hpp"
#include "blockcg/reconstruct.hpp"
#include "blockcg/rhs.hpp"
#include "blockcg/synth.hpp"

namespace blockcg {

double compute_omega(const SparseSym& a, const Block& x_true, const Block& x_k) {
  if (x_true.rows() != a.n() || x_k.rows() != a.n() || x_true.cols() != x_k.cols())
    throw dim_error("compute_omega: dimension mismatch");
  const Mat e = mat_sub(x_true, x_k);
  const Mat ae = spmm(a, e);
  const Mat axt = spmm(a, x_true);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < e.cols(); ++j) {
    const double* ec = e.col(j);
    const double* aec = ae.col(j);
    const double* xc = x_true.col(j);
    const double* axc = axt.col(j);
    for (int i = 0; i < e.rows(); ++i) {
      num += ec[i] * aec[i];
      den += xc[i] * axc[i];
    }
  }
  return std::sqrt(std::max(num, 0.0) / den);
}

namespace {

// x_true for random-b mode on desk-scale problems: dense Cholesky solve
Block dense_direct_solve(const SparseSym& a, const Block& b) {
  const int n = a.n();
  Mat dense(n, n);
  for (int i = 0; i < n; ++i)
    for (long k = a.rowptr()[i]; k < a.rowptr()[i + 1]; ++k) dense(i, a.colind()[k]) = a.values()[k];
  return spd_solve(dense, b);
}

void write_jacobi_dump(const std::string& path, const ConvergenceTrace& meta, const ReconState& rec) {
  std::ofstream out(path);
  if (!out) throw solver_error("cannot write '" + path + "'");
  nlohmann::json j{{"schema", "blockcg-jacobi-v1"},
                   {"matrix", meta.matrix_name},
                   {"variant", meta.variant},
                   {"m", rec.m},
                   {"k", rec.steps},
                   {"active", rec.active}};
  if (rec.disabled_at >= 0) j["disabled_at"] = rec.disabled_at;
  out << "# " << j.dump() << "\n";
  char buf[64];
  auto dump_mat = [&out, &buf](const char* name, const Mat& m) {
    out << name << " " << m.rows() << " " << m.cols() << "\n";
    for (int i = 0; i < m.rows(); ++i) {
      for (int c = 0; c < m.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", m(i, c));
        out << (c ? "," : "") << buf;
      }
      out << "\n";
    }
  };
  if (rec.steps > 0) {
    dump_mat("T", densify(rec.t));
    dump_mat("L", densify_unit_lower(rec.ldl));
    dump_mat("D", densify_block_diag(rec.ldl));
    dump_mat("beta1", rec.t.beta1);
  }
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  return s;
}

}  // namespace

int run_experiment(const ExperimentOptions& opts, std::ostream& log) {
  SparseSym a;
  std::string matrix_name;
  try {
    if (!parse_synth_spec(opts.matrix, a, matrix_name)) {
      a = load_matrix_market(opts.matrix);
      matrix_name = std::filesystem::path(opts.matrix).stem().string();
      if (matrix_name.ends_with(".mtx")) matrix_name = matrix_name.substr(0, matrix_name.size() - 4);
    }
  } catch (const solver_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitParse;
  }

  std::vector<Variant> variants;
  for (const auto& name : opts.variants) {
    const auto v = variant_from_name(name);
    if (!v) {
      log << "error: unknown variant '" << name << "'\n";
      return kExitParse;
    }
    variants.push_back(*v);
  }
  if (variants.empty()) {
    log << "error: no variants requested\n";
    return kExitParse;
  }

  Preconditioner prec = Preconditioner::identity(a.n());
  try {
    if (opts.precond == "jacobi")
      prec = Preconditioner::jacobi(a);
    else if (opts.precond == "ic")
      prec = Preconditioner::incomplete_cholesky(a, opts.ic_shift, opts.ic_droptol);
    else if (opts.precond != "none") {
      log << "error: unknown preconditioner '" << opts.precond << "'\n";
      return kExitParse;
    }
  } catch (const solver_error& e) {
    log << "error: preconditioner build failed: " << e.what() << "\n";
    return kExitBuild;
  }
  if (prec.kind() != Preconditioner::Kind::identity)
    for (Variant v : variants)
      if (v == Variant::hs || v == Variant::ol) {
        log << "error: hs/ol run unpreconditioned; drop --precond or the variant\n";
        return kExitParse;
      }

  RhsSpec rhs_spec;
  rhs_spec.m = opts.m;
  rhs_spec.seed = opts.seed;
  rhs_spec.source = opts.random_b ? RhsSpec::Source::random : RhsSpec::Source::constructed_solution;
  Rhs rhs;
  try {
    rhs = make_rhs(rhs_spec, a);
  } catch (const solver_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitBuild;
  }
  if (!rhs.x_true && a.n() <= 2000) {
    // omega needs the true solution; affordable directly at desk scale
    rhs.x_true = dense_direct_solve(a, rhs.b);
  }
  if (!rhs.x_true) log << "note: n > 2000 and random b: omega unavailable, traces carry residuals only\n";

  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (!opts.dump_jacobi.empty()) std::filesystem::create_directories(opts.dump_jacobi, ec);

  const Block x0(a.n(), opts.m);
  std::vector<ConvergenceTrace> traces;
  bool any_failure = false;

  for (Variant v : variants) {
    SolverConfig cfg;
    cfg.variant = v;
    cfg.tol = opts.tol;
    cfg.max_iters = opts.maxit;
    cfg.bf_trunc_tol = opts.bf_tol;
    cfg.precond = &prec;
    if (v == Variant::ol) cfg.phi_policy = PhiPolicy::qr_normalize;

    ReconRunner recon;
    RunHooks hooks;
    const bool want_recon = !opts.dump_jacobi.empty() && v != Variant::bf;
    if (want_recon) hooks = recon.hooks(v);
    if (rhs.x_true) hooks.x_true = &*rhs.x_true;

    ConvergenceTrace trace = run_solver(cfg, a, rhs.b, x0, hooks);
    trace.matrix_name = matrix_name;
    trace.precond = opts.precond;
    trace.seed = opts.seed;

    const std::string base = sanitize(matrix_name) + "_" + trace.variant + "_m" + std::to_string(opts.m);
    const std::string trace_path = (std::filesystem::path(opts.out_dir) / (base + ".csv")).string();
    write_trace_csv(trace_path, trace);
    log << "wrote " << trace_path << " (" << trace.termination << ", " << trace.rows.size() << " rows)\n";
    if (want_recon)
      write_jacobi_dump((std::filesystem::path(opts.dump_jacobi) / (base + "_jacobi.txt")).string(), trace,
                        recon.state);
    if (trace.termination == "step-failure") {
      any_failure = true;
      log << "  step failure at iteration " << trace.failure_iter << ": " << trace.failure_what << "\n";
    }
    traces.push_back(std::move(trace));
  }

  if (traces.size() > 1) log << format_summary_table(compare_traces(traces));
  return any_failure ? kExitSolver : kExitOk;
}

}  // namespace blockcg
