#include "blockcg/trace.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace blockcg {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const double kOmegaThresholds[] = {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12};

}  // namespace

void write_trace_csv(const std::string& path, const ConvergenceTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");

  nlohmann::json meta{{"schema", "blockcg-trace-v1"},
                      {"matrix", trace.matrix_name},
                      {"n", trace.n},
                      {"m", trace.m},
                      {"variant", trace.variant},
                      {"precond", trace.precond},
                      {"seed", trace.seed},
                      {"tol", trace.tol},
                      {"maxit", trace.max_iters},
                      {"omega", trace.omega_available},
                      {"termination", trace.termination},
                      {"matvecs", trace.total_matvecs}};
  if (trace.variant == "bf") meta["bf_tol"] = trace.bf_trunc_tol;
  if (trace.failure_iter >= 0) {
    meta["failure_iter"] = trace.failure_iter;
    meta["failure"] = trace.failure_what;
  }
  out << "# " << meta.dump() << "\n";

  out << "iter,omega,matvec";
  for (int j = 1; j <= trace.m; ++j) out << ",rel_res_" << j;
  for (int j = 1; j <= trace.m; ++j) out << ",a_err_" << j;
  out << ",warn,wall_s\n";

  for (const TraceRow& row : trace.rows) {
    out << row.iter << "," << fmt(row.omega) << "," << row.matvecs;
    for (int j = 0; j < trace.m; ++j)
      out << "," << (j < static_cast<int>(row.rel_res.size()) ? fmt(row.rel_res[j]) : "nan");
    for (int j = 0; j < trace.m; ++j)
      out << "," << (j < static_cast<int>(row.a_err.size()) ? fmt(row.a_err[j]) : "nan");
    out << "," << row.warnings << "," << fmt(row.wall_s) << "\n";
  }
}

std::vector<TraceSummary> compare_traces(const std::vector<ConvergenceTrace>& traces) {
  std::vector<TraceSummary> out;
  out.reserve(traces.size());
  for (const auto& t : traces) {
    TraceSummary s;
    s.variant = t.variant;
    s.m = t.m;
    s.iters = t.rows.empty() ? 0 : t.rows.back().iter;
    s.matvecs = t.total_matvecs;
    s.termination = t.termination;
    s.final_omega = std::numeric_limits<double>::quiet_NaN();
    s.best_omega = std::numeric_limits<double>::quiet_NaN();
    if (t.omega_available && !t.rows.empty()) {
      s.final_omega = t.rows.back().omega;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& r : t.rows)
        if (std::isfinite(r.omega)) best = std::min(best, r.omega);
      s.best_omega = best;
      for (double thr : kOmegaThresholds) {
        int hit = t.max_iters + 1;
        for (const auto& r : t.rows)
          if (r.omega <= thr) {
            hit = r.iter;
            break;
          }
        s.iters_to_omega[thr] = hit;
      }
    }
    if (!t.rows.empty()) {
      const auto& rr = t.rows.back().rel_res;
      s.final_max_rel_res = rr.empty() ? 0.0 : *std::max_element(rr.begin(), rr.end());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_summary_table(const std::vector<TraceSummary>& rows) {
  std::ostringstream os;
  os << "variant  m   iters  matvecs   final_omega  best_omega   max_rel_res  it(1e-8)  termination\n";
  char buf[256];
  for (const auto& s : rows) {
    const int it8 = s.iters_to_omega.count(1e-8) ? s.iters_to_omega.at(1e-8) : -1;
    std::snprintf(buf, sizeof buf, "%-7s %3d %7d %8ld  %11.3e  %11.3e  %11.3e  %8d  %s\n", s.variant.c_str(),
                  s.m, s.iters, s.matvecs, s.final_omega, s.best_omega, s.final_max_rel_res, it8,
                  s.termination.c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace blockcg
