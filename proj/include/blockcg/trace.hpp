#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace blockcg {

struct TraceRow {
  int iter = 0;
  double omega = std::numeric_limits<double>::quiet_NaN();
  long matvecs = 0;
  std::vector<double> rel_res;  // per column
  std::vector<double> a_err;    // per column; empty when x_true unknown
  int warnings = 0;
  double wall_s = 0.0;
};

struct ConvergenceTrace {
  // run metadata
  std::string matrix_name;
  int n = 0;
  int m = 0;
  std::string variant;
  std::string precond;
  std::uint64_t seed = 0;
  double tol = 0.0;
  int max_iters = 0;
  double bf_trunc_tol = 0.0;
  bool omega_available = false;
  std::string termination;  // converged | maxit | step-failure
  int failure_iter = -1;
  std::string failure_what;
  long total_matvecs = 0;

  std::vector<TraceRow> rows;
};

// CSV with a '#'-prefixed JSON metadata line, then a fixed, versioned column
// set: iter,omega,matvec,rel_res_1..m,a_err_1..m,warn,wall_s. All payload
// columns are deterministic for a given seed; wall_s is not.
void write_trace_csv(const std::string& path, const ConvergenceTrace& trace);

struct TraceSummary {
  std::string variant;
  int m = 0;
  int iters = 0;
  long matvecs = 0;
  double final_omega = 0.0;
  double best_omega = 0.0;
  double final_max_rel_res = 0.0;
  std::string termination;
  // first iteration with omega <= threshold (max_iters+1 when never reached)
  std::map<double, int> iters_to_omega;

  bool operator==(const TraceSummary&) const = default;
};

// Tabulates final/best attainable omega, iterations to thresholds, and
// matvec totals for a set of runs.
std::vector<TraceSummary> compare_traces(const std::vector<ConvergenceTrace>& traces);
std::string format_summary_table(const std::vector<TraceSummary>& rows);

}  // namespace blockcg
