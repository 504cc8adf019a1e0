#pragma once

// Trajectory analysis: log-log rate fits, Monte-Carlo aggregation across
// seeds, and machine checks of the inequalities the convergence argument
// rests on. Expectation-level statements are audited with 3-standard-error
// slack computed from the seed sample; degenerate (all-equal) samples get
// exact mean and zero standard error so deterministic runs are checked
// exactly.

#include <optional>
#include <string>
#include <vector>

#include "anchored/noise.hpp"
#include "anchored/problems.hpp"
#include "anchored/schedules.hpp"
#include "anchored/trajectory.hpp"

namespace anchored {

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;  // natural log of the fitted constant
  double r_squared = 0.0;
  long window_lo = 0;
  long window_hi = 0;
  long points = 0;
};

// OLS fit of log(metric) against log(n) over records with n in
// [n_min, n_max], geometrically subsampled (ratio about 1.1) so dense
// early logging does not dominate the fit. metric is one of: fgap,
// gradnorm, dist_xstar, step_disp, residual, noise_term. Indices n <= 0
// are skipped. Throws invalid_argument when fewer than 20 subsampled
// points remain or any selected value is not positive (shrink the window
// to the positive range in that case).
RateEstimate fit_rate(const TrajectoryLog& log, const std::string& metric,
                      long n_min, long n_max);

struct MetricStat {
  std::vector<double> mean;
  std::vector<double> se;
};

// Per-index means and standard errors across seeds. ahat is the mean of
// dist_xstar squared, the Monte-Carlo estimate of E|x_n - x*|^2.
struct McSummary {
  std::string method;
  std::string problem_id;
  std::string schedule;
  std::string noise;
  long horizon = 0;
  int num_seeds = 0;
  std::vector<long> n;
  MetricStat fgap, gradnorm, dist_xstar, ahat, step_disp, residual,
      noise_term, noise_cumsum;
};

// Folds logs in (seed, stream) order, so the result is independent of the
// order the runs finished in. Requires >= 8 logs (PreconditionViolation)
// agreeing on method, problem, schedule, noise, and horizon with pairwise
// distinct streams (invalid_argument otherwise).
McSummary mc_aggregate(const std::vector<TrajectoryLog>& logs);

struct LemmaAuditRow {
  long n = 0;
  double gamma = 0.0;       // alpha_n - eps_n^2 L^2
  double mean_increment = 0.0;  // mean of d_{n+1}^2 - (1 - gamma) d_n^2
  double bound = 0.0;       // gamma |u-x*|^2 + eps_n^2 (sigma^2 + L^2 |u-x*|^2)
  double se = 0.0;          // standard error of the increment mean
  bool gamma_nonpositive = false;
  bool violated = false;    // mean_increment > bound + 3 se
};

struct LemmaAuditReport {
  int num_seeds = 0;
  double dist_u_xstar_sq = 0.0;
  std::vector<LemmaAuditRow> rows;
  std::vector<long> gamma_nonpositive_indices;
  bool any_violation = false;
  std::string to_text() const;
};

// Audits the one-step recursion bound on E|x_n - x*|^2 across seeds, on a
// geometric set of indices whose successor is also logged. Rows with
// gamma_n <= 0 are flagged (the bound is vacuous there) and excluded from
// the violation verdict. sigma is taken from the noise model as declared.
LemmaAuditReport audit_lemma_recursion(const std::vector<TrajectoryLog>& logs,
                                       const Problem& problem,
                                       const Schedule& schedule,
                                       const NoiseModel& noise);

struct InequalityAuditReport {
  long points = 0;
  // Normalized violation magnitudes: positive values mean the inequality
  // failed by that relative amount; ok means all are within tolerance.
  double max_value_bound_gap = 0.0;      // (1/2L)|g|^2 <= f - f*
  double max_solution_angle_gap = 0.0;   // <g, x - x*> >= (1/L)|g|^2
  double max_cocoercivity_gap = 0.0;     // consecutive-pair cocoercivity
  double tolerance = 0.0;
  bool ok = false;
  std::string to_text() const;
};

// Evaluates the smooth-convex inequalities at the captured iterates of a
// run (RunSpec.capture_iterates). Needs a convex problem with known
// optimal value and a projectable solution set; the reference point x*
// is the log's recorded projection of the anchor.
InequalityAuditReport audit_inequalities(const TrajectoryLog& log,
                                         const Problem& problem);

struct SummabilityReport {
  double total = 0.0;  // final running sum of eps_n^2 |U_n|^2
  // Fitted slope of the per-term energy; absent when the run is too short
  // or the terms vanish (zero noise).
  std::optional<RateEstimate> per_term_slope;
  // Share of the total accumulated after horizon / 10; small values mean
  // the sum has converged. NaN when the total is zero or the run is short.
  double last_decade_fraction = 0.0;
  std::string to_text() const;
};

SummabilityReport summability_report(const TrajectoryLog& log);

}  // namespace anchored
