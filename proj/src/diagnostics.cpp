#include "anchored/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "anchored/errors.hpp"

namespace anchored {

namespace {

double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

double record_metric(const TrajectoryRecord& rec, const std::string& name) {
  if (name == "fgap") return rec.fgap;
  if (name == "gradnorm") return rec.gradnorm;
  if (name == "dist_xstar") return rec.dist_xstar;
  if (name == "step_disp") return rec.step_disp;
  if (name == "residual") return rec.residual;
  if (name == "noise_term") return rec.noise_term;
  if (name == "noise_cumsum") return rec.noise_cumsum;
  throw std::invalid_argument("unknown metric name: " + name);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Sample mean and standard error. A degenerate sample (all values bitwise
// equal) is reported exactly, so zero-noise Monte Carlo collapses to the
// deterministic trajectory with zero error. Any NaN makes both NaN.
MeanSe mean_se(const std::vector<double>& values) {
  const size_t k = values.size();
  bool all_equal = true;
  for (double v : values) {
    if (std::isnan(v)) return {quiet_nan(), quiet_nan()};
    if (v != values.front()) all_equal = false;
  }
  if (all_equal) return {values.front(), 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(k);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(k - 1);
  return {mean, std::sqrt(var / static_cast<double>(k))};
}

// Config-coherent logs sorted by (seed, stream): folding order is fixed
// regardless of the order runs finished in.
std::vector<const TrajectoryLog*> sorted_coherent(
    const std::vector<TrajectoryLog>& logs, const char* who) {
  if (logs.empty()) {
    throw std::invalid_argument(std::string(who) + ": no logs");
  }
  std::vector<const TrajectoryLog*> out;
  out.reserve(logs.size());
  for (const auto& log : logs) out.push_back(&log);
  std::sort(out.begin(), out.end(),
            [](const TrajectoryLog* a, const TrajectoryLog* b) {
              if (a->seed != b->seed) return a->seed < b->seed;
              return a->stream < b->stream;
            });
  const TrajectoryLog& ref = *out.front();
  std::set<std::pair<std::uint64_t, std::uint64_t>> ids;
  for (const TrajectoryLog* log : out) {
    if (log->method != ref.method || log->problem_id != ref.problem_id ||
        log->schedule != ref.schedule || log->noise != ref.noise ||
        log->horizon != ref.horizon) {
      throw std::invalid_argument(std::string(who) +
                                  ": logs disagree on the run configuration");
    }
    if (log->records.size() != ref.records.size()) {
      throw std::invalid_argument(std::string(who) +
                                  ": logs have mismatched grids");
    }
    for (size_t i = 0; i < ref.records.size(); ++i) {
      if (log->records[i].n != ref.records[i].n) {
        throw std::invalid_argument(std::string(who) +
                                    ": logs have mismatched grids");
      }
    }
    if (!ids.insert({log->seed, log->stream}).second) {
      throw std::invalid_argument(std::string(who) +
                                  ": duplicate (seed, stream) pair");
    }
  }
  return out;
}

}  // namespace

RateEstimate fit_rate(const TrajectoryLog& log, const std::string& metric,
                      long n_min, long n_max) {
  if (n_min > n_max) {
    throw std::invalid_argument("fit_rate: empty window");
  }
  // Geometric subsample: next selected index grows by at least 10%.
  std::vector<double> xs, ys;
  long target = std::max(n_min, 1L);
  for (const TrajectoryRecord& rec : log.records) {
    if (rec.n < target || rec.n > n_max) continue;
    const double value = record_metric(rec, metric);
    if (!(value > 0.0)) {
      throw std::invalid_argument(
          "fit_rate: metric " + metric + " is not positive at n = " +
          std::to_string(rec.n) + "; shrink the window to the positive range");
    }
    xs.push_back(std::log(static_cast<double>(rec.n)));
    ys.push_back(std::log(value));
    target = std::max(rec.n + 1,
                      static_cast<long>(std::ceil(1.1 * static_cast<double>(rec.n))));
  }
  const long count = static_cast<long>(xs.size());
  if (count < 20) {
    throw std::invalid_argument(
        "fit_rate: window holds " + std::to_string(count) +
        " usable points, need at least 20");
  }
  double sx = 0.0, sy = 0.0;
  for (long i = 0; i < count; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / count, my = sy / count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (long i = 0; i < count; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateEstimate est;
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  double ss_res = 0.0;
  for (long i = 0; i < count; ++i) {
    const double r = ys[i] - (est.intercept + est.slope * xs[i]);
    ss_res += r * r;
  }
  est.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  est.window_lo = n_min;
  est.window_hi = n_max;
  est.points = count;
  return est;
}

McSummary mc_aggregate(const std::vector<TrajectoryLog>& logs) {
  if (logs.size() < 8) {
    throw PreconditionViolation("mc_aggregate: need at least 8 seeds");
  }
  const auto sorted = sorted_coherent(logs, "mc_aggregate");
  const TrajectoryLog& ref = *sorted.front();
  const size_t rows = ref.records.size();
  const size_t k = sorted.size();

  McSummary out;
  out.method = ref.method;
  out.problem_id = ref.problem_id;
  out.schedule = ref.schedule;
  out.noise = ref.noise;
  out.horizon = ref.horizon;
  out.num_seeds = static_cast<int>(k);
  out.n.reserve(rows);

  auto fill = [&](MetricStat& stat, auto&& extract) {
    stat.mean.resize(rows);
    stat.se.resize(rows);
    std::vector<double> values(k);
    for (size_t i = 0; i < rows; ++i) {
      for (size_t j = 0; j < k; ++j) {
        values[j] = extract(sorted[j]->records[i]);
      }
      const MeanSe ms = mean_se(values);
      stat.mean[i] = ms.mean;
      stat.se[i] = ms.se;
    }
  };

  for (size_t i = 0; i < rows; ++i) out.n.push_back(ref.records[i].n);
  fill(out.fgap, [](const TrajectoryRecord& r) { return r.fgap; });
  fill(out.gradnorm, [](const TrajectoryRecord& r) { return r.gradnorm; });
  fill(out.dist_xstar,
       [](const TrajectoryRecord& r) { return r.dist_xstar; });
  fill(out.ahat,
       [](const TrajectoryRecord& r) { return r.dist_xstar * r.dist_xstar; });
  fill(out.step_disp, [](const TrajectoryRecord& r) { return r.step_disp; });
  fill(out.residual, [](const TrajectoryRecord& r) { return r.residual; });
  fill(out.noise_term, [](const TrajectoryRecord& r) { return r.noise_term; });
  fill(out.noise_cumsum,
       [](const TrajectoryRecord& r) { return r.noise_cumsum; });
  return out;
}

LemmaAuditReport audit_lemma_recursion(const std::vector<TrajectoryLog>& logs,
                                       const Problem& problem,
                                       const Schedule& schedule,
                                       const NoiseModel& noise) {
  const auto sorted = sorted_coherent(logs, "audit_lemma_recursion");
  const TrajectoryLog& ref = *sorted.front();
  if (!ref.xstar.has_value()) {
    throw std::invalid_argument(
        "audit_lemma_recursion: runs lack a projectable solution set");
  }
  const double dist_sq = (ref.anchor - *ref.xstar).squaredNorm();
  const double lips = problem.lipschitz;
  const double sigma = noise.sigma;

  LemmaAuditReport report;
  report.num_seeds = static_cast<int>(sorted.size());
  report.dist_u_xstar_sq = dist_sq;

  auto geometric = [](long n) {
    return n <= 8 || (n > 0 && (n & (n - 1)) == 0) || n >= 1000;
  };

  std::vector<double> z(sorted.size());
  for (size_t i = 0; i + 1 < ref.records.size(); ++i) {
    const long n = ref.records[i].n;
    if (ref.records[i + 1].n != n + 1 || !geometric(n)) continue;
    const double eps = eps_at(schedule, n);
    const double gamma = alpha_at(schedule, n) - eps * eps * lips * lips;
    for (size_t j = 0; j < sorted.size(); ++j) {
      const double d0 = sorted[j]->records[i].dist_xstar;
      const double d1 = sorted[j]->records[i + 1].dist_xstar;
      if (std::isnan(d0) || std::isnan(d1)) {
        throw std::invalid_argument(
            "audit_lemma_recursion: distance metric unavailable");
      }
      z[j] = d1 * d1 - (1.0 - gamma) * d0 * d0;
    }
    const MeanSe ms = mean_se(z);

    LemmaAuditRow row;
    row.n = n;
    row.gamma = gamma;
    row.mean_increment = ms.mean;
    row.se = ms.se;
    row.bound = gamma * dist_sq + eps * eps * (sigma * sigma + lips * lips * dist_sq);
    row.gamma_nonpositive = gamma <= 0.0;
    row.violated =
        !row.gamma_nonpositive && ms.mean > row.bound + 3.0 * ms.se;
    if (row.gamma_nonpositive) report.gamma_nonpositive_indices.push_back(n);
    if (row.violated) report.any_violation = true;
    report.rows.push_back(row);
  }
  return report;
}

InequalityAuditReport audit_inequalities(const TrajectoryLog& log,
                                         const Problem& problem) {
  if (log.iterates.empty()) {
    throw PreconditionViolation(
        "audit_inequalities: run was not captured (enable capture_iterates)");
  }
  if (!problem.convex) {
    throw std::invalid_argument("audit_inequalities: problem is not convex");
  }
  if (!problem.optimal_value.has_value()) {
    throw std::invalid_argument(
        "audit_inequalities: optimal value unknown");
  }
  if (!log.xstar.has_value()) {
    throw std::invalid_argument(
        "audit_inequalities: run lacks a projectable solution set");
  }
  const double lips = problem.lipschitz;
  const double fstar = *problem.optimal_value;
  const Eigen::VectorXd& xs = *log.xstar;

  InequalityAuditReport report;
  report.tolerance = 1e-9;
  double worst_value = -std::numeric_limits<double>::infinity();
  double worst_angle = -std::numeric_limits<double>::infinity();
  double worst_coco = -std::numeric_limits<double>::infinity();

  Eigen::VectorXd prev_x, prev_g;
  bool have_prev = false;
  for (const auto& [n, x] : log.iterates) {
    (void)n;
    const Eigen::VectorXd g = eval_grad(problem, x);
    const double gn2 = g.squaredNorm();
    if (lips > 0.0) {
      const double lhs = gn2 / (2.0 * lips);
      const double rhs = eval_value(problem, x) - fstar;
      const double scale_v = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      worst_value = std::max(worst_value, (lhs - rhs) / scale_v);

      const double need = gn2 / lips;
      const double inner = g.dot(x - xs);
      const double scale_a = std::max({1.0, std::abs(need), std::abs(inner)});
      worst_angle = std::max(worst_angle, (need - inner) / scale_a);

      if (have_prev) {
        const Eigen::VectorXd dg = g - prev_g;
        const double need_c = dg.squaredNorm() / lips;
        const double inner_c = dg.dot(x - prev_x);
        const double scale_c =
            std::max({1.0, std::abs(need_c), std::abs(inner_c)});
        worst_coco = std::max(worst_coco, (need_c - inner_c) / scale_c);
      }
    }
    prev_x = x;
    prev_g = g;
    have_prev = true;
    ++report.points;
  }
  if (std::isinf(worst_value)) worst_value = 0.0;
  if (std::isinf(worst_angle)) worst_angle = 0.0;
  if (std::isinf(worst_coco)) worst_coco = 0.0;
  report.max_value_bound_gap = worst_value;
  report.max_solution_angle_gap = worst_angle;
  report.max_cocoercivity_gap = worst_coco;
  report.ok = worst_value <= report.tolerance &&
              worst_angle <= report.tolerance &&
              worst_coco <= report.tolerance;
  return report;
}

SummabilityReport summability_report(const TrajectoryLog& log) {
  if (log.records.empty()) {
    throw std::invalid_argument("summability_report: empty log");
  }
  SummabilityReport report;
  report.total = log.records.back().noise_cumsum;

  try {
    report.per_term_slope = fit_rate(log, "noise_term", 100, log.horizon - 1);
  } catch (const std::invalid_argument&) {
    report.per_term_slope = std::nullopt;
  }

  report.last_decade_fraction = quiet_nan();
  if (report.total > 0.0) {
    const long decade = log.horizon / 10;
    const TrajectoryRecord* at = nullptr;
    for (const auto& rec : log.records) {
      if (rec.n <= decade) at = &rec;
    }
    if (at != nullptr && at->n < log.horizon) {
      report.last_decade_fraction =
          (report.total - at->noise_cumsum) / report.total;
    }
  }
  return report;
}

std::string LemmaAuditReport::to_text() const {
  std::ostringstream os;
  os << "one-step recursion audit: " << num_seeds << " seeds, |u - x*|^2 = "
     << dist_u_xstar_sq << "\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf),
                  "  n=%-8ld gamma=% .3e mean=% .3e bound=% .3e se=%.3e %s\n",
                  row.n, row.gamma, row.mean_increment, row.bound, row.se,
                  row.gamma_nonpositive ? "GAMMA<=0"
                                        : (row.violated ? "VIOLATED" : "ok"));
    os << buf;
  }
  os << "  verdict: "
     << (any_violation ? "VIOLATIONS FOUND" : "no violations") << "\n";
  return os.str();
}

std::string InequalityAuditReport::to_text() const {
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "smooth-convex inequality audit: %ld points\n"
                "  gradient-norm value bound: worst gap %.3e\n"
                "  gradient/solution angle:   worst gap %.3e\n"
                "  pairwise cocoercivity:     worst gap %.3e\n"
                "  tolerance %.1e: %s\n",
                points, max_value_bound_gap, max_solution_angle_gap,
                max_cocoercivity_gap, tolerance, ok ? "ok" : "VIOLATED");
  return buf;
}

std::string SummabilityReport::to_text() const {
  std::ostringstream os;
  os << "noise-energy summability: total = " << total << "\n";
  if (per_term_slope) {
    os << "  per-term slope = " << per_term_slope->slope
       << " (r^2 = " << per_term_slope->r_squared << ", n in ["
       << per_term_slope->window_lo << ", " << per_term_slope->window_hi
       << "])\n";
  } else {
    os << "  per-term slope unavailable (zero or short run)\n";
  }
  os << "  last-decade fraction = " << last_decade_fraction << "\n";
  return os.str();
}

}  // namespace anchored
