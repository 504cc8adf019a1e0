#include "anchored/runner.hpp"

#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "anchored/csv.hpp"
#include "anchored/diagnostics.hpp"
#include "anchored/errors.hpp"
#include "anchored/optimizers.hpp"
#include "anchored/rng.hpp"

namespace anchored {

namespace {

using nlohmann::json;

// Reserved substream index for the sphere draw; run noise starts from the
// base stream, so the two never overlap.
constexpr std::uint64_t kX0Substream = 0xffffffffULL;

json check_json(const ConditionCheck& check) {
  return json{{"ok", check.ok}, {"reason", check.reason}};
}

json optional_long(const std::optional<long>& v) {
  return v ? json(*v) : json(nullptr);
}

json rate_json(const RateEstimate& est) {
  return json{{"slope", est.slope},
              {"intercept", est.intercept},
              {"r_squared", est.r_squared},
              {"window", {est.window_lo, est.window_hi}},
              {"points", est.points}};
}

json stat_json(double mean, double se) {
  json j;
  j["mean"] = std::isnan(mean) ? json(nullptr) : json(mean);
  j["se"] = std::isnan(se) ? json(nullptr) : json(se);
  return j;
}

json finite_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("runner: cannot open for writing: " +
                             path.string());
  }
  os << text;
  if (!os) throw std::runtime_error("runner: write failed: " + path.string());
}

}  // namespace

Eigen::VectorXd default_x0(const Eigen::VectorXd& u, double radius,
                           std::uint64_t master_seed, std::uint64_t stream) {
  RngStream rng = RngStream(master_seed, stream).substream(kX0Substream);
  const Eigen::Index d = u.size();
  Eigen::VectorXd z(d);
  double norm = 0.0;
  do {
    z = rng.gaussian_vector(d);
    norm = z.norm();
  } while (!(norm > 0.0));
  return u + (radius / norm) * z;
}

MultiRunResult run_many(const ResolvedRun& r, ExecutionPolicy policy,
                        int workers, bool capture) {
  const bool operator_mode = method_is_operator(r.method);
  if (operator_mode && !r.op) {
    throw ConfigError("config: [operator]: section required for method " +
                      std::string(method_name(r.method)));
  }
  if (!operator_mode && !r.problem) {
    throw ConfigError("config: [problem]: section required for method " +
                      std::string(method_name(r.method)));
  }
  if (r.u.size() == 0) throw ConfigError("config: [anchor].u: missing");

  // Gate once, before any seed starts.
  if (method_is_stochastic(r.method)) {
    require_schedule_admissible(r.schedule, r.noise, r.lipschitz(),
                                r.override_schedule);
  }

  const long count = static_cast<long>(r.stream_ids.size());
  std::vector<std::optional<TrajectoryLog>> slots(count);
  std::vector<std::optional<long>> divergences(count);
  std::vector<std::exception_ptr> errors(count);

  const bool parallel = policy == ExecutionPolicy::OpenMP && workers > 1;
  (void)parallel;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers > 0 ? workers : 1) if (parallel)
#endif
  for (long i = 0; i < count; ++i) {
    try {
      const std::uint64_t stream = r.stream_ids[static_cast<size_t>(i)];
      RunSpec spec = r.base_run_spec();
      spec.capture_iterates = capture;
      spec.x0 = r.x0 ? *r.x0
                     : default_x0(r.u, r.x0_radius, r.master_seed, stream);
      RngStream rng(r.master_seed, stream);
      slots[static_cast<size_t>(i)] =
          operator_mode ? run(*r.op, spec, rng) : run(*r.problem, spec, rng);
    } catch (const DivergenceError& e) {
      divergences[static_cast<size_t>(i)] = e.iteration();
    } catch (...) {
      errors[static_cast<size_t>(i)] = std::current_exception();
    }
  }

  for (long i = 0; i < count; ++i) {
    if (errors[static_cast<size_t>(i)]) {
      std::rethrow_exception(errors[static_cast<size_t>(i)]);
    }
  }

  MultiRunResult result;
  for (long i = 0; i < count; ++i) {
    if (slots[static_cast<size_t>(i)]) {
      result.logs.push_back(std::move(*slots[static_cast<size_t>(i)]));
    } else if (!result.diverged) {
      result.diverged = {r.stream_ids[static_cast<size_t>(i)],
                         *divergences[static_cast<size_t>(i)]};
    }
  }
  return result;
}

std::string run_summary_json(const ResolvedRun& r, const RawConfig& raw,
                             const MultiRunResult& result) {
  json j;
  j["digest"] = raw.digest();
  j["method"] = method_name(r.method);
  if (method_is_operator(r.method)) {
    j["operator"] = r.op->id;
  } else {
    j["problem"] = r.problem->id;
  }
  j["schedule"] = describe(r.schedule);
  j["noise"] = describe(r.noise);
  j["horizon"] = r.horizon;
  j["streams"] = r.stream_ids;
  j["num_seeds_requested"] = r.stream_ids.size();
  j["num_seeds_completed"] = result.logs.size();

  if (result.diverged) {
    j["diverged"] = json{{"stream", result.diverged->first},
                         {"iteration", result.diverged->second}};
  } else {
    j["diverged"] = nullptr;
  }

  if (const auto* power = std::get_if<PowerLawSchedule>(&r.schedule)) {
    const ScheduleReport report = validate(*power, r.lipschitz());
    json conditions;
    conditions["alpha_in_01"] = check_json(report.alpha_in_01);
    conditions["alpha_to_zero"] = check_json(report.alpha_to_zero);
    conditions["sum_alpha_div"] = check_json(report.sum_alpha_div);
    conditions["sum_alpha_sq_conv"] = check_json(report.sum_alpha_sq_conv);
    conditions["eps_to_zero"] = check_json(report.eps_to_zero);
    conditions["sum_eps_div"] = check_json(report.sum_eps_div);
    conditions["sum_eps_sq_conv"] = check_json(report.sum_eps_sq_conv);
    conditions["ratio_eps_alpha_div"] = check_json(report.ratio_eps_alpha_div);
    conditions["sum_alpha_eps_conv"] = check_json(report.sum_alpha_eps_conv);
    conditions["remark_ratio_div"] = check_json(report.remark_ratio_div);
    conditions["coupling_all_n"] = check_json(report.coupling_all_n);
    j["schedule_report"] =
        json{{"verdict", report.verdict},
             {"lipschitz", report.lipschitz},
             {"conditions", conditions},
             {"coupling_first_violation",
              optional_long(report.coupling_first_violation)},
             {"coupling_holds_from", optional_long(report.coupling_holds_from)},
             {"eps_below_inv_l_from",
              optional_long(report.eps_below_inv_l_from)}};
  }

  json finals = json::array();
  for (const auto& log : result.logs) {
    const TrajectoryRecord& rec = log.records.back();
    json f;
    f["stream"] = log.stream;
    f["n"] = rec.n;
    f["fgap"] = finite_or_null(rec.fgap);
    f["gradnorm"] = finite_or_null(rec.gradnorm);
    f["dist_xstar"] = finite_or_null(rec.dist_xstar);
    f["residual"] = finite_or_null(rec.residual);
    f["noise_cumsum"] = finite_or_null(rec.noise_cumsum);
    finals.push_back(f);
  }
  j["final_per_seed"] = finals;

  if (result.logs.size() >= 8) {
    const McSummary mc = mc_aggregate(result.logs);
    const size_t last = mc.n.size() - 1;
    j["mc_final"] =
        json{{"n", mc.n[last]},
             {"fgap", stat_json(mc.fgap.mean[last], mc.fgap.se[last])},
             {"gradnorm",
              stat_json(mc.gradnorm.mean[last], mc.gradnorm.se[last])},
             {"dist_xstar",
              stat_json(mc.dist_xstar.mean[last], mc.dist_xstar.se[last])},
             {"ahat", stat_json(mc.ahat.mean[last], mc.ahat.se[last])},
             {"residual",
              stat_json(mc.residual.mean[last], mc.residual.se[last])},
             {"noise_cumsum", stat_json(mc.noise_cumsum.mean[last],
                                        mc.noise_cumsum.se[last])}};
  }

  if (!result.logs.empty()) {
    const TrajectoryLog& first = result.logs.front();
    const long lo = std::max(10L, r.horizon / 10);
    json rates;
    for (const char* metric :
         {"fgap", "gradnorm", "dist_xstar", "residual"}) {
      try {
        rates[metric] = rate_json(fit_rate(first, metric, lo, r.horizon));
      } catch (const std::invalid_argument&) {
        rates[metric] = nullptr;
      }
    }
    j["rates"] = rates;

    if (method_is_stochastic(r.method)) {
      const SummabilityReport sums = summability_report(first);
      json s;
      s["total"] = sums.total;
      s["per_term_slope"] =
          sums.per_term_slope ? rate_json(*sums.per_term_slope)
                              : json(nullptr);
      s["last_decade_fraction"] = finite_or_null(sums.last_decade_fraction);
      j["summability"] = s;
    }

    if (method_is_stochastic(r.method) && result.logs.size() >= 8 &&
        first.xstar.has_value() && r.problem) {
      const LemmaAuditReport audit = audit_lemma_recursion(
          result.logs, *r.problem, r.schedule, r.noise);
      json rows = json::array();
      for (const auto& row : audit.rows) {
        rows.push_back(json{{"n", row.n},
                            {"gamma", finite_or_null(row.gamma)},
                            {"mean_increment",
                             finite_or_null(row.mean_increment)},
                            {"bound", finite_or_null(row.bound)},
                            {"se", finite_or_null(row.se)},
                            {"gamma_nonpositive", row.gamma_nonpositive},
                            {"violated", row.violated}});
      }
      j["lemma_audit"] =
          json{{"num_seeds", audit.num_seeds},
               {"dist_u_xstar_sq", audit.dist_u_xstar_sq},
               {"any_violation", audit.any_violation},
               {"gamma_nonpositive_indices", audit.gamma_nonpositive_indices},
               {"rows", rows}};
    }
  }

  j["config"] = raw.canonical();
  return j.dump(2) + "\n";
}

std::string emit_run_outputs(const ResolvedRun& r, const RawConfig& raw,
                             const MultiRunResult& result, double wall_seconds,
                             ExecutionPolicy policy, int workers) {
  const std::filesystem::path out(r.out_dir);
  std::filesystem::create_directories(out);

  for (const auto& log : result.logs) {
    write_trajectory_csv_file(
        (out / ("traj_s" + std::to_string(log.stream) + ".csv")).string(),
        log);
  }

  const std::string summary = run_summary_json(r, raw, result);
  write_text_file(out / "summary.json", summary);

  char stamp[32] = "unknown";
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  if (gmtime_r(&now, &tm_utc) != nullptr) {
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  }
  json meta;
  meta["created_utc"] = stamp;
  meta["wall_clock_seconds"] = wall_seconds;
  meta["policy"] =
      policy == ExecutionPolicy::OpenMP ? "openmp" : "serial";
  meta["workers"] = workers;
  write_text_file(out / "run_meta.json", meta.dump(2) + "\n");

  return summary;
}

}  // namespace anchored
