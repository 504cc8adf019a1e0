#include "anchored/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <doctest.h>

#include "anchored/errors.hpp"
#include "anchored/optimizers.hpp"

using anchored::AlphaRule;
using anchored::ConstantStepSchedule;
using anchored::McSummary;
using anchored::Method;
using anchored::NoiseModel;
using anchored::PowerLawSchedule;
using anchored::Problem;
using anchored::RngStream;
using anchored::RunSpec;
using anchored::Schedule;
using anchored::TrajectoryLog;
using anchored::TrajectoryRecord;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Log whose every metric equals f(n) on the standard grid.
TrajectoryLog synthetic_log(long horizon, const std::function<double(long)>& f) {
  TrajectoryLog log;
  log.method = "synthetic";
  log.problem_id = "synthetic";
  log.schedule = "synthetic";
  log.noise = "synthetic";
  log.horizon = horizon;
  double cumsum = 0.0;
  for (long n : anchored::log_grid(horizon)) {
    TrajectoryRecord rec;
    rec.n = n;
    rec.fgap = rec.gradnorm = rec.dist_xstar = f(n);
    rec.step_disp = rec.residual = rec.noise_term = f(n);
    cumsum += f(n);
    rec.noise_cumsum = cumsum;
    log.records.push_back(rec);
  }
  return log;
}

// Minimal config-coherent log for aggregation tests: three records at
// n = 0, 1, 2 with seed-dependent values.
TrajectoryLog tiny_log(std::uint64_t seed, double dist, double fgap) {
  TrajectoryLog log;
  log.method = "sgd";
  log.problem_id = "p";
  log.schedule = "s";
  log.noise = "g";
  log.seed = seed;
  log.stream = seed;
  log.horizon = 2;
  for (long n = 0; n <= 2; ++n) {
    TrajectoryRecord rec;
    rec.n = n;
    rec.dist_xstar = dist;
    rec.fgap = fgap;
    rec.gradnorm = 1.0;
    rec.step_disp = n == 2 ? kNan : 0.5;
    rec.residual = kNan;
    rec.noise_term = n == 2 ? kNan : 0.25;
    rec.noise_cumsum = n == 2 ? 0.5 : 0.25 * (n + 1);
    log.records.push_back(rec);
  }
  return log;
}

Problem half_sq_all(Eigen::Index d) {  // f = 0.5 |x|^2, S = {0}
  return anchored::make_quadratic(MatrixXd::Identity(d, d), VectorXd::Zero(d));
}

std::vector<TrajectoryLog> run_seeds(const Problem& problem, RunSpec spec,
                                     std::uint64_t seed, int count) {
  std::vector<TrajectoryLog> logs;
  for (int i = 0; i < count; ++i) {
    logs.push_back(anchored::run(problem, spec, RngStream(seed, i)));
  }
  return logs;
}

}  // namespace

TEST_CASE("diagnostics: rate fit recovers exact power laws") {
  const long horizon = 20000;
  auto log1 = synthetic_log(horizon, [](long n) {
    return n == 0 ? 1.0 : 1.0 / static_cast<double>(n);
  });
  auto est1 = anchored::fit_rate(log1, "residual", 10, 1000);
  CHECK(est1.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(est1.r_squared >= 1.0 - 1e-12);
  CHECK(est1.points >= 20);
  CHECK(est1.window_lo == 10);
  CHECK(est1.window_hi == 1000);

  auto log2 = synthetic_log(horizon, [](long n) {
    return 5.0 * std::pow(static_cast<double>(std::max(n, 1L)), -0.5);
  });
  auto est2 = anchored::fit_rate(log2, "dist_xstar", 10, 10000);
  CHECK(est2.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(est2.intercept == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("diagnostics: rate fit rejects bad windows and values") {
  auto log = synthetic_log(2000, [](long n) {
    return 1.0 / static_cast<double>(n + 1);
  });
  // Too few subsampled points.
  CHECK_THROWS_AS(anchored::fit_rate(log, "residual", 10, 15),
                  std::invalid_argument);
  // Empty and inverted windows.
  CHECK_THROWS_AS(anchored::fit_rate(log, "residual", 100, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(anchored::fit_rate(log, "residual", 1000000, 2000000),
                  std::invalid_argument);
  // Unknown metric name.
  CHECK_THROWS_AS(anchored::fit_rate(log, "entropy", 10, 1000),
                  std::invalid_argument);

  auto flat = synthetic_log(2000, [](long) { return -1.0; });
  CHECK_THROWS_AS(anchored::fit_rate(flat, "fgap", 10, 1000),
                  std::invalid_argument);
  auto zero = synthetic_log(2000, [](long) { return 0.0; });
  CHECK_THROWS_AS(anchored::fit_rate(zero, "noise_term", 10, 1000),
                  std::invalid_argument);
}

TEST_CASE("diagnostics: anchored operator run shows the 1/n residual rate") {
  auto rot = anchored::make_rotation(M_PI / 2.0);
  RunSpec spec;
  spec.method = Method::HalpernOperator;
  spec.schedule = Schedule{ConstantStepSchedule(1.0, AlphaRule::Classic)};
  spec.noise = NoiseModel::zero();
  spec.u = Vector2d(1.0, 0.0);
  spec.x0 = Vector2d(11.0, 0.0);
  spec.horizon = 100000;
  auto log = anchored::run(rot, spec, RngStream(1, 0));

  auto est = anchored::fit_rate(log, "residual", 100, 100000);
  CHECK(est.slope <= -0.9);
  CHECK(est.slope >= -1.05);
  CHECK(est.r_squared >= 0.99);
}

TEST_CASE("diagnostics: aggregation matches a hand-computed fold") {
  std::vector<TrajectoryLog> logs;
  for (int k = 0; k < 8; ++k) {
    logs.push_back(tiny_log(k, k + 1.0, 2.0 * (k + 1)));
  }
  McSummary summary = anchored::mc_aggregate(logs);

  CHECK(summary.num_seeds == 8);
  CHECK(summary.horizon == 2);
  CHECK(summary.n == std::vector<long>{0, 1, 2});
  // dist values 1..8: mean 4.5, sample variance 6, se sqrt(6/8).
  for (int i = 0; i < 3; ++i) {
    CHECK(summary.dist_xstar.mean[i] == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(summary.dist_xstar.se[i] ==
          doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
    CHECK(summary.fgap.mean[i] == doctest::Approx(9.0).epsilon(1e-15));
    // ahat folds the squares: mean of 1, 4, ..., 64.
    CHECK(summary.ahat.mean[i] == doctest::Approx(25.5).epsilon(1e-15));
  }
  // gradnorm identical across seeds: exact zero error.
  CHECK(summary.gradnorm.mean[0] == 1.0);
  CHECK(summary.gradnorm.se[0] == 0.0);
  // The final record has no outgoing step in any seed.
  CHECK(std::isnan(summary.step_disp.mean[2]));
  CHECK(std::isnan(summary.step_disp.se[2]));
  CHECK(summary.step_disp.mean[0] == 0.5);
  CHECK(summary.step_disp.se[0] == 0.0);
}

TEST_CASE("diagnostics: aggregation is invariant to log order") {
  std::vector<TrajectoryLog> shuffled, sorted;
  for (std::uint64_t s : {5, 3, 7, 1, 0, 6, 2, 4}) {
    shuffled.push_back(tiny_log(s, s + 1.0, 1.0));
  }
  for (std::uint64_t s = 0; s < 8; ++s) {
    sorted.push_back(tiny_log(s, s + 1.0, 1.0));
  }
  McSummary a = anchored::mc_aggregate(shuffled);
  McSummary b = anchored::mc_aggregate(sorted);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.dist_xstar.mean[i] == b.dist_xstar.mean[i]);
    CHECK(a.dist_xstar.se[i] == b.dist_xstar.se[i]);
    CHECK(a.ahat.mean[i] == b.ahat.mean[i]);
    CHECK(a.ahat.se[i] == b.ahat.se[i]);
  }
}

TEST_CASE("diagnostics: aggregation rejects malformed collections") {
  std::vector<TrajectoryLog> seven;
  for (int k = 0; k < 7; ++k) seven.push_back(tiny_log(k, 1.0, 1.0));
  CHECK_THROWS_AS(anchored::mc_aggregate(seven),
                  anchored::PreconditionViolation);

  std::vector<TrajectoryLog> mismatched;
  for (int k = 0; k < 8; ++k) mismatched.push_back(tiny_log(k, 1.0, 1.0));
  mismatched[3].horizon = 99;
  CHECK_THROWS_AS(anchored::mc_aggregate(mismatched), std::invalid_argument);

  std::vector<TrajectoryLog> renamed;
  for (int k = 0; k < 8; ++k) renamed.push_back(tiny_log(k, 1.0, 1.0));
  renamed[0].method = "gd";
  CHECK_THROWS_AS(anchored::mc_aggregate(renamed), std::invalid_argument);

  std::vector<TrajectoryLog> duplicated;
  for (int k = 0; k < 8; ++k) duplicated.push_back(tiny_log(k, 1.0, 1.0));
  duplicated[5].seed = 4;
  duplicated[5].stream = 4;
  CHECK_THROWS_AS(anchored::mc_aggregate(duplicated), std::invalid_argument);

  std::vector<TrajectoryLog> ragged;
  for (int k = 0; k < 8; ++k) ragged.push_back(tiny_log(k, 1.0, 1.0));
  ragged[2].records.pop_back();
  CHECK_THROWS_AS(anchored::mc_aggregate(ragged), std::invalid_argument);
}

TEST_CASE("diagnostics: zero-noise Monte Carlo collapses with exact zero se") {
  auto problem = half_sq_all(2);
  RunSpec spec;
  spec.method = Method::SGD;
  spec.schedule = Schedule{ConstantStepSchedule(0.5, AlphaRule::Zero)};
  spec.noise = NoiseModel::zero();
  spec.u = Vector2d(3.0, 4.0);
  spec.x0 = Vector2d(3.0, 4.0);
  spec.horizon = 64;
  auto logs = run_seeds(problem, spec, 42, 8);
  McSummary summary = anchored::mc_aggregate(logs);
  for (size_t i = 0; i < summary.n.size(); ++i) {
    CHECK(summary.dist_xstar.se[i] == 0.0);
    CHECK(summary.fgap.se[i] == 0.0);
    CHECK(summary.dist_xstar.mean[i] == logs[0].records[i].dist_xstar);
    CHECK(summary.ahat.mean[i] ==
          logs[0].records[i].dist_xstar * logs[0].records[i].dist_xstar);
  }
}

TEST_CASE("diagnostics: recursion audit accepts an exact anchored contraction") {
  // Constant objective: gradient 0, every point optimal, x* = u exactly, so
  // the one-step bound reduces to mean increment <= 0, met strictly by the
  // pull toward the anchor.
  auto flat = anchored::make_quadratic(MatrixXd::Zero(2, 2), VectorXd::Zero(2));
  PowerLawSchedule sched(1.0, 0.9, 1.0, 0.6, 2);
  auto noise = NoiseModel::zero();
  RunSpec spec;
  spec.method = Method::HalpernSGD;
  spec.schedule = Schedule{sched};
  spec.noise = noise;
  spec.u = Vector2d(2.0, -1.0);
  spec.x0 = Vector2d(10.0, 10.0);
  spec.horizon = 256;
  auto logs = run_seeds(flat, spec, 7, 8);

  auto report = anchored::audit_lemma_recursion(logs, flat, Schedule{sched},
                                                noise);
  CHECK(report.num_seeds == 8);
  CHECK(report.dist_u_xstar_sq == 0.0);
  CHECK(report.rows.size() > 5);
  CHECK(report.gamma_nonpositive_indices.empty());
  CHECK_FALSE(report.any_violation);
  for (const auto& row : report.rows) {
    CHECK(row.gamma > 0.0);
    CHECK(row.bound == 0.0);
    CHECK(row.mean_increment <= 0.0);
    CHECK(row.se == 0.0);
  }
  CHECK(report.to_text().find("no violations") != std::string::npos);
}

TEST_CASE("diagnostics: recursion audit holds on a valid stochastic run") {
  auto problem = half_sq_all(2);
  PowerLawSchedule sched(1.0, 0.9, 1.0, 0.6, 2);
  auto noise = NoiseModel::gaussian_iso(1.0);
  RunSpec spec;
  spec.method = Method::HalpernSGD;
  spec.schedule = Schedule{sched};
  spec.noise = noise;
  spec.u = Vector2d(3.0, 4.0);
  spec.x0 = Vector2d(-5.0, 2.0);
  spec.horizon = 4096;
  auto logs = run_seeds(problem, spec, 11, 16);

  auto report = anchored::audit_lemma_recursion(logs, problem, Schedule{sched},
                                                noise);
  CHECK(report.num_seeds == 16);
  CHECK(report.dist_u_xstar_sq == doctest::Approx(25.0));
  CHECK(report.gamma_nonpositive_indices.empty());
  CHECK_FALSE(report.any_violation);
  // Audited indices follow the documented pattern: small, powers of two,
  // then every logged pair past 1000.
  for (const auto& row : report.rows) {
    const bool small = row.n <= 8;
    const bool pow2 = row.n > 0 && (row.n & (row.n - 1)) == 0;
    CHECK((small || pow2 || row.n >= 1000));
  }
}

TEST_CASE("diagnostics: recursion audit flags vacuous rows of a bad schedule") {
  auto problem = half_sq_all(2);
  // eps_0 = 1.2 against L = 1: gamma < 0 for n = 0..3, positive after.
  PowerLawSchedule sched(0.9, 0.9, 1.2, 0.6, 1);
  auto noise = NoiseModel::gaussian_iso(0.5);
  RunSpec spec;
  spec.method = Method::HalpernSGD;
  spec.schedule = Schedule{sched};
  spec.noise = noise;
  spec.u = Vector2d(3.0, 4.0);
  spec.x0 = Vector2d(0.0, 0.0);
  spec.horizon = 64;
  spec.override_schedule = true;
  auto logs = run_seeds(problem, spec, 23, 8);

  auto report = anchored::audit_lemma_recursion(logs, problem, Schedule{sched},
                                                noise);
  CHECK(report.gamma_nonpositive_indices == std::vector<long>{0, 1, 2, 3});
  for (const auto& row : report.rows) {
    CHECK(row.gamma_nonpositive == (row.n <= 3));
    if (row.gamma_nonpositive) CHECK_FALSE(row.violated);
  }
  CHECK(report.to_text().find("GAMMA<=0") != std::string::npos);
}

TEST_CASE("diagnostics: recursion audit rejects unusable inputs") {
  CHECK_THROWS_AS(
      anchored::audit_lemma_recursion({}, half_sq_all(2),
                                      Schedule{PowerLawSchedule(1, 0.9, 1, 0.6, 2)},
                                      NoiseModel::zero()),
      std::invalid_argument);

  auto flat = anchored::make_quadratic(MatrixXd::Zero(2, 2), VectorXd::Zero(2));
  PowerLawSchedule sched(1.0, 0.9, 1.0, 0.6, 2);
  RunSpec spec;
  spec.method = Method::HalpernSGD;
  spec.schedule = Schedule{sched};
  spec.noise = NoiseModel::zero();
  spec.u = Vector2d(1.0, 1.0);
  spec.x0 = Vector2d(0.0, 0.0);
  spec.horizon = 16;
  auto logs = run_seeds(flat, spec, 3, 8);
  for (auto& log : logs) log.xstar.reset();
  CHECK_THROWS_AS(anchored::audit_lemma_recursion(logs, flat, Schedule{sched},
                                                  NoiseModel::zero()),
                  std::invalid_argument);
}

TEST_CASE("diagnostics: inequality audit passes a smooth convex run") {
  // Random PSD quadratic in R^5 with a strictly positive spectrum.
  RngStream rng(99, 0);
  MatrixXd b(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) b(i, j) = rng.normal();
  MatrixXd q = b.transpose() * b + MatrixXd::Identity(5, 5);
  VectorXd c = VectorXd::LinSpaced(5, -1.0, 1.0);
  auto problem = anchored::make_quadratic(q, c);

  RunSpec spec;
  spec.method = Method::GD;
  spec.schedule =
      Schedule{ConstantStepSchedule(1.0 / problem.lipschitz, AlphaRule::Zero)};
  spec.noise = NoiseModel::zero();
  spec.u = VectorXd::Zero(5);
  spec.x0 = VectorXd::Ones(5) * 3.0;
  spec.horizon = 300;
  spec.capture_iterates = true;
  auto log = anchored::run(problem, spec, RngStream(99, 1));

  auto report = anchored::audit_inequalities(log, problem);
  CHECK(report.ok);
  CHECK(report.points == static_cast<long>(log.records.size()));
  CHECK(report.max_value_bound_gap <= 1e-9);
  CHECK(report.max_solution_angle_gap <= 1e-9);
  CHECK(report.max_cocoercivity_gap <= 1e-9);
  CHECK(report.to_text().find("ok") != std::string::npos);
}

TEST_CASE("diagnostics: inequality audit sits at equality for 0.5|x|^2") {
  auto problem = half_sq_all(3);
  RunSpec spec;
  spec.method = Method::GD;
  spec.schedule = Schedule{ConstantStepSchedule(0.3, AlphaRule::Zero)};
  spec.noise = NoiseModel::zero();
  spec.u = VectorXd::Zero(3);
  spec.x0 = VectorXd::Ones(3);
  spec.horizon = 50;
  spec.capture_iterates = true;
  auto log = anchored::run(problem, spec, RngStream(5, 0));

  auto report = anchored::audit_inequalities(log, problem);
  CHECK(report.ok);
  // All three inequalities are tight for this objective.
  CHECK(std::abs(report.max_value_bound_gap) <= 1e-12);
  CHECK(std::abs(report.max_solution_angle_gap) <= 1e-12);
  CHECK(std::abs(report.max_cocoercivity_gap) <= 1e-12);
}

TEST_CASE("diagnostics: inequality audit rejects unusable runs") {
  auto problem = half_sq_all(2);
  RunSpec spec;
  spec.method = Method::GD;
  spec.schedule = Schedule{ConstantStepSchedule(0.5, AlphaRule::Zero)};
  spec.noise = NoiseModel::zero();
  spec.u = Vector2d(0.0, 0.0);
  spec.x0 = Vector2d(1.0, 2.0);
  spec.horizon = 10;
  auto uncaptured = anchored::run(problem, spec, RngStream(1, 0));
  CHECK_THROWS_AS(anchored::audit_inequalities(uncaptured, problem),
                  anchored::PreconditionViolation);

  spec.capture_iterates = true;
  auto log = anchored::run(problem, spec, RngStream(1, 0));

  auto rastrigin = anchored::make_rastrigin(2);
  CHECK_THROWS_AS(anchored::audit_inequalities(log, rastrigin),
                  std::invalid_argument);

  auto tampered = log;
  tampered.xstar.reset();
  CHECK_THROWS_AS(anchored::audit_inequalities(tampered, problem),
                  std::invalid_argument);

  // Convex but with no known optimal value.
  MatrixXd a(4, 2);
  a << 1, 0, 0, 1, 1, 1, -1, 1;
  VectorXd y(4);
  y << 1, -1, 1, -1;
  auto logistic = anchored::make_logistic(a, y);
  RunSpec lspec;
  lspec.method = Method::GD;
  lspec.schedule =
      Schedule{ConstantStepSchedule(1.0 / logistic.lipschitz, AlphaRule::Zero)};
  lspec.noise = NoiseModel::zero();
  lspec.u = Vector2d(0.0, 0.0);
  lspec.x0 = Vector2d(0.0, 0.0);
  lspec.horizon = 5;
  lspec.capture_iterates = true;
  auto llog = anchored::run(logistic, lspec, RngStream(1, 0));
  CHECK_THROWS_AS(anchored::audit_inequalities(llog, logistic),
                  std::invalid_argument);
}

TEST_CASE("diagnostics: summability of a noiseless run is trivial") {
  auto problem = half_sq_all(2);
  RunSpec spec;
  spec.method = Method::SGD;
  spec.schedule = Schedule{PowerLawSchedule(1.0, 0.9, 1.0, 0.6, 2)};
  spec.noise = NoiseModel::zero();
  spec.u = Vector2d(0.0, 0.0);
  spec.x0 = Vector2d(1.0, 2.0);
  spec.horizon = 2000;
  auto log = anchored::run(problem, spec, RngStream(2, 0));

  auto report = anchored::summability_report(log);
  CHECK(report.total == 0.0);
  CHECK_FALSE(report.per_term_slope.has_value());
  CHECK(std::isnan(report.last_decade_fraction));
  CHECK(report.to_text().find("unavailable") != std::string::npos);
}

TEST_CASE("diagnostics: sign-flip noise makes the energy sum exact") {
  auto problem = half_sq_all(4);
  PowerLawSchedule sched(1.0, 0.9, 1.0, 0.6, 2);
  RunSpec spec;
  spec.method = Method::SGD;
  spec.schedule = Schedule{sched};
  spec.noise = NoiseModel::rademacher(2.0);
  spec.u = VectorXd::Zero(4);
  spec.x0 = VectorXd::Ones(4);
  spec.horizon = 20000;
  auto log = anchored::run(problem, spec, RngStream(17, 0));

  auto report = anchored::summability_report(log);
  // Every term is eps_n^2 sigma^2 exactly; replay the running sum.
  double expected = 0.0;
  for (long k = 0; k < spec.horizon; ++k) {
    const double eps = sched.eps_at(k);
    expected += eps * eps * 4.0;
  }
  CHECK(report.total == doctest::Approx(expected).epsilon(1e-14));
  REQUIRE(report.per_term_slope.has_value());
  CHECK(report.per_term_slope->slope == doctest::Approx(-1.2).epsilon(0.02));
  CHECK(report.per_term_slope->r_squared >= 0.9999);
}

TEST_CASE("diagnostics: gaussian noise energy matches its expectation") {
  auto problem = half_sq_all(4);
  PowerLawSchedule sched(1.0, 0.9, 1.0, 0.6, 2);
  RunSpec spec;
  spec.method = Method::SGD;
  spec.schedule = Schedule{sched};
  spec.noise = NoiseModel::gaussian_iso(1.0);
  spec.u = VectorXd::Zero(4);
  spec.x0 = VectorXd::Ones(4);
  spec.horizon = 20000;
  auto logs = run_seeds(problem, spec, 31, 8);

  double eps_sq_sum = 0.0;
  for (long k = 0; k < spec.horizon; ++k) {
    const double eps = sched.eps_at(k);
    eps_sq_sum += eps * eps;
  }
  std::vector<double> totals;
  for (const auto& log : logs) {
    totals.push_back(anchored::summability_report(log).total);
  }
  double mean = 0.0;
  for (double t : totals) mean += t;
  mean /= totals.size();
  double var = 0.0;
  for (double t : totals) var += (t - mean) * (t - mean);
  var /= (totals.size() - 1);
  const double se = std::sqrt(var / totals.size());
  // E total = sigma^2 sum eps^2; the sample mean must sit within 4 se.
  CHECK(std::abs(mean - eps_sq_sum) <= 4.0 * se);

  auto report = anchored::summability_report(logs[0]);
  REQUIRE(report.per_term_slope.has_value());
  CHECK(report.per_term_slope->slope == doctest::Approx(-1.2).epsilon(0.15));
}

TEST_CASE("diagnostics: converged energy sums stop growing") {
  auto problem = half_sq_all(2);
  // q = 0.8 decays fast enough that the final decade adds under 1%.
  PowerLawSchedule sched(1.0, 0.9, 1.0, 0.8, 2);
  RunSpec spec;
  spec.method = Method::SGD;
  spec.schedule = Schedule{sched};
  spec.noise = NoiseModel::rademacher(2.0);
  spec.u = Vector2d(0.0, 0.0);
  spec.x0 = Vector2d(1.0, 1.0);
  spec.horizon = 40000;
  auto log = anchored::run(problem, spec, RngStream(13, 0));

  auto report = anchored::summability_report(log);
  CHECK(report.total > 0.0);
  CHECK(report.last_decade_fraction > 0.0);
  CHECK(report.last_decade_fraction <= 0.01);
}

TEST_CASE("diagnostics: mean step displacement decays on the tail") {
  auto problem = half_sq_all(4);
  RunSpec spec;
  spec.method = Method::SGD;
  spec.schedule = Schedule{PowerLawSchedule(1.0, 0.9, 1.0, 0.6, 2)};
  spec.noise = NoiseModel::gaussian_iso(1.0);
  spec.u = VectorXd::Zero(4);
  spec.x0 = VectorXd::Ones(4);
  spec.horizon = 20000;
  auto logs = run_seeds(problem, spec, 31, 8);

  McSummary summary = anchored::mc_aggregate(logs);
  // Compare mean step size at the start and end of the last decade; the
  // step schedule shrinks by 10^-0.6 over it, so a factor 2 is generous.
  double first_tail = 0.0, last_tail = 0.0;
  for (size_t i = 0; i + 1 < summary.n.size(); ++i) {
    if (summary.n[i] >= 2000 && first_tail == 0.0) {
      first_tail = summary.step_disp.mean[i];
    }
    if (!std::isnan(summary.step_disp.mean[i])) {
      last_tail = summary.step_disp.mean[i];
    }
  }
  CHECK(first_tail > 0.0);
  CHECK(last_tail > 0.0);
  CHECK(last_tail <= 0.5 * first_tail);
}
