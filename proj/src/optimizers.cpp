#include "anchored/optimizers.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

#include "anchored/errors.hpp"

namespace anchored {

namespace {

constexpr double kDivergenceNormSq = 1e24;  // |x| > 1e12

double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

// Top singular value of M via power iteration on M'M. Deterministic start;
// the eigenvalue estimate converges even when the top eigenspace is
// degenerate (then the start vector is already stationary in value).
double spectral_norm_power(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd g = m.transpose() * m;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(g.rows());
  v(0) += 0.5;
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd w = g * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    const double next = w.dot(g * w);
    if (it > 2 && std::abs(next - lambda) <= 1e-14 * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
    v = std::move(w);
  }
  return std::sqrt(std::max(0.0, lambda));
}

// tilde + alpha (u - tilde): exact at alpha = 0, at alpha = 1, and at
// u == tilde, which the reduction identities and fixed-point invariance
// depend on. alpha must already be inside [0, 1].
Eigen::VectorXd anchored_combination(const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& tilde,
                                     double alpha) {
  if (alpha == 1.0) return u;
  return tilde + alpha * (u - tilde);
}

void require_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw PreconditionViolation("anchor weight alpha outside [0, 1]");
  }
}

void require_dim(const Eigen::VectorXd& v, Eigen::Index d, const char* what) {
  if (v.size() != d) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

void require_km_params(double lambda, double eta, double lipschitz) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("km: relaxation lambda must lie in (0, 1)");
  }
  if (!(eta > 0.0)) {
    throw std::invalid_argument("km: eta must be > 0");
  }
  if (lipschitz > 0.0 && !(eta < 2.0 / lipschitz)) {
    throw std::invalid_argument(
        "km: eta must be below 2/L for a nonexpansive gradient map");
  }
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::GD: return "gd";
    case Method::HalpernGD: return "halpern_gd";
    case Method::SGD: return "sgd";
    case Method::HalpernSGD: return "halpern_sgd";
    case Method::KM: return "km";
    case Method::HalpernOperator: return "halpern_operator";
    case Method::KMOperator: return "km_operator";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "gd") return Method::GD;
  if (name == "halpern_gd") return Method::HalpernGD;
  if (name == "sgd") return Method::SGD;
  if (name == "halpern_sgd") return Method::HalpernSGD;
  if (name == "km") return Method::KM;
  if (name == "halpern_operator") return Method::HalpernOperator;
  if (name == "km_operator") return Method::KMOperator;
  throw std::invalid_argument("unknown method name: " + name);
}

bool method_is_stochastic(Method method) {
  return method == Method::SGD || method == Method::HalpernSGD;
}

bool method_is_operator(Method method) {
  return method == Method::HalpernOperator || method == Method::KMOperator;
}

AffineOperator::AffineOperator(Eigen::MatrixXd m, Eigen::VectorXd offset_,
                               std::string id_)
    : matrix(std::move(m)), offset(std::move(offset_)), id(std::move(id_)) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("AffineOperator: matrix must be square");
  }
  if (offset.size() != matrix.rows()) {
    throw std::invalid_argument("AffineOperator: offset dimension mismatch");
  }
  norm_bound = spectral_norm_power(matrix);
  if (!(norm_bound <= 1.0 + 1e-9)) {
    throw std::invalid_argument(
        "AffineOperator: operator norm exceeds 1 (not nonexpansive)");
  }
}

Eigen::VectorXd AffineOperator::apply(const Eigen::VectorXd& x) const {
  require_dim(x, dimension(), "AffineOperator::apply");
  return matrix * x + offset;
}

AffineOperator make_rotation(double angle) {
  Eigen::MatrixXd m(2, 2);
  const double c = std::cos(angle), s = std::sin(angle);
  m << c, -s, s, c;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "rotation(%g)", angle);
  return AffineOperator(m, Eigen::VectorXd::Zero(2), buf);
}

SolutionSet fixed_point_set(const AffineOperator& op) {
  const Eigen::Index d = op.dimension();
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(d, d) - op.matrix;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sing = svd.singularValues();
  const double smax = sing.size() > 0 ? sing(0) : 0.0;
  const double tol = 1e-12 * std::max(smax, 1e-300);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sing.size(); ++i) {
    if (sing(i) > tol) ++rank;
  }
  svd.setThreshold(1e-12);
  const Eigen::VectorXd base = svd.solve(op.offset);
  if ((a * base - op.offset).norm() >
      1e-9 * std::max(1.0, op.offset.norm())) {
    return SolutionSet::unknown();  // no fixed point (e.g. a translation)
  }
  if (rank == d) return SolutionSet::singleton(base);
  return SolutionSet::affine(base, svd.matrixV().leftCols(rank));
}

Eigen::VectorXd gd_step(const Problem& problem, const Eigen::VectorXd& x,
                        double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("gd_step: eta must be >= 0");
  return x - eta * eval_grad(problem, x);
}

Eigen::VectorXd halpern_gd_step(const Problem& problem,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u, double alpha,
                                double eta) {
  require_alpha(alpha);
  require_dim(u, problem.dimension, "halpern_gd_step anchor");
  return anchored_combination(u, gd_step(problem, x, eta), alpha);
}

Eigen::VectorXd km_step(const Problem& problem, const Eigen::VectorXd& x,
                        double lambda, double eta) {
  require_km_params(lambda, eta, problem.lipschitz);
  const Eigen::VectorXd t = x - eta * eval_grad(problem, x);
  return x + lambda * (t - x);
}

Eigen::VectorXd km_step(const AffineOperator& op, const Eigen::VectorXd& x,
                        double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("km: relaxation lambda must lie in (0, 1)");
  }
  return x + lambda * (op.apply(x) - x);
}

Eigen::VectorXd halpern_operator_step(const AffineOperator& op,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u, double alpha) {
  require_alpha(alpha);
  require_dim(u, op.dimension(), "halpern_operator_step anchor");
  return anchored_combination(u, op.apply(x), alpha);
}

void require_schedule_admissible(const Schedule& schedule,
                                 const NoiseModel& noise, double lipschitz,
                                 bool override_flag) {
  if (override_flag) return;
  if (const auto* pl = std::get_if<PowerLawSchedule>(&schedule)) {
    ScheduleReport report = validate(*pl, lipschitz);
    if (!report.verdict) {
      throw PreconditionViolation(
          "schedule fails admissibility at L = " + std::to_string(lipschitz) +
          " (see validate-schedule); pass an override to run anyway");
    }
  } else if (noise.kind != NoiseKind::Zero) {
    throw PreconditionViolation(
        "constant step with nonzero noise cannot average perturbations out; "
        "pass an override to run anyway");
  }
}

namespace {

OptimizerState stochastic_step(const Problem& problem, OptimizerState state,
                               const NoiseModel& noise,
                               const Schedule& schedule, bool anchored,
                               bool override_schedule) {
  require_schedule_admissible(schedule, noise, problem.lipschitz,
                              override_schedule);
  require_dim(state.x, problem.dimension, "stochastic step iterate");
  require_dim(state.u, problem.dimension, "stochastic step anchor");
  const double eps = eps_at(schedule, state.n);
  const double alpha = anchored ? alpha_at(schedule, state.n) : 0.0;
  require_alpha(alpha);
  const Eigen::VectorXd g = eval_grad(problem, state.x);
  const Eigen::VectorXd u_n = sample(noise, state.rng, state.x, state.n);
  const Eigen::VectorXd tilde = state.x - eps * (g + u_n);
  state.x = anchored_combination(state.u, tilde, alpha);
  state.n += 1;
  return state;
}

}  // namespace

OptimizerState sgd_step(const Problem& problem, OptimizerState state,
                        const NoiseModel& noise, const Schedule& schedule,
                        bool override_schedule) {
  return stochastic_step(problem, std::move(state), noise, schedule, false,
                         override_schedule);
}

OptimizerState halpern_sgd_step(const Problem& problem, OptimizerState state,
                                const NoiseModel& noise,
                                const Schedule& schedule,
                                bool override_schedule) {
  return stochastic_step(problem, std::move(state), noise, schedule, true,
                         override_schedule);
}

namespace {

struct RunTarget {
  const Problem* problem = nullptr;
  const AffineOperator* op = nullptr;
};

TrajectoryLog run_impl(const RunTarget& target, const RunSpec& spec,
                       RngStream rng) {
  const Method method = spec.method;
  const bool operator_mode = target.op != nullptr;
  const Eigen::Index d =
      operator_mode ? target.op->dimension() : target.problem->dimension;

  require_dim(spec.x0, d, "run x0");
  require_dim(spec.u, d, "run anchor");
  if (!spec.x0.allFinite() || spec.x0.squaredNorm() > kDivergenceNormSq) {
    throw std::invalid_argument("run: x0 is not finite");
  }
  if (!spec.u.allFinite()) {
    throw std::invalid_argument("run: anchor is not finite");
  }
  if (spec.horizon < 0) throw std::invalid_argument("run: negative horizon");

  const auto* cs = std::get_if<ConstantStepSchedule>(&spec.schedule);
  double eta = cs ? cs->eta : 0.0;
  const bool stochastic = method_is_stochastic(method);

  if (method == Method::GD || method == Method::HalpernGD ||
      method == Method::KM) {
    if (!cs) {
      throw std::invalid_argument(std::string(method_name(method)) +
                                  " needs a constant step schedule");
    }
  }
  if (method == Method::KM) {
    require_km_params(spec.km_lambda, eta, target.problem->lipschitz);
  }
  if (method == Method::KMOperator &&
      !(spec.km_lambda > 0.0 && spec.km_lambda < 1.0)) {
    throw std::invalid_argument("km: relaxation lambda must lie in (0, 1)");
  }
  if (stochastic) {
    require_schedule_admissible(spec.schedule, spec.noise,
                                target.problem->lipschitz,
                                spec.override_schedule);
  }

  // Residuals |x - T(x)| need a fixed map T: the operator itself, or the
  // constant-step gradient map x - eta grad f.
  const bool has_residual = operator_mode || cs != nullptr;

  TrajectoryLog log;
  log.method = method_name(method);
  log.problem_id = operator_mode ? target.op->id : target.problem->id;
  log.schedule = describe(spec.schedule);
  log.noise = stochastic ? describe(spec.noise) : describe(NoiseModel::zero());
  log.seed = rng.seed();
  log.stream = rng.stream();
  log.horizon = spec.horizon;
  log.anchor = spec.u;
  log.x0 = spec.x0;

  std::optional<Eigen::VectorXd> xstar;
  if (operator_mode) {
    SolutionSet fix = fixed_point_set(*target.op);
    if (fix.kind != SolutionSetKind::Unknown) {
      xstar = project_onto(fix, spec.u);
    }
  } else if (target.problem->solution_set.kind != SolutionSetKind::Unknown) {
    xstar = project_solution_set(*target.problem, spec.u);
  }
  log.xstar = xstar;

  const std::optional<double> fstar =
      operator_mode ? std::nullopt : target.problem->optimal_value;

  const std::vector<long> grid = log_grid(spec.horizon);
  size_t gi = 0;
  log.records.reserve(grid.size());

  auto state_record = [&](long n, const Eigen::VectorXd& x,
                          const Eigen::VectorXd* grad_at_x) {
    TrajectoryRecord rec;
    rec.n = n;
    rec.fgap = quiet_nan();
    rec.gradnorm = quiet_nan();
    rec.dist_xstar = quiet_nan();
    rec.residual = quiet_nan();
    if (!operator_mode) {
      if (fstar) rec.fgap = eval_value(*target.problem, x) - *fstar;
      const double gn =
          grad_at_x ? grad_at_x->norm() : eval_grad(*target.problem, x).norm();
      rec.gradnorm = gn;
      if (has_residual) rec.residual = eta * gn;
    } else {
      rec.residual = (x - target.op->apply(x)).norm();
    }
    if (xstar) rec.dist_xstar = (x - *xstar).norm();
    return rec;
  };

  Eigen::VectorXd x = spec.x0;
  double cumsum = 0.0;
  for (long n = 0; n < spec.horizon; ++n) {
    double alpha = 0.0;
    double eps = 0.0;
    double noise_term = 0.0;
    Eigen::VectorXd grad;
    Eigen::VectorXd x_next;

    switch (method) {
      case Method::GD: {
        grad = eval_grad(*target.problem, x);
        x_next = x - eta * grad;
        break;
      }
      case Method::HalpernGD: {
        alpha = alpha_at(spec.schedule, n);
        require_alpha(alpha);
        grad = eval_grad(*target.problem, x);
        x_next = anchored_combination(spec.u, x - eta * grad, alpha);
        break;
      }
      case Method::SGD:
      case Method::HalpernSGD: {
        alpha = method == Method::HalpernSGD ? alpha_at(spec.schedule, n) : 0.0;
        require_alpha(alpha);
        eps = eps_at(spec.schedule, n);
        grad = eval_grad(*target.problem, x);
        const Eigen::VectorXd u_n = sample(spec.noise, rng, x, n);
        noise_term = eps * eps * u_n.squaredNorm();
        x_next = anchored_combination(spec.u, x - eps * (grad + u_n), alpha);
        break;
      }
      case Method::KM: {
        grad = eval_grad(*target.problem, x);
        const Eigen::VectorXd t = x - eta * grad;
        x_next = x + spec.km_lambda * (t - x);
        break;
      }
      case Method::KMOperator: {
        const Eigen::VectorXd t = target.op->apply(x);
        x_next = x + spec.km_lambda * (t - x);
        break;
      }
      case Method::HalpernOperator: {
        alpha = alpha_at(spec.schedule, n);
        require_alpha(alpha);
        x_next = anchored_combination(spec.u, target.op->apply(x), alpha);
        break;
      }
    }

    cumsum += noise_term;
    if (!x_next.allFinite() || x_next.squaredNorm() > kDivergenceNormSq) {
      throw DivergenceError(
          "run: iterate " + std::to_string(n + 1) +
              " is non-finite or left the divergence ball (method " +
              method_name(method) + ")",
          n + 1);
    }

    if (gi < grid.size() && grid[gi] == n) {
      TrajectoryRecord rec =
          state_record(n, x, operator_mode ? nullptr : &grad);
      rec.step_disp = (x_next - x).norm();
      rec.noise_term = stochastic ? noise_term : 0.0;
      rec.noise_cumsum = cumsum;
      log.records.push_back(std::move(rec));
      if (spec.capture_iterates) log.iterates.emplace_back(n, x);
      ++gi;
    }
    x = std::move(x_next);
  }

  TrajectoryRecord last = state_record(spec.horizon, x, nullptr);
  last.step_disp = quiet_nan();
  last.noise_term = quiet_nan();
  last.noise_cumsum = cumsum;
  log.records.push_back(std::move(last));
  if (spec.capture_iterates) log.iterates.emplace_back(spec.horizon, x);
  log.final_x = std::move(x);
  return log;
}

}  // namespace

TrajectoryLog run(const Problem& problem, const RunSpec& spec, RngStream rng) {
  if (method_is_operator(spec.method)) {
    throw std::invalid_argument(std::string(method_name(spec.method)) +
                                " runs need an affine operator, not a problem");
  }
  RunTarget target;
  target.problem = &problem;
  return run_impl(target, spec, std::move(rng));
}

TrajectoryLog run(const AffineOperator& op, const RunSpec& spec,
                  RngStream rng) {
  if (!method_is_operator(spec.method)) {
    throw std::invalid_argument(std::string(method_name(spec.method)) +
                                " runs need a problem, not an operator");
  }
  RunTarget target;
  target.op = &op;
  return run_impl(target, spec, std::move(rng));
}

}  // namespace anchored
