#pragma once

// Iteration rules. Every anchored update goes through the same combination
//   x_next = tilde + alpha * (u - tilde)   (alpha = 1 returns u directly),
// which is exact in three corners that the method lattice relies on:
// alpha = 0 reproduces tilde bit-for-bit, alpha = 1 reproduces the anchor,
// and u == tilde is a fixed point. KM relaxation uses the analogous
// x + lambda * (T(x) - x). Consequences, all bitwise on equal rng streams:
// HalpernSGD with alpha identically 0 is SGD; SGD with zero noise and a
// constant step is GD; HalpernSGD with zero noise is HalpernGD.

#include <string>

#include <Eigen/Dense>

#include "anchored/noise.hpp"
#include "anchored/problems.hpp"
#include "anchored/rng.hpp"
#include "anchored/schedules.hpp"
#include "anchored/trajectory.hpp"

namespace anchored {

enum class Method {
  GD,
  HalpernGD,
  SGD,
  HalpernSGD,
  KM,
  HalpernOperator,
  KMOperator
};

const char* method_name(Method method);
Method method_from_name(const std::string& name);
// True for SGD and HalpernSGD: the methods that draw perturbations.
bool method_is_stochastic(Method method);
// True for HalpernOperator and KMOperator: the methods run takes an
// AffineOperator for; the others take a Problem.
bool method_is_operator(Method method);

// T(x) = M x + offset with certified operator norm |M| <= 1 + 1e-9.
// The certificate comes from power iteration on M'M (norm_bound below);
// larger norms are rejected at construction.
struct AffineOperator {
  AffineOperator(Eigen::MatrixXd m, Eigen::VectorXd offset,
                 std::string id = "affine");

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::Index dimension() const { return matrix.rows(); }

  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;
  std::string id;
  double norm_bound = 0.0;
};

// Plane rotation by `angle` radians in R^2; its only fixed point is 0.
AffineOperator make_rotation(double angle);

// Fix(T) as an affine set: solutions of (I - M) x = offset. Inconsistent
// systems (e.g. pure translations) have no fixed point: Unknown.
SolutionSet fixed_point_set(const AffineOperator& op);

struct OptimizerState {
  long n = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  RngStream rng;
};

// x - eta * grad f(x). eta >= 0 (0 is the identity).
Eigen::VectorXd gd_step(const Problem& problem, const Eigen::VectorXd& x,
                        double eta);
// Anchored gradient step: combination of u and gd_step with weight alpha.
Eigen::VectorXd halpern_gd_step(const Problem& problem,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u, double alpha,
                                double eta);
// Relaxed fixed-point step on T(x) = x - eta * grad f(x); lambda in (0,1),
// eta in (0, 2/L) when L > 0.
Eigen::VectorXd km_step(const Problem& problem, const Eigen::VectorXd& x,
                        double lambda, double eta);
Eigen::VectorXd km_step(const AffineOperator& op, const Eigen::VectorXd& x,
                        double lambda);
Eigen::VectorXd halpern_operator_step(const AffineOperator& op,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u, double alpha);

// One stochastic step x - eps_n (grad f + U_n), anchored or not. Draws the
// perturbation from state.rng, advances n by one. The schedule must pass
// require_schedule_admissible unless override_schedule.
OptimizerState sgd_step(const Problem& problem, OptimizerState state,
                        const NoiseModel& noise, const Schedule& schedule,
                        bool override_schedule = false);
OptimizerState halpern_sgd_step(const Problem& problem, OptimizerState state,
                                const NoiseModel& noise,
                                const Schedule& schedule,
                                bool override_schedule = false);

// Gate for stochastic runs. Power-law schedules must validate with a
// positive verdict at this Lipschitz constant; a constant step is allowed
// only with zero noise (it cannot average perturbations out). Throws
// PreconditionViolation unless override_flag.
void require_schedule_admissible(const Schedule& schedule,
                                 const NoiseModel& noise, double lipschitz,
                                 bool override_flag);

struct RunSpec {
  Method method = Method::GD;
  Schedule schedule{ConstantStepSchedule(1.0, AlphaRule::Zero)};
  NoiseModel noise;
  Eigen::VectorXd u;   // anchor; also the reference point projected onto S
  Eigen::VectorXd x0;
  long horizon = 0;
  double km_lambda = 0.5;
  bool override_schedule = false;
  bool capture_iterates = false;
};

// Executes horizon steps and logs the grid indices (see log_grid).
// Deterministic given (rng seed, stream). Aborts with DivergenceError at
// the first iterate that is non-finite or leaves the ball of radius 1e12.
TrajectoryLog run(const Problem& problem, const RunSpec& spec, RngStream rng);
TrajectoryLog run(const AffineOperator& op, const RunSpec& spec,
                  RngStream rng);

}  // namespace anchored
