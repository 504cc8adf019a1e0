#pragma once

// Smooth test problems with machine-checkable structure: value and gradient
// evaluators, a gradient Lipschitz constant, and a descriptor of the
// minimizer set S precise enough to compute metric projections onto it.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace anchored {

enum class SolutionSetKind { Affine, Singleton, Unknown };

// Affine: S = { base + w : normal_basis' * w = 0 }, where normal_basis has
// orthonormal columns spanning the orthogonal complement of the directions
// along which S extends. Singleton: S = { base }. Unknown: no descriptor;
// projections are unsupported.
struct SolutionSet {
  SolutionSetKind kind = SolutionSetKind::Unknown;
  Eigen::VectorXd base;
  Eigen::MatrixXd normal_basis;

  static SolutionSet affine(Eigen::VectorXd base, Eigen::MatrixXd normal_basis);
  static SolutionSet singleton(Eigen::VectorXd point);
  static SolutionSet unknown();
};

struct Problem {
  std::string family;
  std::string id;
  Eigen::Index dimension = 0;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  // Lipschitz constant of the gradient. For nonconvex families this is a
  // box surrogate (see the factory) and lipschitz_is_global is false.
  double lipschitz = 0.0;
  bool lipschitz_is_global = true;
  bool convex = false;
  std::optional<double> optimal_value;
  SolutionSet solution_set;
  // Finite-sum structure when available: gradient(x) equals the sum of
  // term_gradient(i, x) over i in [0, num_terms). Zero when absent.
  Eigen::Index num_terms = 0;
  std::function<Eigen::VectorXd(Eigen::Index, const Eigen::VectorXd&)>
      term_gradient;
};

double eval_value(const Problem& problem, const Eigen::VectorXd& x);
Eigen::VectorXd eval_grad(const Problem& problem, const Eigen::VectorXd& x);
double lipschitz_constant(const Problem& problem);

// Metric projection onto S. Unknown descriptor: UnsupportedOperation.
Eigen::VectorXd project_onto(const SolutionSet& set, const Eigen::VectorXd& u);
Eigen::VectorXd project_solution_set(const Problem& problem,
                                     const Eigen::VectorXd& u);

// Max over sampled p in S of <u - xstar, p - xstar>. Nonpositive (up to
// tolerance) exactly when xstar is the metric projection of u onto S.
double check_variational_inequality(const Problem& problem,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& xstar,
                                    int n_samples, std::uint64_t seed);

// f(x) = 0.5 (x-c)' Q (x-c) with Q symmetric PSD. Eigenvalues below
// -1e-10 * lambda_max are rejected; slightly negative ones are clipped to 0.
// S = c + null(Q).
Problem make_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c);

// f(x) = 0.5 |Ax - b|^2. S = solutions of the normal equations,
// base point = minimum-norm solution. L = sigma_max(A)^2.
Problem make_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

// f(x) = sum_i log(1 + exp(-y_i a_i' x)), labels y_i in {-1, +1}.
// L = lambda_max(A'A) / 4. Minimizers may not exist (separable data), so
// the solution set is Unknown.
Problem make_logistic(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

// Rastrigin, standard form: f(x) = 10 d + sum_i (x_i^2 - 10 cos(2 pi x_i)).
// Nonconvex; the diagonal Hessian bound 2 + 40 pi^2 holds everywhere.
Problem make_rastrigin(Eigen::Index d);

// Rosenbrock, standard coupled form, d >= 2. Nonconvex; the Lipschitz
// surrogate is a Gershgorin bound on the box max_i |x_i| <= 11 and is
// flagged non-global.
Problem make_rosenbrock(Eigen::Index d);

}  // namespace anchored
