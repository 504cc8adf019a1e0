#include "anchored/problems.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "anchored/errors.hpp"
#include "anchored/rng.hpp"

namespace anchored {

namespace {

void require_dimension(const Problem& problem, const Eigen::VectorXd& x,
                       const char* op) {
  if (x.size() != problem.dimension) {
    throw std::invalid_argument(
        std::string(op) + ": point has dimension " + std::to_string(x.size()) +
        ", problem expects " + std::to_string(problem.dimension));
  }
}

// log(1 + exp(-t)) without overflow for large |t|.
double softplus_neg(double t) {
  if (t < 0.0) return -t + std::log1p(std::exp(t));
  return std::log1p(std::exp(-t));
}

// 1 / (1 + exp(t)), the derivative factor of softplus_neg.
double sigmoid_neg(double t) {
  if (t > 0.0) {
    double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

SolutionSet SolutionSet::affine(Eigen::VectorXd base,
                                Eigen::MatrixXd normal_basis) {
  SolutionSet s;
  s.kind = SolutionSetKind::Affine;
  s.base = std::move(base);
  s.normal_basis = std::move(normal_basis);
  return s;
}

SolutionSet SolutionSet::singleton(Eigen::VectorXd point) {
  SolutionSet s;
  s.kind = SolutionSetKind::Singleton;
  s.base = std::move(point);
  return s;
}

SolutionSet SolutionSet::unknown() { return SolutionSet{}; }

double eval_value(const Problem& problem, const Eigen::VectorXd& x) {
  require_dimension(problem, x, "eval_value");
  return problem.value(x);
}

Eigen::VectorXd eval_grad(const Problem& problem, const Eigen::VectorXd& x) {
  require_dimension(problem, x, "eval_grad");
  return problem.gradient(x);
}

double lipschitz_constant(const Problem& problem) { return problem.lipschitz; }

Eigen::VectorXd project_onto(const SolutionSet& set, const Eigen::VectorXd& u) {
  switch (set.kind) {
    case SolutionSetKind::Singleton:
      return set.base;
    case SolutionSetKind::Affine: {
      Eigen::VectorXd w = u - set.base;
      return u - set.normal_basis * (set.normal_basis.transpose() * w);
    }
    case SolutionSetKind::Unknown:
      break;
  }
  throw UnsupportedOperation(
      "project_onto: solution set descriptor is Unknown");
}

Eigen::VectorXd project_solution_set(const Problem& problem,
                                     const Eigen::VectorXd& u) {
  require_dimension(problem, u, "project_solution_set");
  return project_onto(problem.solution_set, u);
}

double check_variational_inequality(const Problem& problem,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& xstar,
                                    int n_samples, std::uint64_t seed) {
  require_dimension(problem, u, "check_variational_inequality");
  require_dimension(problem, xstar, "check_variational_inequality");
  if (n_samples < 1) {
    throw std::invalid_argument(
        "check_variational_inequality: n_samples must be positive");
  }
  const SolutionSet& set = problem.solution_set;
  if (set.kind == SolutionSetKind::Unknown) {
    throw UnsupportedOperation(
        "check_variational_inequality: solution set descriptor is Unknown");
  }
  const Eigen::VectorXd direction = u - xstar;
  if (set.kind == SolutionSetKind::Singleton) {
    return direction.dot(set.base - xstar);
  }
  RngStream rng(seed, 0);
  const double radius = 10.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(i));
    Eigen::VectorXd w = radius * sub.gaussian_vector(problem.dimension);
    Eigen::VectorXd p =
        set.base + w - set.normal_basis * (set.normal_basis.transpose() * w);
    worst = std::max(worst, direction.dot(p - xstar));
  }
  return worst;
}

Problem make_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c) {
  if (Q.rows() != Q.cols()) {
    throw std::invalid_argument("make_quadratic: Q must be square");
  }
  if (Q.rows() != c.size()) {
    throw std::invalid_argument("make_quadratic: Q and c dimensions differ");
  }
  const Eigen::Index d = Q.rows();
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("make_quadratic: Q is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (Q + Q.transpose()));
  Eigen::VectorXd lambda = eig.eigenvalues();  // ascending
  const double lambda_max = lambda[d - 1];
  if (lambda[0] < -1e-10 * std::max(lambda_max, 0.0)) {
    throw std::invalid_argument(
        "make_quadratic: Q has a negative eigenvalue beyond tolerance (" +
        std::to_string(lambda[0]) + ")");
  }
  lambda = lambda.cwiseMax(0.0);

  // Directions with eigenvalue at numerical zero are flat: S extends along
  // them. The rest span the orthogonal complement.
  const double rank_tol = 1e-12 * std::max(lambda_max, 1e-300);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (lambda[i] > rank_tol) ++rank;
  }
  Eigen::MatrixXd normal_basis(d, rank);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (lambda[i] > rank_tol) normal_basis.col(col++) = eig.eigenvectors().col(i);
  }

  Eigen::MatrixXd q_eff = eig.eigenvectors() * lambda.asDiagonal() *
                          eig.eigenvectors().transpose();
  q_eff = 0.5 * (q_eff + q_eff.transpose());

  auto q_shared = std::make_shared<Eigen::MatrixXd>(std::move(q_eff));
  auto c_shared = std::make_shared<Eigen::VectorXd>(c);

  Problem p;
  p.family = "quadratic";
  p.id = "quadratic_d" + std::to_string(d);
  p.dimension = d;
  p.value = [q_shared, c_shared](const Eigen::VectorXd& x) {
    Eigen::VectorXd r = x - *c_shared;
    return 0.5 * r.dot(*q_shared * r);
  };
  p.gradient = [q_shared, c_shared](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(*q_shared * (x - *c_shared));
  };
  p.lipschitz = std::max(lambda_max, 0.0);
  p.lipschitz_is_global = true;
  p.convex = true;
  p.optimal_value = 0.0;
  p.solution_set = (rank == d) ? SolutionSet::singleton(c)
                               : SolutionSet::affine(c, normal_basis);
  return p;
}

Problem make_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw std::invalid_argument("make_least_squares: A must be nonempty");
  }
  if (A.rows() != b.size()) {
    throw std::invalid_argument(
        "make_least_squares: A and b have different numbers of rows");
  }
  const Eigen::Index d = A.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;
  const double rank_tol = 1e-12 * std::max(sigma_max, 1e-300);

  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > rank_tol) ++rank;
  }
  // Minimum-norm solution of the normal equations.
  Eigen::VectorXd base = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < rank; ++i) {
    base += (svd.matrixU().col(i).dot(b) / sigma[i]) * svd.matrixV().col(i);
  }
  Eigen::MatrixXd normal_basis = svd.matrixV().leftCols(rank);

  auto a_shared = std::make_shared<Eigen::MatrixXd>(A);
  auto b_shared = std::make_shared<Eigen::VectorXd>(b);

  Problem p;
  p.family = "least_squares";
  p.id = "least_squares_" + std::to_string(A.rows()) + "x" + std::to_string(d);
  p.dimension = d;
  p.value = [a_shared, b_shared](const Eigen::VectorXd& x) {
    return 0.5 * (*a_shared * x - *b_shared).squaredNorm();
  };
  p.gradient = [a_shared, b_shared](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(a_shared->transpose() * (*a_shared * x - *b_shared));
  };
  p.lipschitz = sigma_max * sigma_max;
  p.lipschitz_is_global = true;
  p.convex = true;
  p.optimal_value = 0.5 * (A * base - b).squaredNorm();
  p.solution_set = (rank == d) ? SolutionSet::singleton(base)
                               : SolutionSet::affine(base, normal_basis);
  p.num_terms = A.rows();
  p.term_gradient = [a_shared, b_shared](Eigen::Index i,
                                         const Eigen::VectorXd& x) {
    double r = a_shared->row(i).dot(x) - (*b_shared)[i];
    return Eigen::VectorXd(r * a_shared->row(i).transpose());
  };
  return p;
}

Problem make_logistic(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw std::invalid_argument("make_logistic: A must be nonempty");
  }
  if (A.rows() != y.size()) {
    throw std::invalid_argument(
        "make_logistic: A and y have different numbers of rows");
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1.0 && y[i] != -1.0) {
      throw std::invalid_argument("make_logistic: labels must be +1 or -1");
    }
  }
  const Eigen::Index d = A.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const double sigma_max =
      svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;

  auto a_shared = std::make_shared<Eigen::MatrixXd>(A);
  auto y_shared = std::make_shared<Eigen::VectorXd>(y);

  Problem p;
  p.family = "logistic";
  p.id = "logistic_" + std::to_string(A.rows()) + "x" + std::to_string(d);
  p.dimension = d;
  p.value = [a_shared, y_shared](const Eigen::VectorXd& x) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a_shared->rows(); ++i) {
      total += softplus_neg((*y_shared)[i] * a_shared->row(i).dot(x));
    }
    return total;
  };
  p.gradient = [a_shared, y_shared](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(a_shared->cols());
    for (Eigen::Index i = 0; i < a_shared->rows(); ++i) {
      double t = (*y_shared)[i] * a_shared->row(i).dot(x);
      g -= (*y_shared)[i] * sigmoid_neg(t) * a_shared->row(i).transpose();
    }
    return g;
  };
  p.lipschitz = 0.25 * sigma_max * sigma_max;
  p.lipschitz_is_global = true;
  p.convex = true;
  p.optimal_value = std::nullopt;  // may be unattained (separable data)
  p.solution_set = SolutionSet::unknown();
  p.num_terms = A.rows();
  p.term_gradient = [a_shared, y_shared](Eigen::Index i,
                                         const Eigen::VectorXd& x) {
    double t = (*y_shared)[i] * a_shared->row(i).dot(x);
    return Eigen::VectorXd(-(*y_shared)[i] * sigmoid_neg(t) *
                           a_shared->row(i).transpose());
  };
  return p;
}

Problem make_rastrigin(Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("make_rastrigin: d must be >= 1");
  const double two_pi = 2.0 * M_PI;

  Problem p;
  p.family = "rastrigin";
  p.id = "rastrigin_d" + std::to_string(d);
  p.dimension = d;
  p.value = [d, two_pi](const Eigen::VectorXd& x) {
    double total = 10.0 * static_cast<double>(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      total += x[i] * x[i] - 10.0 * std::cos(two_pi * x[i]);
    }
    return total;
  };
  p.gradient = [d, two_pi](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      g[i] = 2.0 * x[i] + 10.0 * two_pi * std::sin(two_pi * x[i]);
    }
    return g;
  };
  // Hessian is diagonal with entries 2 + 40 pi^2 cos(2 pi x_i); the bound
  // holds on all of R^d.
  p.lipschitz = 2.0 + 40.0 * M_PI * M_PI;
  p.lipschitz_is_global = true;
  p.convex = false;
  p.optimal_value = 0.0;
  p.solution_set = SolutionSet::unknown();
  return p;
}

Problem make_rosenbrock(Eigen::Index d) {
  if (d < 2) throw std::invalid_argument("make_rosenbrock: d must be >= 2");

  Problem p;
  p.family = "rosenbrock";
  p.id = "rosenbrock_d" + std::to_string(d);
  p.dimension = d;
  p.value = [d](const Eigen::VectorXd& x) {
    double total = 0.0;
    for (Eigen::Index i = 0; i + 1 < d; ++i) {
      double gap = x[i + 1] - x[i] * x[i];
      double off = 1.0 - x[i];
      total += 100.0 * gap * gap + off * off;
    }
    return total;
  };
  p.gradient = [d](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i + 1 < d; ++i) {
      double gap = x[i + 1] - x[i] * x[i];
      g[i] += -400.0 * x[i] * gap - 2.0 * (1.0 - x[i]);
      g[i + 1] += 200.0 * gap;
    }
    return g;
  };
  // Gershgorin bound of the tridiagonal Hessian on max_i |x_i| <= R:
  // diagonal <= 1200 R^2 + 400 R + 202, off-diagonal row sum <= 800 R.
  const double box = 11.0;
  p.lipschitz = 1200.0 * box * box + 400.0 * box + 202.0 + 800.0 * box;
  p.lipschitz_is_global = false;
  p.convex = false;
  p.optimal_value = 0.0;
  p.solution_set = SolutionSet::unknown();
  return p;
}

}  // namespace anchored
