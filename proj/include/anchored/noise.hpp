#pragma once

// Stochastic gradient perturbations U_n: zero conditional mean, and for the
// non-empirical variants a guaranteed conditional second-moment bound
// E[|U_n|^2] <= sigma^2, uniformly in the iterate and the iteration index.

#include <memory>

#include <Eigen/Dense>

#include "anchored/execution.hpp"
#include "anchored/problems.hpp"
#include "anchored/rng.hpp"

namespace anchored {

enum class NoiseKind { Zero, GaussianIso, BoundedUniform, Rademacher, MiniBatch };

// Immutable description of a perturbation distribution. sigma is the declared
// second-moment bound; for MiniBatch it is only an estimate (state-dependent
// noise has no uniform bound), flagged by sigma_is_empirical, and such models
// are kept out of any theorem-grade check.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Zero;
  double sigma = 0.0;
  bool sigma_is_empirical = false;

  // MiniBatch only: the finite-sum problem whose term gradients are
  // subsampled, and the batch size.
  std::shared_ptr<const Problem> finite_sum;
  Eigen::Index batch_size = 0;

  static NoiseModel zero();
  // Per-coordinate variance sigma^2 / d, so E|U|^2 = sigma^2 in any dimension.
  static NoiseModel gaussian_iso(double sigma);
  // Uniform on the centered ball whose radius makes E|U|^2 = sigma^2.
  static NoiseModel bounded_uniform(double sigma);
  // Uniformly random signed coordinate vector with |U| = sigma exactly.
  static NoiseModel rademacher(double sigma);
  // U = (m/b) * sum_{i in B} g_i(x) - sum_i g_i(x) for a uniform size-b
  // batch B without replacement; unbiased, sigma left to estimation.
  static NoiseModel mini_batch(std::shared_ptr<const Problem> problem,
                               Eigen::Index batch_size);
};

std::string describe(const NoiseModel& noise);

// Support radius of the BoundedUniform variant in dimension d:
// sigma * sqrt((d + 2) / d). Other variants: UnsupportedOperation.
double ball_radius(const NoiseModel& noise, Eigen::Index d);

// One draw of U_n at iterate x. Consumes rng sequentially; the draw order
// within a variant is fixed, so equal streams give equal sequences. The
// iteration index n is metadata only (draws are iid given the stream).
Eigen::VectorXd sample(const NoiseModel& noise, RngStream& rng,
                       const Eigen::VectorXd& x, long n);

struct MomentEstimate {
  Eigen::VectorXd mean;       // empirical mean of U
  double mean_norm = 0.0;     // |mean|
  double second_moment = 0.0; // empirical average of |U|^2
  double se_second_moment = 0.0;
  long num_samples = 0;
};

// Empirical moments over num_samples independent draws at fixed x. Draw i
// uses rng.substream(i), so the estimate is bit-identical across execution
// policies and worker counts; do not reuse rng for sequential draws
// afterwards. num_samples < 1000 is rejected (the estimate would be too
// loose to check anything).
MomentEstimate estimate_moments(const NoiseModel& noise, const RngStream& rng,
                                const Eigen::VectorXd& x, long num_samples,
                                ExecutionPolicy policy = ExecutionPolicy::Serial);

}  // namespace anchored
