#include "anchored/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "anchored/errors.hpp"

namespace anchored {

namespace {

void require_sigma(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("NoiseModel: sigma must be finite and >= 0");
  }
}

Eigen::VectorXd sample_mini_batch(const NoiseModel& noise, RngStream& rng,
                                  const Eigen::VectorXd& x) {
  const Problem& p = *noise.finite_sum;
  if (x.size() != p.dimension) {
    throw std::invalid_argument("sample: x does not match problem dimension");
  }
  const Eigen::Index m = p.num_terms;
  const Eigen::Index b = noise.batch_size;

  // Uniform size-b subset without replacement: partial Fisher-Yates, then
  // sorted so that b = m sums the terms in the same order as the full
  // gradient below and the difference cancels exactly.
  std::vector<Eigen::Index> idx(static_cast<size_t>(m));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < b; ++i) {
    Eigen::Index j =
        i + static_cast<Eigen::Index>(
                rng.uniform_below(static_cast<std::uint64_t>(m - i)));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  std::sort(idx.begin(), idx.begin() + b);

  Eigen::VectorXd batch = Eigen::VectorXd::Zero(p.dimension);
  for (Eigen::Index k = 0; k < b; ++k) {
    batch += p.term_gradient(idx[static_cast<size_t>(k)], x);
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(p.dimension);
  for (Eigen::Index i = 0; i < m; ++i) {
    full += p.term_gradient(i, x);
  }
  const double scale = static_cast<double>(m) / static_cast<double>(b);
  return scale * batch - full;
}

}  // namespace

NoiseModel NoiseModel::zero() { return NoiseModel{}; }

NoiseModel NoiseModel::gaussian_iso(double sigma) {
  require_sigma(sigma);
  NoiseModel n;
  n.kind = NoiseKind::GaussianIso;
  n.sigma = sigma;
  return n;
}

NoiseModel NoiseModel::bounded_uniform(double sigma) {
  require_sigma(sigma);
  NoiseModel n;
  n.kind = NoiseKind::BoundedUniform;
  n.sigma = sigma;
  return n;
}

NoiseModel NoiseModel::rademacher(double sigma) {
  require_sigma(sigma);
  NoiseModel n;
  n.kind = NoiseKind::Rademacher;
  n.sigma = sigma;
  return n;
}

NoiseModel NoiseModel::mini_batch(std::shared_ptr<const Problem> problem,
                                  Eigen::Index batch_size) {
  if (!problem) {
    throw std::invalid_argument("mini_batch: null problem");
  }
  if (problem->num_terms <= 0 || !problem->term_gradient) {
    throw std::invalid_argument("mini_batch: problem has no finite-sum terms");
  }
  if (batch_size < 1 || batch_size > problem->num_terms) {
    throw std::invalid_argument(
        "mini_batch: batch size must be in [1, num_terms]");
  }
  NoiseModel n;
  n.kind = NoiseKind::MiniBatch;
  n.sigma = 0.0;
  n.sigma_is_empirical = true;
  n.finite_sum = std::move(problem);
  n.batch_size = batch_size;
  return n;
}

std::string describe(const NoiseModel& noise) {
  char buf[96];
  switch (noise.kind) {
    case NoiseKind::Zero:
      return "zero";
    case NoiseKind::GaussianIso:
      std::snprintf(buf, sizeof(buf), "gaussian_iso(sigma=%g)", noise.sigma);
      return buf;
    case NoiseKind::BoundedUniform:
      std::snprintf(buf, sizeof(buf), "bounded_uniform(sigma=%g)", noise.sigma);
      return buf;
    case NoiseKind::Rademacher:
      std::snprintf(buf, sizeof(buf), "rademacher(sigma=%g)", noise.sigma);
      return buf;
    case NoiseKind::MiniBatch:
      std::snprintf(buf, sizeof(buf), "mini_batch(b=%lld)",
                    static_cast<long long>(noise.batch_size));
      return buf;
  }
  return "unknown";
}

double ball_radius(const NoiseModel& noise, Eigen::Index d) {
  if (noise.kind != NoiseKind::BoundedUniform) {
    throw UnsupportedOperation("ball_radius: not a bounded-uniform model");
  }
  if (d < 1) throw std::invalid_argument("ball_radius: dimension must be >= 1");
  const double dd = static_cast<double>(d);
  return noise.sigma * std::sqrt((dd + 2.0) / dd);
}

Eigen::VectorXd sample(const NoiseModel& noise, RngStream& rng,
                       const Eigen::VectorXd& x, long /*n*/) {
  const Eigen::Index d = x.size();
  if (d < 1) throw std::invalid_argument("sample: empty iterate");
  switch (noise.kind) {
    case NoiseKind::Zero:
      return Eigen::VectorXd::Zero(d);
    case NoiseKind::GaussianIso:
      return (noise.sigma / std::sqrt(static_cast<double>(d))) *
             rng.gaussian_vector(d);
    case NoiseKind::BoundedUniform: {
      // Direction first, then radius; the radius CDF inverse u^(1/d) makes
      // the point uniform in the ball of radius R, and |U| <= R surely.
      Eigen::VectorXd z;
      double norm = 0.0;
      do {
        z = rng.gaussian_vector(d);
        norm = z.norm();
      } while (norm == 0.0);
      const double radius = ball_radius(noise, d) *
                            std::pow(rng.uniform01(),
                                     1.0 / static_cast<double>(d));
      return (radius / norm) * z;
    }
    case NoiseKind::Rademacher: {
      Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
      const Eigen::Index i = static_cast<Eigen::Index>(
          rng.uniform_below(static_cast<std::uint64_t>(d)));
      const double sign = (rng.next_u64() & 1u) ? 1.0 : -1.0;
      u[i] = sign * noise.sigma;
      return u;
    }
    case NoiseKind::MiniBatch:
      return sample_mini_batch(noise, rng, x);
  }
  throw std::logic_error("sample: unreachable");
}

MomentEstimate estimate_moments(const NoiseModel& noise, const RngStream& rng,
                                const Eigen::VectorXd& x, long num_samples,
                                ExecutionPolicy policy) {
  if (num_samples < 1000) {
    throw PreconditionViolation("estimate_moments: need at least 1000 samples");
  }
  const Eigen::Index d = x.size();
  if (d < 1) throw std::invalid_argument("estimate_moments: empty iterate");

  // Parallel draws land in per-sample slots; the reduction below walks them
  // serially in index order, so the result does not depend on the policy.
  const long block = 4096;
  Eigen::MatrixXd draws(d, std::min(block, num_samples));
  std::vector<double> norm2(static_cast<size_t>(std::min(block, num_samples)));

  Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(d);
  double m2_acc = 0.0;
  double m2_sq_acc = 0.0;

  for (long lo = 0; lo < num_samples; lo += block) {
    const long hi = std::min(lo + block, num_samples);
    const long width = hi - lo;
    bool parallel = policy == ExecutionPolicy::OpenMP;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (long i = 0; i < width; ++i) {
      RngStream s = rng.substream(static_cast<std::uint64_t>(lo + i));
      Eigen::VectorXd u = sample(noise, s, x, 0);
      draws.col(i) = u;
      norm2[static_cast<size_t>(i)] = u.squaredNorm();
    }
    (void)parallel;
    for (long i = 0; i < width; ++i) {
      mean_acc += draws.col(i);
      const double z = norm2[static_cast<size_t>(i)];
      m2_acc += z;
      m2_sq_acc += z * z;
    }
  }

  MomentEstimate est;
  est.num_samples = num_samples;
  est.mean = mean_acc / static_cast<double>(num_samples);
  est.mean_norm = est.mean.norm();
  const double n = static_cast<double>(num_samples);
  est.second_moment = m2_acc / n;
  const double var =
      std::max(0.0, (m2_sq_acc - n * est.second_moment * est.second_moment) /
                        (n - 1.0));
  est.se_second_moment = std::sqrt(var / n);
  return est;
}

}  // namespace anchored
