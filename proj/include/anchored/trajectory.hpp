#pragma once

// Per-iteration run records and the logging grid.
//
// A record at index n holds the state metrics of x_n plus the transition
// quantities of the step leaving x_n (displacement to x_{n+1} and realized
// perturbation energy). Metrics that do not exist for a run are stored as
// quiet NaN and serialize as "nan": fgap needs a known optimal value,
// dist_xstar needs a projectable solution set, residual needs a fixed map
// (operator mode or a constant step), and the final record has no outgoing
// step. noise_cumsum is the completed running sum and stays finite.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace anchored {

struct TrajectoryRecord {
  long n = 0;
  double fgap = 0.0;
  double gradnorm = 0.0;
  double dist_xstar = 0.0;
  double step_disp = 0.0;
  double residual = 0.0;
  double noise_term = 0.0;
  double noise_cumsum = 0.0;
};

struct TrajectoryLog {
  std::string method;
  std::string problem_id;
  std::string schedule;
  std::string noise;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  long horizon = 0;

  std::vector<TrajectoryRecord> records;

  Eigen::VectorXd anchor;
  Eigen::VectorXd x0;
  Eigen::VectorXd final_x;
  std::optional<Eigen::VectorXd> xstar;  // projection of the anchor onto S

  // Iterates at grid indices, kept only on request (RunSpec.capture_iterates).
  std::vector<std::pair<long, Eigen::VectorXd>> iterates;
};

// Indices logged for a horizon-N run: every n <= min(N, 1000), then a
// geometric tail (ratio about 1.1), every power of two, the successor of
// each tail point (consecutive pairs feed the recursion audit), and N
// itself. Sorted, unique, all within [0, N].
std::vector<long> log_grid(long horizon);

}  // namespace anchored
