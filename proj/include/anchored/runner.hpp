#pragma once

// Multi-seed execution and artifact emission. Every seed's trajectory is a
// pure function of the resolved config and its stream id; the OpenMP policy
// only distributes those independent computations across threads, and
// emission happens after the join in stream order, so output bytes are
// identical across policies and worker counts.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "anchored/config.hpp"
#include "anchored/execution.hpp"
#include "anchored/trajectory.hpp"

namespace anchored {

// Sphere start policy: u + radius * z/|z| with z drawn from a reserved
// substream (index 2^32 - 1) of the seed's rng, so a run's own perturbation
// draws are the same whether x0 was explicit or defaulted.
Eigen::VectorXd default_x0(const Eigen::VectorXd& u, double radius,
                           std::uint64_t master_seed, std::uint64_t stream);

struct MultiRunResult {
  std::vector<TrajectoryLog> logs;  // completed runs, in stream order
  // First divergence in stream order (stream id, aborting iteration);
  // the remaining seeds still run and keep their logs.
  std::optional<std::pair<std::uint64_t, long>> diverged;
};

// Runs one trajectory per stream id. The schedule admissibility gate fires
// once, before any seed starts. capture: keep grid iterates in each log.
MultiRunResult run_many(const ResolvedRun& r, ExecutionPolicy policy,
                        int workers, bool capture = false);

// Writes traj_s<stream>.csv per completed seed plus summary.json into
// r.out_dir (created if needed) and returns the summary JSON text.
// summary.json is a pure function of config and results; timestamps and
// wall-clock live in run_meta.json, which this also writes.
std::string emit_run_outputs(const ResolvedRun& r, const RawConfig& raw,
                             const MultiRunResult& result, double wall_seconds,
                             ExecutionPolicy policy, int workers);

// The summary JSON text alone (no filesystem side effects).
std::string run_summary_json(const ResolvedRun& r, const RawConfig& raw,
                             const MultiRunResult& result);

}  // namespace anchored
