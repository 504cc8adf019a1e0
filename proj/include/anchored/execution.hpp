#pragma once

namespace anchored {

// How to run embarrassingly parallel loops. Results are required to be
// bit-identical across policies and worker counts: work items draw from
// disjoint counter-based substreams and reductions happen serially in
// item-index order, so the policy only affects wall-clock time.
enum class ExecutionPolicy { Serial, OpenMP };

}  // namespace anchored
