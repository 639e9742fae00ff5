#pragma once

#include <cstddef>
#include <functional>

namespace sqlspace {

/// Runs fn(i) for every i in [0, n) on up to `workers` std::threads.
/// Each index owns its output slot, so results are position-deterministic
/// regardless of scheduling. If any call throws, all workers finish their
/// current items and the exception with the smallest index is rethrown.
///
/// This pool serves the blocking-I/O fan-out paths (LLM calls); the numeric
/// kernels use OpenMP directly.
void parallel_for_indexed(size_t n, int workers, const std::function<void(size_t)>& fn);

}  // namespace sqlspace
