#pragma once

#include <cstddef>
#include <functional>

namespace spectralforge {

/// Number of worker threads used by parallel_for. 0 means hardware
/// concurrency. Results of every parallel kernel are merged by index, so
/// this only affects wall time.
void set_jobs(unsigned jobs);
unsigned jobs();

/// Runs body(i) for i in [0, count). Exceptions from workers are rethrown
/// on the calling thread (first one by index wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace spectralforge
