#pragma once

#include <cstddef>
#include <functional>

namespace agglab {

// Worker count: AGGLAB_THREADS when set (1..256), else hardware concurrency.
unsigned max_threads();

// Runs body(i) for i in [0, count) on up to max_threads() threads. Results
// must be written to per-index slots; ordering of execution is unspecified.
// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace agglab
