#pragma once

#include <cstddef>
#include <functional>

namespace axisforge {

// Worker cap shared by all modules. Defaults to AXISFORGE_THREADS when set,
// otherwise the hardware concurrency.
void set_max_threads(std::size_t n);
std::size_t max_threads();

// Runs fn(i) for i in [0, n). Work items must write disjoint outputs; the
// exception from the lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace axisforge
