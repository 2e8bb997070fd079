#pragma once

#include <cstddef>
#include <functional>

namespace repscope {

// Worker count: REPSCOPE_THREADS when set to a positive integer, otherwise
// the number of available cores (at least 1).
std::size_t thread_count();

// Runs fn(i) for i in [0, n) across up to thread_count() workers. Each index
// runs exactly once; callers write results positionally so output does not
// depend on scheduling. If any call throws, the exception from the lowest
// failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace repscope
