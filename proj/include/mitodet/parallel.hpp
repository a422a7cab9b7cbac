#pragma once

#include <cstddef>
#include <functional>

namespace mitodet {

// Resolves a worker-count request: 0 means "use all hardware threads".
int resolve_workers(int requested);

// Runs fn(i) for i in [0, n) on up to `workers` threads. Items are claimed
// from a shared atomic counter; callers store results by index so the
// outcome is identical for any worker count. Exceptions are captured and
// rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace mitodet
