#pragma once

#include <cstddef>
#include <functional>

namespace topoprobe {

/// Worker count: `requested` if positive, else $TOPOPROBE_THREADS, else 1.
int resolve_threads(int requested);

/// Run fn(i) for i in [0, count) on up to `threads` workers. Each index runs
/// exactly once; callers write results into per-index slots so the outcome
/// does not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace topoprobe
