#pragma once

#include <cstddef>
#include <functional>

namespace pkglab {

/// Worker count: hardware concurrency, capped by PKGLAB_THREADS when set.
/// `requested` > 0 overrides the hardware default but not the cap.
int worker_count(int requested = 0);

/// Runs body(i) for i in [0, n) on up to `workers` threads. Indices are handed
/// out dynamically, so body must write results to per-index slots. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  int workers = 0);

}  // namespace pkglab
