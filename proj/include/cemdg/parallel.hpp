#ifndef CEMDG_PARALLEL_HPP
#define CEMDG_PARALLEL_HPP

#include <functional>

namespace cemdg {

/// Number of worker threads for a requested count (0 = hardware concurrency).
int resolve_threads(int requested);

/// Run fn(i) for i in [0, n) on up to `threads` workers. Tasks must write to
/// disjoint, preallocated slots; results are then independent of scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace cemdg

#endif
