#ifndef SSOTR_PARALLEL_HPP
#define SSOTR_PARALLEL_HPP

#include <functional>

namespace ssotr {

/// Thread count from the SSOTR_THREADS environment variable, falling
/// back to the hardware concurrency (at least 1).
int default_thread_count();

/// Runs fn(i) for i in [0, count) on up to `threads` worker threads.
/// Work items must write to disjoint slots; results are then identical
/// for every thread count. The first exception thrown by a work item is
/// rethrown on the calling thread after all workers join.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

} // namespace ssotr

#endif
