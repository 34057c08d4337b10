#ifndef MEDZISC_PARALLEL_HPP
#define MEDZISC_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace medzisc {

/// Default worker count: MEDZISC_THREADS if set and positive, else hardware concurrency.
int default_thread_count();

/**
 * Run body(i) for i in [0, count). Each index is processed exactly once; callers
 * write results into slot i so output never depends on scheduling.
 *
 * threads == 1 runs inline on the calling thread. threads <= 0 uses the
 * enclosing arena (or the library default when called outside one).
 */
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace medzisc

#endif  // MEDZISC_PARALLEL_HPP
