#ifndef SEMMATCH_PARALLEL_H_
#define SEMMATCH_PARALLEL_H_

#include <functional>

namespace semmatch {

// Worker count: `requested` when positive, else SEMMATCH_THREADS, else the
// hardware concurrency. Always at least 1.
int ResolveThreadCount(int requested);

// Calls fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots; the first exception is rethrown after all
// workers finish.
void ParallelFor(int n, int threads, const std::function<void(int)>& fn);

}  // namespace semmatch

#endif  // SEMMATCH_PARALLEL_H_
