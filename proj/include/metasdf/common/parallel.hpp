#pragma once

#include <functional>

namespace metasdf {

// Number of worker threads. Capped by the METASDF_THREADS environment
// variable; defaults to the hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n) across worker threads. Blocks until done.
// Work items must be independent; deterministic output requires the caller
// to reduce results in index order afterwards.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace metasdf
