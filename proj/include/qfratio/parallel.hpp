#pragma once

#include <cstddef>
#include <functional>

namespace qfratio {

/// Calls fn(i) for i in [0, count) on a pool of threads. Indices are handed
/// out in contiguous chunks; the first exception thrown by fn is rethrown
/// after all workers finish. threads = 0 uses the hardware concurrency.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

/// Number of workers parallel_for uses for `threads` = 0.
unsigned default_threads();

}  // namespace qfratio
