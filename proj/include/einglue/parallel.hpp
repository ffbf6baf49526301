#pragma once

#include <cstddef>
#include <functional>

namespace einglue {

// Worker count: THREADS environment variable if set, else hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0, count). Work is split into contiguous chunks, one
// per worker; fn must only write to slots owned by index i so results are
// bit-identical for any worker count. Reductions belong in a serial pass
// afterwards.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace einglue
