#pragma once
#include <cstddef>
#include <functional>

namespace naesat {

// worker count: NAESAT_THREADS if set, otherwise hardware concurrency
unsigned thread_count();

// runs fn(c) for c in [0, chunks); results must be stored per chunk by the caller
// so that merging in chunk order is independent of the worker count; nested calls run serially
void parallel_chunks(size_t chunks, const std::function<void(size_t)>& fn);

}  // namespace naesat
