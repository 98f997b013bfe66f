#pragma once

#include <cstddef>
#include <functional>

namespace mwlp {

// Worker count used by the sweep kernels. 0 selects hardware concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

// Runs body(begin, end) over contiguous chunks of [0, count). Chunk boundaries
// depend only on `count` and the chunk size, never on the worker count, so
// per-chunk partial results can be reduced in a fixed order.
void parallel_chunks(std::size_t count, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mwlp
