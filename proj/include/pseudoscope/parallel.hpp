#pragma once

#include <cstddef>
#include <functional>

namespace pseudoscope {

// Worker count: `requested` when nonzero, else PSEUDOSCOPE_THREADS when set
// to a positive integer, else std::thread::hardware_concurrency() (at least 1).
std::size_t resolve_thread_count(std::size_t requested);

// Calls body(i) for every i in [0, n) on up to `threads` workers. Indices are
// handed out dynamically, so body must only write to slot i of its output.
// The first exception thrown by any call is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace pseudoscope
