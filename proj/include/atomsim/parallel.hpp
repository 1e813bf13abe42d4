#pragma once

#include <cstddef>
#include <functional>

namespace atomsim {

// Worker count: `requested` if nonzero, else hardware concurrency, both capped
// by the ATOMSIM_THREADS environment variable when it is set.
std::size_t thread_count(std::size_t requested = 0);

// Calls body(i) for i in [0, n) on up to `threads` workers. Each index runs
// exactly once; the first exception thrown is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

}  // namespace atomsim
