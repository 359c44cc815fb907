#pragma once

#include <cstddef>
#include <functional>

namespace mvf {

// Worker count used by data-parallel loops (default 1).
void set_thread_count(int n);
int thread_count();

// Runs fn(begin, end) over disjoint chunks of [0, n); each index is visited exactly once.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace mvf
