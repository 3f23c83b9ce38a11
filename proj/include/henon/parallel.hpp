#pragma once

#include <cstddef>
#include <functional>

namespace henon {

/// Worker count used by parallel_for; 0 selects HENON_LAB_THREADS or the hardware count.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n) over contiguous static blocks. Each index is visited once,
/// so callers that write only slot i get results independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace henon
