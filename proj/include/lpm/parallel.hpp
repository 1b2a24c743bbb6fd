#pragma once

#include <functional>

namespace lpm {

/// Worker count used by parallel loops; 0 means hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [begin, end) over the worker pool. Each index is
/// visited exactly once; results must be written to per-index slots.
void parallel_for(long begin, long end, const std::function<void(long)>& body);

}  // namespace lpm
