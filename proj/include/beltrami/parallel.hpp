#pragma once

#include <cstddef>
#include <functional>

namespace beltrami {

/// Worker count used by parallel_for; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once;
/// callers write results into pre-sized per-index slots so the outcome
/// does not depend on scheduling. The first exception thrown by any body
/// is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace beltrami
