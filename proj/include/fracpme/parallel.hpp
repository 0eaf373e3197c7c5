#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace fracpme {

/// Worker count for parameter sweeps: FRACPME_THREADS when set (clamped to
/// at least 1), otherwise the hardware concurrency.
std::size_t sweep_thread_count();

/// Runs fn(i) for i in [0, n). Items are split statically across at most
/// sweep_thread_count() threads; with one worker (or n == 1) everything runs
/// inline. The first exception thrown by any item is rethrown to the caller
/// after all threads join. fn must not touch shared mutable state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace fracpme
