#pragma once

#include <mutex>

namespace fracpme {

/// Serializes FFTW plan creation and destruction process-wide. Executing
/// distinct plans concurrently is safe and needs no lock.
std::mutex& fftw_planner_mutex();

}  // namespace fracpme
