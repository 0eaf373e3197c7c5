#include "fracpme/fftw_guard.hpp"

namespace fracpme {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace fracpme
