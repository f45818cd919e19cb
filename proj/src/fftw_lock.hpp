#pragma once

#include <mutex>

namespace qstrip::detail {

// The FFTW planner is not re-entrant; plan execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace qstrip::detail
