#pragma once

#include <cmath>
#include <cstdint>

namespace crmsim {

// Simulation clock in integer microseconds since run start. All protocol
// intervals (SIFS, slot, offsets, durations) are exact microsecond counts;
// real-valued intermediates are rounded half-up the moment they become a
// committed time value.
using SimTime = std::uint64_t;

constexpr SimTime kMicrosPerSecond = 1'000'000;

inline SimTime to_sim_time(double microseconds) {
  if (microseconds <= 0.0) return 0;
  return static_cast<SimTime>(std::floor(microseconds + 0.5));
}

inline double seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(kMicrosPerSecond);
}

}  // namespace crmsim
