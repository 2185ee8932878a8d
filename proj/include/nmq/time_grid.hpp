#pragma once

#include <cmath>
#include <cstddef>

#include "nmq/errors.hpp"

namespace nmq {

// Uniform time grid starting at t = 0. The stored t_max is snapped to an
// integer number of steps, t_max = (count - 1) * dt.
struct TimeGrid {
  double t_max = 0.0;
  double dt = 0.0;
  std::size_t count = 0;

  static TimeGrid from_step(double t_max, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t_max)) {
      throw ConfigError("time grid requires finite t_max and dt > 0");
    }
    const auto n = static_cast<std::size_t>(std::llround(t_max / dt)) + 1;
    if (n < 2) {
      throw ConfigError("time grid requires at least two samples (t_max >= dt)");
    }
    return TimeGrid{dt * static_cast<double>(n - 1), dt, n};
  }

  double time(std::size_t k) const { return dt * static_cast<double>(k); }
};

}  // namespace nmq
