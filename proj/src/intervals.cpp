#include "nmq/intervals.hpp"

#include <algorithm>
#include <cmath>

#include "nmq/errors.hpp"

namespace nmq {
namespace {

bool flagged_at(std::span<const std::uint8_t> flags, std::size_t k) {
  return !flags.empty() && flags[k] != 0;
}

}  // namespace

IntervalSet negative_intervals(std::span<const double> rate,
                               const TimeGrid& grid,
                               std::span<const std::uint8_t> flags) {
  const std::size_t n = rate.size();
  if (n != grid.count || n < 2) {
    throw DomainError("negative_intervals: rate samples do not match the grid");
  }

  // Nearest finite neighbour on each side of every index.
  std::vector<std::ptrdiff_t> left(n, -1), right(n, -1);
  std::ptrdiff_t last = -1;
  for (std::size_t k = 0; k < n; ++k) {
    if (!flagged_at(flags, k)) last = static_cast<std::ptrdiff_t>(k);
    left[k] = last;
  }
  last = -1;
  for (std::size_t k = n; k-- > 0;) {
    if (!flagged_at(flags, k)) last = static_cast<std::ptrdiff_t>(k);
    right[k] = last;
  }
  if (left[n - 1] == -1) {
    throw UndeterminableError(
        "negative_intervals: every sample is flagged divergent");
  }

  // Effective sign per index: flagged samples borrow the nearest finite value.
  const auto effective = [&](std::size_t k) -> double {
    if (!flagged_at(flags, k)) return rate[k];
    const std::ptrdiff_t l = left[k], r = right[k];
    const auto ik = static_cast<std::ptrdiff_t>(k);
    if (l < 0) return rate[static_cast<std::size_t>(r)];
    if (r < 0) return rate[static_cast<std::size_t>(l)];
    return (ik - l <= r - ik) ? rate[static_cast<std::size_t>(l)]
                              : rate[static_cast<std::size_t>(r)];
  };

  // Crossing time between indices k and k+1 (signs differ there).
  const auto crossing = [&](std::size_t k) -> double {
    if (!flagged_at(flags, k) && !flagged_at(flags, k + 1)) {
      const double v0 = rate[k], v1 = rate[k + 1];
      if (v0 == v1) return grid.time(k);
      const double w = v0 / (v0 - v1);
      return grid.time(k) + grid.dt * std::clamp(w, 0.0, 1.0);
    }
    // Transition touches a flagged run: midpoint of the flanking finite
    // samples (the singular point sits near the centre of the run).
    const std::ptrdiff_t l = left[k];
    const std::ptrdiff_t r = right[k + 1];
    const double tl = l >= 0 ? grid.time(static_cast<std::size_t>(l)) : 0.0;
    const double tr = r >= 0 ? grid.time(static_cast<std::size_t>(r)) : grid.t_max;
    return 0.5 * (tl + tr);
  };

  std::vector<Interval> found;
  bool inside = effective(0) < 0.0;
  double start = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const bool neg_next = effective(k + 1) < 0.0;
    if (!inside && neg_next) {
      start = crossing(k);
      inside = true;
    } else if (inside && !neg_next) {
      found.push_back(Interval{start, crossing(k)});
      inside = false;
    }
  }
  if (inside) found.push_back(Interval{start, grid.t_max});

  std::vector<Interval> kept;
  for (const Interval& iv : found) {
    if (iv.length() >= grid.dt) kept.push_back(iv);
  }
  return IntervalSet(std::move(kept));
}

double interval_set_distance(const IntervalSet& lhs, const IntervalSet& rhs) {
  const auto& a = lhs.intervals();
  const auto& b = rhs.intervals();
  const std::size_t common = std::min(a.size(), b.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < common; ++i) {
    dist = std::max(dist, std::abs(a[i].t_start - b[i].t_start));
    dist = std::max(dist, std::abs(a[i].t_end - b[i].t_end));
  }
  for (std::size_t i = common; i < a.size(); ++i) {
    dist = std::max(dist, a[i].length());
  }
  for (std::size_t i = common; i < b.size(); ++i) {
    dist = std::max(dist, b[i].length());
  }
  return dist;
}

}  // namespace nmq
