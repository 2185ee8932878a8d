#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmq/time_grid.hpp"

namespace nmq {

struct Interval {
  double t_start = 0.0;
  double t_end = 0.0;

  double length() const { return t_end - t_start; }
};

// Ordered disjoint intervals inside [0, t_max]; entries shorter than one grid
// step are discarded at construction.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> intervals)
      : intervals_(std::move(intervals)) {}

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  std::size_t size() const { return intervals_.size(); }

 private:
  std::vector<Interval> intervals_;
};

// Maximal intervals where the sampled rate is negative. Flagged (divergent)
// indices carry the sign of their nearest finite neighbour on each side; a
// sign change across a flagged run is placed at the midpoint between the two
// flanking finite samples, while a change between finite neighbours is
// refined by linear interpolation. Throws UndeterminableError when every
// sample is flagged.
IntervalSet negative_intervals(std::span<const double> rate,
                               const TimeGrid& grid,
                               std::span<const std::uint8_t> flags = {});

// Maximum endpoint discrepancy between two interval sets matched by index.
// When the sets have different counts, unmatched intervals contribute their
// full length, so a missing interval always shows up in the distance.
double interval_set_distance(const IntervalSet& lhs, const IntervalSet& rhs);

}  // namespace nmq
