#pragma once

#include <span>
#include <vector>

#include "chorus/geometry.hpp"

namespace chorus {

struct TargetPosition {
  int target_id = 0;
  Point2D position;
};

/// Greedy partition into d_s-separated groups.
///
/// While the working set holds a pair closer than d_s, the closest pair
/// (ties: lexicographically smallest id pair) loses one member to the next
/// working set: the member whose second-nearest neighbour in the working set
/// is closer, or the lower id on a tie. When no close pair remains the
/// working set becomes a group and the evicted targets are processed the same
/// way. Groups hold target ids sorted ascending, in emission order.
std::vector<std::vector<int>> divide_closest_targets(std::span<const TargetPosition> targets,
                                                     double d_s);

/// One scheduling round: the targets in each inner vector transmit together.
struct SlotSchedule {
  std::vector<std::vector<int>> slots;
};

/// One slot per d_s-separated group of located targets, followed by one
/// exclusive slot per target without a usable location (in the given order).
SlotSchedule build_schedule(std::span<const TargetPosition> known,
                            std::span<const int> unknown_or_lost, double d_s);

}  // namespace chorus
