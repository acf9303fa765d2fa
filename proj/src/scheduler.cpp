#include "chorus/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace chorus {

namespace {

double second_nearest(const std::vector<TargetPosition>& set, std::size_t idx) {
  double first = std::numeric_limits<double>::infinity();
  double second = first;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k == idx) continue;
    const double d = distance(set[idx].position, set[k].position);
    if (d < first) {
      second = first;
      first = d;
    } else if (d < second) {
      second = d;
    }
  }
  return second;
}

}  // namespace

std::vector<std::vector<int>> divide_closest_targets(std::span<const TargetPosition> targets,
                                                     double d_s) {
  if (!(d_s > 0.0)) throw std::invalid_argument("d_s: must be > 0");

  std::vector<TargetPosition> working(targets.begin(), targets.end());
  std::sort(working.begin(), working.end(),
            [](const TargetPosition& a, const TargetPosition& b) { return a.target_id < b.target_id; });

  std::vector<std::vector<int>> groups;
  while (!working.empty()) {
    std::vector<TargetPosition> evicted;
    for (;;) {
      // Closest pair; strict < keeps the lexicographically first pair of ids
      // because `working` is sorted by id.
      double best = std::numeric_limits<double>::infinity();
      std::size_t bi = 0;
      std::size_t bj = 0;
      for (std::size_t i = 0; i < working.size(); ++i) {
        for (std::size_t j = i + 1; j < working.size(); ++j) {
          const double d = distance(working[i].position, working[j].position);
          if (d < best) {
            best = d;
            bi = i;
            bj = j;
          }
        }
      }
      if (!(best < d_s)) break;
      const double crowd_i = second_nearest(working, bi);
      const double crowd_j = second_nearest(working, bj);
      const std::size_t victim = crowd_j < crowd_i ? bj : bi;
      evicted.push_back(working[victim]);
      working.erase(working.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    std::vector<int> group;
    for (const auto& t : working) group.push_back(t.target_id);
    groups.push_back(std::move(group));
    working = std::move(evicted);
    std::sort(working.begin(), working.end(),
              [](const TargetPosition& a, const TargetPosition& b) { return a.target_id < b.target_id; });
  }
  return groups;
}

SlotSchedule build_schedule(std::span<const TargetPosition> known,
                            std::span<const int> unknown_or_lost, double d_s) {
  SlotSchedule schedule;
  if (!known.empty()) schedule.slots = divide_closest_targets(known, d_s);
  for (int id : unknown_or_lost) schedule.slots.push_back({id});
  return schedule;
}

}  // namespace chorus
