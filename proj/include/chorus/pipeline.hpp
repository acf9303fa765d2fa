#pragma once

#include <optional>
#include <span>
#include <vector>

#include "chorus/locating.hpp"
#include "chorus/scenario.hpp"
#include "chorus/scheduler.hpp"
#include "chorus/tracking.hpp"

namespace chorus {

struct SlotEstimate {
  int slot = 0;
  int target_id = 0;
  Point2D position;
  bool located = true; // false: coasted prediction
};

/// Receiver-side state of the whole system: one particle filter per target,
/// fed slot by slot with the anonymous ranges of the targets that transmitted.
class ChorusLocator {
 public:
  ChorusLocator(int n_targets, std::vector<Point2D> receivers, LocatorConfig locate,
                FilterConfig filter);

  /// Consume the ranges of one slot in which `scheduled` transmitted.
  /// Returns an estimate for every scheduled target that has one; a target
  /// without a prior fix is only located when it transmits alone.
  std::vector<SlotEstimate> process_slot(int slot, std::span<const int> scheduled,
                                         std::span<const AnonymousDistanceSet> sets);

  /// Latest estimate of every tracked target, for the scheduler.
  std::vector<TargetPosition> known_positions() const;
  /// Targets with no fix yet or declared lost, ascending id.
  std::vector<int> unknown_targets() const;

  int loss_events() const { return loss_events_; }
  const std::vector<Point2D>& receivers() const { return receivers_; }

 private:
  struct TargetState {
    std::optional<TrackSet> tracks;
    MotionPdfs pdfs;
    Point2D last_fix;   // last located (not coasted) estimate
    int last_fix_slot = 0;
  };

  std::vector<Point2D> receivers_;
  LocatorConfig locate_;
  FilterConfig filter_;
  std::vector<TargetState> targets_;
  int loss_events_ = 0;
};

}  // namespace chorus
