#pragma once

#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "chorus/geometry.hpp"
#include "chorus/scenario.hpp"

namespace chorus {

/// Thrown by trilaterate when the receivers give no unique fix.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An anonymous range together with every target it is historically
/// consistent with. Orphans have no candidate source.
struct LabeledDistance {
  int receiver_id = 0;
  double distance = 0.0;
  std::vector<int> candidate_sources;
};

struct RangeSupport {
  int receiver_id = 0;
  Point2D receiver;
  double distance = 0.0;
};

struct CandidatePosition {
  int target_id = 0;
  Point2D position;
  double residue = 0.0; // mean squared range misfit, each capped at the tolerance [m^2]
  std::vector<RangeSupport> support;
};

struct LocatorConfig {
  double v_e = 0.14;          // per-slot displacement bound [m]
  int n_candidates = 5;       // N_c
  int max_combinations = 200; // triples tried per target and slot
  Arena arena;
  double arena_margin = 0.1; // fixes this far outside the arena are still accepted [m]
  double merge_radius = 1e-3; // candidates closer than this to a better one are dropped [m]
  // Per-receiver range misfit is capped at this value when scoring a fix [m].
  double consistency_tolerance = 0.01;
  // Both in units of consistency_tolerance^2: candidates scoring above
  // max_residue, or above best + residue_gate, are not returned.
  double residue_gate = 0.5;
  double max_residue = 0.34;
  // Re-solve each fix over every receiver whose closest range is within the
  // tolerance, keeping the re-solved fix when it scores no worse.
  bool refine_with_inliers = true;

  void validate() const;
};

/// What the locator knows about a target before a slot. `position` is absent
/// for targets without a fix; such a target must transmit alone and every
/// range in the slot is attributed to it. `reach` bounds how far the target
/// can have moved since `position` was valid.
struct TargetPrior {
  int target_id = 0;
  std::optional<Point2D> position;
  double reach = std::numeric_limits<double>::infinity();
};

/// Range D at receiver j is labeled with target i iff
/// |D - d(receiver_j, prior_i)| <= reach_i.
std::vector<LabeledDistance> label_distances(std::span<const AnonymousDistanceSet> sets,
                                             std::span<const TargetPrior> priors,
                                             std::span<const Point2D> receivers);

/// Least-squares fix from at least three ranges: linearized solve (each circle
/// minus the first) followed by one Gauss-Newton step on the range residuals.
/// Throws DegenerateGeometry for collinear or ill-conditioned receivers.
Point2D trilaterate(std::span<const RangeSupport> supports);

/// Mean squared difference between measured ranges and the ranges from x.
double self_consistency(Point2D x, std::span<const RangeSupport> supports);

/// Ranked candidate fixes for one target.
///
/// Triples of ranges labeled with the target, from distinct receivers and
/// taken in order of increasing deviation from the predicted range, are
/// trilaterated (at most max_combinations). Fixes that are degenerate, outside
/// the arena or farther than prior.reach from the prior position are dropped.
/// Collinear triples yield both mirror-image fixes instead of none.
/// Each survivor is scored over all receivers holding a range labeled with the
/// target: per receiver, the misfit of the range closest to the fix, capped at
/// consistency_tolerance, squared and averaged. Near-duplicates are merged,
/// candidates failing max_residue or residue_gate are dropped, and at most
/// n_candidates are returned in ascending residue order. Fewer than three
/// usable receivers give an empty list.
std::vector<CandidatePosition> generate_candidates(std::span<const LabeledDistance> labeled,
                                                   const TargetPrior& prior,
                                                   std::span<const Point2D> receivers,
                                                   const LocatorConfig& config);

}  // namespace chorus
