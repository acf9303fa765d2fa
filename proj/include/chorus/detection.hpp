#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chorus/geometry.hpp"

namespace chorus {

/// A wavefront reaching one receiver. `source_id` is simulation ground truth
/// and never reaches the locator.
struct ArrivalEvent {
  double time = 0.0; // [s]
  int source_id = -1;
};

struct DetectedToa {
  double time = 0.0; // [s]
};

/// Indices (into `arrivals`) of the arrivals that raise a TOA event, in
/// ascending time order.
///
/// The comparator goes high on a detected wavefront and stays high for the
/// aftershock L_max. An arrival is detected iff it comes strictly more than
/// L_max after the previous detected arrival; absorbed arrivals do not extend
/// the high state. Ties in time keep the lower index.
std::vector<std::size_t> detected_arrival_indices(std::span<const ArrivalEvent> arrivals,
                                                  const AcousticParams& params);

std::vector<DetectedToa> simulate_comparator(std::span<const ArrivalEvent> arrivals,
                                             const AcousticParams& params);

/// Two-target detectability at receiver x: |d(a,x) - d(b,x)| > omega with both
/// targets in audible range.
bool pairwise_detectable(Point2D a, Point2D b, Point2D x, const AcousticParams& params);

/// Per-target detection outcome at receiver x, aligned with `targets`.
///
/// Targets beyond the audible range are false. In-range targets are visited in
/// ascending distance; the nearest is detected and each later one is detected
/// iff its distance exceeds that of the last detected target by more than
/// omega. Equal distances keep the lower index.
std::vector<bool> multi_detectable(std::span<const Point2D> targets, Point2D x,
                                   const AcousticParams& params);

}  // namespace chorus
