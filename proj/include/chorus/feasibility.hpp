#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chorus/geometry.hpp"

namespace chorus {

/// Poisson receiver deployment and the minimum pairwise target separation.
struct DeploymentModel {
  double lambda = 0.25; // receivers per square meter
  double d = 1.0;       // minimum pairwise target separation [m]

  void validate() const;
};

/// Area of the disk of radius d/2 around a target; no concurrent target
/// separated by at least d can blind a receiver inside it.
double tdr_lower_bound_area(double d);

/// Lower bound on P(at least three receivers in a target's TOA-detectable
/// region): 1 - e^{-mu} (1 + mu + mu^2 / 2) with mu = lambda pi d^2 / 2.
double prob_three_receivers_lb(const DeploymentModel& model);

/// Smallest d (on a 1 mm grid) with prob_three_receivers_lb(lambda, d) >= target_prob.
/// Returns the grid resolution for target_prob <= 0. Throws std::domain_error
/// for target_prob >= 1.
double solve_separation_distance(double lambda, double target_prob);

/// Positions of k - 1 neighbors evenly spaced in angle on the circle of radius
/// d around `center`, the first one on the +x axis.
std::vector<Point2D> symmetric_neighbors(Point2D center, int k, double d);

/// Monte Carlo area of the union of blind regions of `a` caused by each of
/// `others`, sampling uniformly over the audible disk of a.
AreaEstimate union_blind_area(Point2D a, std::span<const Point2D> others,
                              const AcousticParams& params, std::uint64_t samples,
                              std::uint64_t seed);

/// Union blind area of the center target of a k-target symmetric layout
/// (center plus k - 1 neighbors at distance d). Supports 2 <= k <= 7.
AreaEstimate symmetric_union_blind_area(int k, double d, const AcousticParams& params,
                                        std::uint64_t samples, std::uint64_t seed);

/// True iff x lies in a's TOA-detectable region: within the audible range and
/// outside every blind region caused by `others`.
bool in_detectable_region(Point2D x, Point2D a, std::span<const Point2D> others,
                          const AcousticParams& params);

struct ProbabilityEstimate {
  double p = 0.0;
  double std_error = 0.0;
  std::uint64_t draws = 0;
};

/// Empirical P(at least three receivers in a's TOA-detectable region) for a
/// homogeneous Poisson receiver field of intensity lambda. Each draw samples a
/// fresh point process over the audible disk of a.
ProbabilityEstimate empirical_three_receiver_probability(Point2D a,
                                                         std::span<const Point2D> others,
                                                         const AcousticParams& params,
                                                         double lambda,
                                                         std::uint64_t draws,
                                                         std::uint64_t seed);

}  // namespace chorus
