#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chorus/geometry.hpp"
#include "chorus/locating.hpp"

namespace chorus {

/// Gaussian density of a per-slot motion quantity (speed or acceleration).
struct MotionPdf {
  double mean = 0.0;
  double std = 1.0;
  std::uint64_t count = 0;
  double floor_std = 0.05;

  double density(double x) const;
  double log_density(double x) const;
};

/// Exponentially weighted update of mean and variance, one observation at a
/// time with weight `alpha`; std never drops below floor_std. An empty batch
/// leaves the pdf unchanged.
MotionPdf update_pdf(const MotionPdf& pdf, std::span<const double> observations,
                     double alpha = 0.05);

struct MotionPdfs {
  MotionPdf speed; // [m/slot]
  MotionPdf accel; // [m/slot^2]
};

/// p_v(v) * p_a(a).
double evaluate_likelihood(const MotionPdfs& pdfs, double v, double a);

struct Track {
  std::vector<Point2D> positions;
  double last_speed = 0.0; // [m/slot]
  Point2D velocity;        // last displacement per slot, used for coasting
};

struct Particle {
  int parent_track = 0;
  int candidate = 0;
  double speed = 0.0;          // v_t [m/slot]
  double accel = 0.0;          // a_t [m/slot^2]
  double likelihood = 0.0;     // p_v(v_t) * p_a(a_t)
  double log_likelihood = 0.0; // ranking key; immune to underflow
};

/// The l retained tracks of one target.
struct TrackSet {
  std::vector<Track> tracks;
  int last_slot = 0;       // slot of the newest point on every track
  Point2D estimate;
  bool predicted = false;  // estimate came from coasting
  int coasting = 0;        // consecutive coasted steps
};

struct FilterConfig {
  int tracks = 5;           // l
  double ema_weight = 0.05; // pdf update weight
  double floor_std = 0.05;  // [m/slot]
  int coast_limit = 5;      // coasted steps tolerated before the target is lost

  void validate() const;
};

/// l copies of a single fix, with diffuse pdfs (speed mean and std v_e / 2,
/// acceleration mean 0 and std v_e / 2).
TrackSet bootstrap_tracks(Point2D fix, int slot, const FilterConfig& config);
MotionPdfs initial_pdfs(double v_e, const FilterConfig& config);

/// Counters for one filter step: likelihood evaluations and sort comparisons.
struct FilterOps {
  std::uint64_t evaluations = 0;
  std::uint64_t comparisons = 0;
  std::uint64_t total() const { return evaluations + comparisons; }
};

/// One step of the probabilistic particle filter for a single target.
///
/// Every track is extended with every candidate; speed is the per-slot
/// displacement and acceleration the change from the parent track's last
/// speed. Particles are ranked by likelihood (ties: lower candidate residue,
/// then generation order), the best l become the new tracks and the best one
/// is the estimate. The speed pdf is refreshed with the retained speeds and
/// the acceleration pdf with the retained accelerations.
///
/// With no candidates the tracks coast along their last velocity, the pdfs
/// are left alone and the estimate is flagged as predicted.
void filter_step(TrackSet& set, std::span<const CandidatePosition> candidates,
                 MotionPdfs& pdfs, int slot, const FilterConfig& config,
                 FilterOps* ops = nullptr);

}  // namespace chorus
