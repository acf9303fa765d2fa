#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace chorus {

/// Planar position in meters.
struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2D operator*(Point2D a, double s) { return {a.x * s, a.y * s}; }
  friend Point2D operator*(double s, Point2D a) { return {a.x * s, a.y * s}; }
  friend bool operator==(Point2D a, Point2D b) = default;

  double norm() const { return std::sqrt(x * x + y * y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Point2D a, Point2D b) { return (a - b).norm(); }

/// Propagation and receiver constants shared by every stage of the pipeline.
///
/// `omega` is the confident separation distance: two wavefronts whose path
/// lengths differ by more than omega are both detected. It is tied to the
/// worst-case aftershock duration by omega = max_aftershock * ultrasound_speed,
/// so the struct is built through the factories below which keep the pair
/// consistent.
struct AcousticParams {
  double range = 3.0;              // audible range r [m]
  double omega = 0.33;             // confident separation distance [m]
  double ultrasound_speed = 330.0; // v_u [m/s]
  double max_aftershock = 0.001;   // L_max [s]

  static AcousticParams from_separation(double range, double omega,
                                        double ultrasound_speed = 330.0);
  static AcousticParams from_aftershock(double range, double max_aftershock,
                                        double ultrasound_speed = 330.0);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Intermediate quantities of the closed-form blind-region area.
///
/// Frame: origin at the midpoint of a-b, x-axis pointing from a to b. The
/// region where b's wavefront leads a's by more than omega is the interior of
/// the hyperbola branch around b, x^2/a_h^2 - y^2/(b_h^2 - a_h^2) = 1, whose
/// foci are a and b.
struct BlindRegionParams {
  double theta = 0.0;  // half-angle of the chord cut by the a-b bisector [rad]
  double a_h = 0.0;    // hyperbola semi-major axis, omega / 2 [m]
  double b_h = 0.0;    // half the a-b separation [m]
  double c_h = 0.0;    // sqrt(a_h^2 + b_h^2) [m]
  double y_beta = 0.0; // |y| where the hyperbola branch meets the audible circle of a [m]
  double s_e = 0.0;    // area of the disk of a strictly beyond the hyperbola branch [m^2]
  double cap = 0.0;    // r^2 (theta - sin(theta) cos(theta)) [m^2]
};

/// Area of the circular cap of the audible disk of a that lies on b's side of
/// the perpendicular bisector.
double bisector_cap_area(double d_ab, double range);

BlindRegionParams blind_region_params(double d_ab, const AcousticParams& params);

/// Area of the region where a's wavefront is masked by b's aftershock.
///
/// Piecewise in d_ab: zero beyond 2r, the full bisector cap when the
/// hyperbola branch cannot reach inside the audible disk (d_ab >= 2r - omega)
/// or when no point can see b lead by more than omega (d_ab <= omega), and the
/// cap minus the part beyond the hyperbola in between. Coincident targets
/// (d_ab == 0) take the limit value pi r^2 / 2. Non-increasing in d_ab.
double blind_region_area(double d_ab, const AcousticParams& params);

/// True iff a receiver at x loses a's TOA because b's wavefront arrives first
/// and within omega: 0 < d(a,x) - d(b,x) <= omega and d(a,x) <= r.
bool blind_region_contains(Point2D receiver, Point2D a, Point2D b,
                           const AcousticParams& params);

struct AreaEstimate {
  double area = 0.0;      // [m^2]
  double std_error = 0.0; // binomial standard error of `area`
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  double sampling_area = 0.0; // area of the region the samples were drawn from
};

/// Rejection-sampling estimate of the blind region of a caused by b.
///
/// Samples are drawn uniformly from the part of a's audible disk that lies on
/// b's side of the bisector (bounding box of the cap), which is the only part
/// of the disk where the indicator can be true. Deterministic for a seed.
AreaEstimate monte_carlo_blind_area(Point2D a, Point2D b, const AcousticParams& params,
                                    std::uint64_t samples, std::uint64_t seed);

}  // namespace chorus
