#include "chorus/geometry.hpp"

#include <algorithm>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chorus/random.hpp"

namespace chorus {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + ": must be finite");
}

}  // namespace

AcousticParams AcousticParams::from_separation(double range, double omega,
                                               double ultrasound_speed) {
  AcousticParams p;
  p.range = range;
  p.omega = omega;
  p.ultrasound_speed = ultrasound_speed;
  p.max_aftershock = omega / ultrasound_speed;
  p.validate();
  return p;
}

AcousticParams AcousticParams::from_aftershock(double range, double max_aftershock,
                                               double ultrasound_speed) {
  AcousticParams p;
  p.range = range;
  p.max_aftershock = max_aftershock;
  p.ultrasound_speed = ultrasound_speed;
  p.omega = max_aftershock * ultrasound_speed;
  p.validate();
  return p;
}

void AcousticParams::validate() const {
  require_finite(range, "range");
  require_finite(omega, "omega");
  require_finite(ultrasound_speed, "ultrasound_speed");
  require_finite(max_aftershock, "max_aftershock");
  if (range <= 0.0) throw std::invalid_argument("range: must be > 0");
  if (omega < 0.0) throw std::invalid_argument("omega: must be >= 0");
  if (ultrasound_speed <= 0.0) throw std::invalid_argument("ultrasound_speed: must be > 0");
  if (max_aftershock < 0.0) throw std::invalid_argument("max_aftershock: must be >= 0");
  const double implied = max_aftershock * ultrasound_speed;
  if (std::abs(implied - omega) > 1e-9 * std::max(1.0, omega)) {
    throw std::invalid_argument("omega: must equal max_aftershock * ultrasound_speed");
  }
}

double bisector_cap_area(double d_ab, double range) {
  if (d_ab > 2.0 * range) return 0.0;
  const double theta = std::acos(std::clamp(d_ab / (2.0 * range), -1.0, 1.0));
  return range * range * (theta - std::sin(theta) * std::cos(theta));
}

BlindRegionParams blind_region_params(double d_ab, const AcousticParams& params) {
  require_finite(d_ab, "d_ab");
  params.validate();
  if (d_ab < 0.0) throw std::invalid_argument("d_ab: must be >= 0");

  const double r = params.range;
  const double w = params.omega;

  BlindRegionParams out;
  out.a_h = w / 2.0;
  out.b_h = d_ab / 2.0;
  out.c_h = std::hypot(out.a_h, out.b_h);
  if (d_ab > 2.0 * r) return out;

  out.theta = std::acos(std::min(1.0, d_ab / (2.0 * r)));
  out.cap = r * r * (out.theta - std::sin(out.theta) * std::cos(out.theta));

  // The hyperbola branch enters the disk of a only strictly between these
  // separations; elsewhere the whole cap is blind.
  if (!(d_ab > w && d_ab < 2.0 * r - w)) return out;

  // Circle (x + b_h)^2 + y^2 = r^2 meets the branch where d(a,x) = r and
  // d(b,x) = r - omega, i.e. at x = omega (2r - omega) / (2 d_ab).
  const double x_int = w * (2.0 * r - w) / (2.0 * d_ab);
  const double y2 = r * r - (x_int + out.b_h) * (x_int + out.b_h);
  out.y_beta = std::sqrt(std::max(0.0, y2));

  const double minor2 = out.b_h * out.b_h - out.a_h * out.a_h;
  const double a_h = out.a_h;
  const double b_h = out.b_h;
  auto width = [=](double y) {
    const double circle = std::sqrt(std::max(0.0, r * r - y * y)) - b_h;
    const double hyperbola = a_h * std::sqrt(1.0 + y * y / minor2);
    return 2.0 * std::max(0.0, circle - hyperbola);
  };
  double err = 0.0;
  out.s_e = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      width, 0.0, out.y_beta, 20, 1e-12, &err);
  out.s_e = std::clamp(out.s_e, 0.0, out.cap);
  return out;
}

double blind_region_area(double d_ab, const AcousticParams& params) {
  const BlindRegionParams p = blind_region_params(d_ab, params);
  return std::max(0.0, p.cap - p.s_e);
}

bool blind_region_contains(Point2D receiver, Point2D a, Point2D b,
                           const AcousticParams& params) {
  const double d_ax = distance(a, receiver);
  const double d_bx = distance(b, receiver);
  const double lead = d_ax - d_bx;
  return lead > 0.0 && lead <= params.omega && d_ax <= params.range;
}

AreaEstimate monte_carlo_blind_area(Point2D a, Point2D b, const AcousticParams& params,
                                    std::uint64_t samples, std::uint64_t seed) {
  params.validate();
  if (!a.finite() || !b.finite()) throw std::invalid_argument("target positions must be finite");
  if (samples == 0) throw std::invalid_argument("samples: must be > 0");

  AreaEstimate est;
  est.samples = samples;
  const double r = params.range;
  const double d = distance(a, b);
  if (d > 2.0 * r || d == 0.0) return est;

  // Local frame at a: u along a->b, v perpendicular. Blind points satisfy
  // d(b,x) < d(a,x), i.e. their u-coordinate exceeds d/2.
  const Point2D u{(b.x - a.x) / d, (b.y - a.y) / d};
  const Point2D v{-u.y, u.x};
  const double u_lo = d / 2.0;
  const double half_height = std::sqrt(std::max(0.0, r * r - u_lo * u_lo));
  est.sampling_area = (r - u_lo) * 2.0 * half_height;
  if (est.sampling_area <= 0.0) return est;

  Rng rng(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double su = rng.uniform(u_lo, r);
    const double sv = rng.uniform(-half_height, half_height);
    const Point2D x = a + u * su + v * sv;
    if (blind_region_contains(x, a, b, params)) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  est.hits = hits;
  est.area = est.sampling_area * p;
  est.std_error = est.sampling_area * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return est;
}

}  // namespace chorus
