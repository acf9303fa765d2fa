#include "chorus/feasibility.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>

#include "chorus/random.hpp"

namespace chorus {

namespace {

constexpr double kSeparationResolution = 1e-3;

Point2D uniform_in_disk(Rng& rng, Point2D center, double radius) {
  const double rho = radius * std::sqrt(rng.uniform());
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  return {center.x + rho * std::cos(phi), center.y + rho * std::sin(phi)};
}

}  // namespace

void DeploymentModel::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda: must be > 0");
  if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("d: must be > 0");
}

double tdr_lower_bound_area(double d) {
  if (!(d > 0.0)) throw std::invalid_argument("d: must be > 0");
  return std::numbers::pi * (d / 2.0) * (d / 2.0);
}

double prob_three_receivers_lb(const DeploymentModel& model) {
  model.validate();
  const double mu = model.lambda * std::numbers::pi * model.d * model.d / 2.0;
  return 1.0 - std::exp(-mu) * (1.0 + mu + mu * mu / 2.0);
}

double solve_separation_distance(double lambda, double target_prob) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda: must be > 0");
  if (std::isnan(target_prob)) throw std::invalid_argument("target_prob: must be a number");
  if (target_prob >= 1.0) throw std::domain_error("target_prob: must be < 1 (bound never reaches 1)");
  if (target_prob <= 0.0) return kSeparationResolution;

  auto ok = [&](double d) { return prob_three_receivers_lb({lambda, d}) >= target_prob; };

  double hi = 1.0;
  while (!ok(hi)) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::domain_error("target_prob: unreachable for this lambda");
  }
  // Search over integer millimetres: lo fails, hi succeeds.
  long long lo_mm = 0;
  long long hi_mm = static_cast<long long>(std::ceil(hi / kSeparationResolution));
  while (hi_mm - lo_mm > 1) {
    const long long mid = lo_mm + (hi_mm - lo_mm) / 2;
    if (ok(static_cast<double>(mid) * kSeparationResolution)) hi_mm = mid;
    else lo_mm = mid;
  }
  return static_cast<double>(hi_mm) * kSeparationResolution;
}

std::vector<Point2D> symmetric_neighbors(Point2D center, int k, double d) {
  std::vector<Point2D> out;
  const int m = k - 1;
  for (int j = 0; j < m; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / m;
    out.push_back({center.x + d * std::cos(phi), center.y + d * std::sin(phi)});
  }
  return out;
}

bool in_detectable_region(Point2D x, Point2D a, std::span<const Point2D> others,
                          const AcousticParams& params) {
  if (distance(a, x) > params.range) return false;
  return std::none_of(others.begin(), others.end(), [&](Point2D b) {
    return blind_region_contains(x, a, b, params);
  });
}

AreaEstimate union_blind_area(Point2D a, std::span<const Point2D> others,
                              const AcousticParams& params, std::uint64_t samples,
                              std::uint64_t seed) {
  params.validate();
  if (samples == 0) throw std::invalid_argument("samples: must be > 0");
  const double r = params.range;

  AreaEstimate est;
  est.samples = samples;
  est.sampling_area = std::numbers::pi * r * r;
  Rng rng(seed);
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Point2D x = uniform_in_disk(rng, a, r);
    for (const Point2D& b : others) {
      if (blind_region_contains(x, a, b, params)) {
        ++est.hits;
        break;
      }
    }
  }
  const double p = static_cast<double>(est.hits) / static_cast<double>(samples);
  est.area = est.sampling_area * p;
  est.std_error = est.sampling_area * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return est;
}

AreaEstimate symmetric_union_blind_area(int k, double d, const AcousticParams& params,
                                        std::uint64_t samples, std::uint64_t seed) {
  if (k < 2 || k > 7) throw std::invalid_argument("k: supported range is 2..7, got " + std::to_string(k));
  if (!(d > 0.0)) throw std::invalid_argument("d: must be > 0");
  const Point2D a{0.0, 0.0};
  const auto others = symmetric_neighbors(a, k, d);
  return union_blind_area(a, others, params, samples, seed);
}

ProbabilityEstimate empirical_three_receiver_probability(Point2D a,
                                                         std::span<const Point2D> others,
                                                         const AcousticParams& params,
                                                         double lambda,
                                                         std::uint64_t draws,
                                                         std::uint64_t seed) {
  params.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda: must be > 0");
  if (draws == 0) throw std::invalid_argument("draws: must be > 0");

  const double r = params.range;
  const double mean_count = lambda * std::numbers::pi * r * r;
  Rng rng(seed);
  std::uint64_t successes = 0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const std::uint64_t n = rng.poisson(mean_count);
    int inside = 0;
    for (std::uint64_t j = 0; j < n && inside < 3; ++j) {
      if (in_detectable_region(uniform_in_disk(rng, a, r), a, others, params)) ++inside;
    }
    if (inside >= 3) ++successes;
  }
  ProbabilityEstimate est;
  est.draws = draws;
  est.p = static_cast<double>(successes) / static_cast<double>(draws);
  est.std_error = std::sqrt(est.p * (1.0 - est.p) / static_cast<double>(draws));
  return est;
}

}  // namespace chorus
