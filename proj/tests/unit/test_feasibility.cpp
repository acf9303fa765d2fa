#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "chorus/feasibility.hpp"
#include "chorus/random.hpp"

using namespace chorus;

namespace {

// 1 - P(N <= 2) for N ~ Poisson(mu), summed term by term from the pmf.
double poisson_tail_three(double mu) {
  double term = std::exp(-mu);
  double cdf = 0.0;
  for (int k = 0; k <= 2; ++k) {
    cdf += term;
    term *= mu / (k + 1);
  }
  return 1.0 - cdf;
}

}  // namespace

TEST_CASE("tdr lower bound area") {
  CHECK(tdr_lower_bound_area(2.0) == doctest::Approx(std::numbers::pi));
  CHECK(tdr_lower_bound_area(0.33) == doctest::Approx(std::numbers::pi * 0.165 * 0.165));
  CHECK(tdr_lower_bound_area(0.5) < tdr_lower_bound_area(0.6));
  CHECK_THROWS_AS(tdr_lower_bound_area(0.0), std::invalid_argument);
}

TEST_CASE("three receiver bound at the reference point") {
  const double mu = std::numbers::pi / 2.0;
  const double expected = 1.0 - std::exp(-mu) * (1.0 + mu + mu * mu / 2.0);
  const double p = prob_three_receivers_lb({0.25, 2.0});
  CHECK(p == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(p - 0.209) <= 0.001);
  CHECK(prob_three_receivers_lb({1e-9, 1.0}) < 1e-20);
}

TEST_CASE("three receiver bound equals an independent Poisson tail") {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const double lambda = rng.uniform(0.01, 3.0);
    const double d = rng.uniform(0.05, 6.0);
    const double mu = lambda * std::numbers::pi * d * d / 2.0;
    CHECK(std::abs(prob_three_receivers_lb({lambda, d}) - poisson_tail_three(mu)) <= 1e-12);
  }
}

TEST_CASE("three receiver bound increases in both arguments") {
  double prev = 0.0;
  for (double d = 0.1; d < 6.0; d += 0.1) {
    const double p = prob_three_receivers_lb({0.25, d});
    CHECK(p > prev);
    CHECK(p < 1.0);
    prev = p;
  }
  prev = 0.0;
  for (double lambda = 0.05; lambda < 3.0; lambda += 0.05) {
    const double p = prob_three_receivers_lb({lambda, 1.0});
    CHECK(p > prev);
    prev = p;
  }
  CHECK_THROWS_AS(prob_three_receivers_lb({0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(prob_three_receivers_lb({0.25, -1.0}), std::invalid_argument);
}

TEST_CASE("bound lower-bounds Poisson counts in a disk of the assumed area") {
  const double lambda = 0.25;
  const double d = 2.0;
  const double mean = lambda * std::numbers::pi * d * d / 2.0;
  Rng rng(11);
  const int draws = 100000;
  int hits = 0;
  for (int i = 0; i < draws; ++i) hits += rng.poisson(mean) >= 3 ? 1 : 0;
  const double p = static_cast<double>(hits) / draws;
  const double sigma = std::sqrt(p * (1 - p) / draws);
  CHECK(p >= prob_three_receivers_lb({lambda, d}) - 3.0 * sigma);
}

TEST_CASE("separation distance inversion") {
  const double ds = solve_separation_distance(0.25, 0.209);
  CHECK(std::abs(ds - 2.0) <= 0.01);
  CHECK(solve_separation_distance(0.25, 0.0) == doctest::Approx(1e-3));
  CHECK_THROWS_AS(solve_separation_distance(0.25, 1.0), std::domain_error);
  CHECK_THROWS_AS(solve_separation_distance(0.25, 1.5), std::domain_error);

  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const double lambda = rng.uniform(0.02, 2.0);
    const double p = rng.uniform(0.01, 0.999);
    const double s = solve_separation_distance(lambda, p);
    CHECK(prob_three_receivers_lb({lambda, s}) >= p);
    if (s > 1e-3) CHECK(prob_three_receivers_lb({lambda, s - 1e-3}) < p);
  }
}

TEST_CASE("separation distance does not grow with density") {
  for (double p : {0.5, 0.9, 0.99}) {
    double prev = INFINITY;
    for (double lambda = 0.05; lambda <= 2.0; lambda += 0.05) {
      const double s = solve_separation_distance(lambda, p);
      CHECK(s <= prev);
      prev = s;
    }
  }
}

TEST_CASE("symmetric union blind area") {
  const auto params = AcousticParams::from_separation(3.0, 0.33);
  const std::uint64_t n = 400000;
  SUBCASE("two targets reduce to one blind region") {
    for (double d : {0.5, 1.0, 2.0, 4.0}) {
      const auto est = symmetric_union_blind_area(2, d, params, n, 17);
      const double exact = blind_region_area(d, params);
      CHECK(std::abs(est.area - exact) <= 4.0 * est.std_error + 1e-3);
    }
  }
  SUBCASE("neighbours at plus and minus sixty degrees") {
    const Point2D a{0, 0};
    for (double d : {0.5, 1.0, 2.0}) {
      const std::vector<Point2D> others{{d * 0.5, d * std::sqrt(3.0) / 2.0},
                                        {d * 0.5, -d * std::sqrt(3.0) / 2.0}};
      const auto est = union_blind_area(a, others, params, n, 23);
      const double single = blind_region_area(d, params);
      CHECK(est.area <= 2.0 * single + 4.0 * est.std_error);
      CHECK(est.area >= single - 4.0 * est.std_error);
    }
  }
  SUBCASE("unsupported counts") {
    CHECK_THROWS_AS(symmetric_union_blind_area(1, 1.0, params, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(symmetric_union_blind_area(8, 1.0, params, 10, 1), std::invalid_argument);
  }
}

TEST_CASE("symmetric neighbours sit on a ring") {
  const auto ring = symmetric_neighbors({1, 2}, 7, 1.5);
  REQUIRE(ring.size() == 6);
  for (std::size_t i = 0; i < ring.size(); ++i) {
    CHECK(distance(ring[i], {1, 2}) == doctest::Approx(1.5));
    CHECK(distance(ring[i], ring[(i + 1) % 6]) == doctest::Approx(1.5));
  }
}

TEST_CASE("empirical three receiver probability is deterministic per seed") {
  const auto params = AcousticParams::from_separation(3.0, 0.33);
  const auto ring = symmetric_neighbors({0, 0}, 7, 1.0);
  const auto a = empirical_three_receiver_probability({0, 0}, ring, params, 0.5, 2000, 9);
  const auto b = empirical_three_receiver_probability({0, 0}, ring, params, 0.5, 2000, 9);
  CHECK(a.p == b.p);
  CHECK(a.p >= 0.0);
  CHECK(a.p <= 1.0);
}
