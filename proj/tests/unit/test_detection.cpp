#include <doctest.h>

#include <algorithm>
#include <vector>

#include "chorus/detection.hpp"
#include "chorus/random.hpp"

using namespace chorus;

namespace {

const AcousticParams kBase = AcousticParams::from_separation(3.0, 0.33);

std::vector<double> times_of(const std::vector<DetectedToa>& toas) {
  std::vector<double> out;
  for (const auto& t : toas) out.push_back(t.time);
  return out;
}

// Receiver at the origin; targets on the x axis at the given distances.
std::vector<Point2D> on_axis(std::initializer_list<double> ds) {
  std::vector<Point2D> out;
  for (double d : ds) out.push_back({d, 0.0});
  return out;
}

}  // namespace

TEST_CASE("comparator examples") {
  const auto p = AcousticParams::from_aftershock(3.0, 0.001);
  CHECK(simulate_comparator({}, p).empty());
  {
    const std::vector<ArrivalEvent> a{{0.004, 0}};
    CHECK(times_of(simulate_comparator(a, p)) == std::vector<double>{0.004});
  }
  {
    const std::vector<ArrivalEvent> a{{0.004, 0}, {0.004, 1}};
    CHECK(times_of(simulate_comparator(a, p)) == std::vector<double>{0.004});
  }
  {
    const std::vector<ArrivalEvent> a{{0.006, 2}, {0.004, 0}, {0.0055, 1}};
    CHECK(times_of(simulate_comparator(a, p)) == std::vector<double>{0.004, 0.0055});
    CHECK(detected_arrival_indices(a, p) == std::vector<std::size_t>{1, 2});
  }
  {
    // Absorbed arrivals do not extend the high state.
    const std::vector<ArrivalEvent> a{{0.0, 0}, {0.0009, 1}, {0.0015, 2}};
    CHECK(times_of(simulate_comparator(a, p)) == std::vector<double>{0.0, 0.0015});
  }
}

TEST_CASE("detected toas are increasing and separated by more than the aftershock") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ArrivalEvent> arrivals;
    const int n = 1 + static_cast<int>(rng.uniform() * 8);
    for (int i = 0; i < n; ++i) arrivals.push_back({rng.uniform(0.0, 0.01), i});
    const auto toas = simulate_comparator(arrivals, kBase);
    REQUIRE(!toas.empty());
    for (std::size_t i = 1; i < toas.size(); ++i) {
      CHECK(toas[i].time - toas[i - 1].time > kBase.max_aftershock);
    }
    const double first = std::min_element(arrivals.begin(), arrivals.end(),
                                          [](auto& x, auto& y) { return x.time < y.time; })->time;
    CHECK(toas.front().time == first);
  }
}

TEST_CASE("pairwise detectability examples") {
  const Point2D x{0, 0};
  CHECK(pairwise_detectable({1.0, 0}, {1.5, 0}, x, kBase));
  CHECK_FALSE(pairwise_detectable({1.0, 0}, {1.2, 0}, x, kBase));
  CHECK_FALSE(pairwise_detectable({3.5, 0}, {1.0, 0}, x, kBase));
  CHECK(pairwise_detectable({1.5, 0}, {0, 1.0}, x, kBase));  // symmetric in order
}

TEST_CASE("multi detectability examples") {
  const Point2D x{0, 0};
  CHECK(multi_detectable(on_axis({1.0, 1.4, 1.8}), x, kBase) == std::vector<bool>{true, true, true});
  CHECK(multi_detectable(on_axis({1.0, 1.2, 1.8}), x, kBase) == std::vector<bool>{true, false, true});
  CHECK(multi_detectable(on_axis({2.0}), x, kBase) == std::vector<bool>{true});
  CHECK(multi_detectable(on_axis({1.8, 3.5, 1.0}), x, kBase) == std::vector<bool>{true, false, true});
  CHECK(multi_detectable(on_axis({1.0, 1.0}), x, kBase) == std::vector<bool>{true, false});
}

TEST_CASE("two-target detection matches the pairwise criterion") {
  Rng rng(17);
  for (int trial = 0; trial < 20000; ++trial) {
    const Point2D a{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Point2D b{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Point2D x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const std::vector<Point2D> both{a, b};
    const auto det = multi_detectable(both, x, kBase);
    const bool both_detected = det[0] && det[1];
    CHECK(both_detected == (pairwise_detectable(a, b, x, kBase) && pairwise_detectable(b, a, x, kBase)));
  }
}

TEST_CASE("removing a target can unmask a nearer one that then masks a farther one") {
  const Point2D x{0, 0};
  CHECK(multi_detectable(on_axis({1.0, 1.2, 1.4}), x, kBase) == std::vector<bool>{true, false, true});
  CHECK(multi_detectable(on_axis({1.2, 1.4}), x, kBase) == std::vector<bool>{true, false});
}

TEST_CASE("removing a target leaves every nearer target's outcome unchanged") {
  Rng rng(29);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<Point2D> targets;
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    for (int i = 0; i < n; ++i) targets.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
    const Point2D x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto full = multi_detectable(targets, x, kBase);
    const auto in_range = std::count_if(targets.begin(), targets.end(),
                                        [&](Point2D t) { return distance(t, x) <= 3.0; });
    CHECK(std::count(full.begin(), full.end(), true) <= in_range);
    const std::size_t drop = static_cast<std::size_t>(rng.uniform() * n);
    auto fewer = targets;
    fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(drop));
    const auto reduced = multi_detectable(fewer, x, kBase);
    const double cut = distance(targets[drop], x);
    for (std::size_t i = 0, j = 0; i < targets.size(); ++i) {
      if (i == drop) continue;
      if (distance(targets[i], x) < cut) CHECK(reduced[j] == full[i]);
      ++j;
    }
  }
}
