#include "chorus/detection.hpp"

#include <algorithm>
#include <numeric>

namespace chorus {

namespace {

template <typename Key>
std::vector<std::size_t> ascending_order(std::size_t n, Key key) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return key(i) < key(j); });
  return order;
}

}  // namespace

std::vector<std::size_t> detected_arrival_indices(std::span<const ArrivalEvent> arrivals,
                                                  const AcousticParams& params) {
  const auto order =
      ascending_order(arrivals.size(), [&](std::size_t i) { return arrivals[i].time; });

  std::vector<std::size_t> detected;
  for (std::size_t idx : order) {
    if (detected.empty() ||
        arrivals[idx].time - arrivals[detected.back()].time > params.max_aftershock) {
      detected.push_back(idx);
    }
  }
  return detected;
}

std::vector<DetectedToa> simulate_comparator(std::span<const ArrivalEvent> arrivals,
                                             const AcousticParams& params) {
  std::vector<DetectedToa> out;
  for (std::size_t idx : detected_arrival_indices(arrivals, params)) {
    out.push_back({arrivals[idx].time});
  }
  return out;
}

bool pairwise_detectable(Point2D a, Point2D b, Point2D x, const AcousticParams& params) {
  const double d_ax = distance(a, x);
  const double d_bx = distance(b, x);
  return std::abs(d_ax - d_bx) > params.omega && d_ax <= params.range &&
         d_bx <= params.range;
}

std::vector<bool> multi_detectable(std::span<const Point2D> targets, Point2D x,
                                   const AcousticParams& params) {
  std::vector<double> dist(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) dist[i] = distance(targets[i], x);

  std::vector<bool> detected(targets.size(), false);
  const auto order = ascending_order(targets.size(), [&](std::size_t i) { return dist[i]; });
  double last = 0.0;
  bool any = false;
  for (std::size_t idx : order) {
    if (dist[idx] > params.range) break;
    if (!any || dist[idx] - last > params.omega) {
      detected[idx] = true;
      last = dist[idx];
      any = true;
    }
  }
  return detected;
}

}  // namespace chorus
