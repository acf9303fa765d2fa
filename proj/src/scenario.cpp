#include "chorus/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chorus/detection.hpp"

namespace chorus {

namespace {

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }
bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

int slots_per_leg(const ScenarioConfig& config) {
  return std::max(1, static_cast<int>(std::lround(config.turn_interval / config.slot_length)));
}

void start_leg(TargetState& t, const ScenarioConfig& config, Rng& rng) {
  t.heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  t.speed = std::max(0.0, rng.normal(config.speed_mean, config.speed_std));
}

double reflect(double v, double hi, bool& flipped) {
  flipped = false;
  while (v < 0.0 || v > hi) {
    v = v < 0.0 ? -v : 2.0 * hi - v;
    flipped = !flipped;
  }
  return v;
}

}  // namespace

void ScenarioConfig::validate() const {
  check(positive(arena.width), "arena_width", "must be > 0");
  check(positive(arena.height), "arena_height", "must be > 0");
  check(n_targets > 0, "n_targets", "must be > 0");
  check(positive(slot_length), "slot_length", "must be > 0");
  check(non_negative(speed_mean), "speed_mean", "must be >= 0");
  check(non_negative(speed_std), "speed_std", "must be >= 0");
  check(positive(turn_interval), "turn_interval", "must be > 0");
  check(non_negative(noise_max_offset), "noise_max_offset", "must be >= 0");
  switch (receivers.kind) {
    case LayoutKind::grid:
      check(positive(receivers.grid_spacing), "grid_spacing", "must be > 0");
      break;
    case LayoutKind::explicit_positions:
      check(!receivers.positions.empty(), "receivers", "explicit layout needs at least one position");
      for (const auto& p : receivers.positions) check(p.finite(), "receivers", "positions must be finite");
      break;
    case LayoutKind::poisson:
      check(positive(receivers.poisson_lambda), "poisson_lambda", "must be > 0");
      break;
  }
  try {
    acoustic.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<Point2D> deploy_receivers(const ScenarioConfig& config) {
  std::vector<Point2D> out;
  switch (config.receivers.kind) {
    case LayoutKind::grid: {
      const double s = config.receivers.grid_spacing;
      const int nx = static_cast<int>(std::floor(config.arena.width / s + 1e-9));
      const int ny = static_cast<int>(std::floor(config.arena.height / s + 1e-9));
      for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) out.push_back({i * s, j * s});
      }
      break;
    }
    case LayoutKind::explicit_positions:
      out = config.receivers.positions;
      break;
    case LayoutKind::poisson: {
      Rng rng(derive_seed(config.seed, 7));
      const double area = config.arena.width * config.arena.height;
      const auto n = rng.poisson(config.receivers.poisson_lambda * area);
      for (std::uint64_t i = 0; i < n; ++i) {
        out.push_back({rng.uniform(0.0, config.arena.width), rng.uniform(0.0, config.arena.height)});
      }
      break;
    }
  }
  return out;
}

double receiver_density(const ScenarioConfig& config) {
  switch (config.receivers.kind) {
    case LayoutKind::grid:
      return 1.0 / (config.receivers.grid_spacing * config.receivers.grid_spacing);
    case LayoutKind::explicit_positions:
      return static_cast<double>(config.receivers.positions.size()) /
             (config.arena.width * config.arena.height);
    case LayoutKind::poisson:
      return config.receivers.poisson_lambda;
  }
  return 0.0;
}

std::vector<TargetState> initial_targets(const ScenarioConfig& config, Rng& rng) {
  std::vector<TargetState> out(static_cast<std::size_t>(config.n_targets));
  for (auto& t : out) {
    t.position = {rng.uniform(0.0, config.arena.width), rng.uniform(0.0, config.arena.height)};
    start_leg(t, config, rng);
  }
  return out;
}

void step_motion(std::vector<TargetState>& targets, int slot_index,
                 const ScenarioConfig& config, Rng& rng) {
  const bool new_leg = slot_index > 0 && slot_index % slots_per_leg(config) == 0;
  for (auto& t : targets) {
    if (new_leg) start_leg(t, config, rng);
    const double step = t.speed * config.slot_length;
    Point2D p{t.position.x + step * std::cos(t.heading), t.position.y + step * std::sin(t.heading)};
    bool flip_x = false;
    bool flip_y = false;
    p.x = reflect(p.x, config.arena.width, flip_x);
    p.y = reflect(p.y, config.arena.height, flip_y);
    if (flip_x) t.heading = std::numbers::pi - t.heading;
    if (flip_y) t.heading = -t.heading;
    t.heading = std::remainder(t.heading, 2.0 * std::numbers::pi);
    if (t.heading < 0.0) t.heading += 2.0 * std::numbers::pi;
    t.position = p;
  }
}

std::vector<AnonymousDistanceSet> measure_slot(std::span<const ScheduledTarget> targets,
                                               std::span<const Point2D> receivers,
                                               const ScenarioConfig& config, int slot_index,
                                               Rng& rng) {
  const AcousticParams& ac = config.acoustic;
  std::vector<AnonymousDistanceSet> out;
  out.reserve(receivers.size());

  std::vector<ArrivalEvent> arrivals;
  std::vector<double> ranges;
  for (std::size_t j = 0; j < receivers.size(); ++j) {
    arrivals.clear();
    ranges.clear();
    for (const auto& t : targets) {
      const double d = distance(t.position, receivers[j]);
      if (d > ac.range) continue;
      arrivals.push_back({d / ac.ultrasound_speed, t.target_id});
      ranges.push_back(d);
    }
    AnonymousDistanceSet set;
    set.receiver_id = static_cast<int>(j);
    set.slot_index = slot_index;
    for (std::size_t idx : detected_arrival_indices(arrivals, ac)) {
      double d = ranges[idx];
      if (config.noise_max_offset > 0.0) d += rng.uniform(0.0, config.noise_max_offset);
      set.distances.push_back(d);
    }
    std::shuffle(set.distances.begin(), set.distances.end(), rng.engine());
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace chorus
