#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chorus/geometry.hpp"
#include "chorus/random.hpp"

namespace chorus {

/// Configuration validation failure. The message starts with the field name.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Arena {
  double width = 10.0;
  double height = 10.0;

  bool contains(Point2D p, double margin = 0.0) const {
    return p.x >= -margin && p.y >= -margin && p.x <= width + margin && p.y <= height + margin;
  }
};

enum class LayoutKind { grid, explicit_positions, poisson };

struct ReceiverLayout {
  LayoutKind kind = LayoutKind::grid;
  double grid_spacing = 2.0;        // grid
  std::vector<Point2D> positions;   // explicit_positions
  double poisson_lambda = 0.25;     // poisson, receivers per m^2
};

struct ScenarioConfig {
  Arena arena;
  ReceiverLayout receivers;
  int n_targets = 10;
  double slot_length = 0.1;      // [s]
  double speed_mean = 1.0;       // [m/s]
  double speed_std = 0.1;        // [m/s]
  double turn_interval = 5.0;    // [s]
  double noise_max_offset = 0.0; // l_o [m]; ranges get a Uniform(0, l_o) positive offset
  AcousticParams acoustic;
  std::uint64_t seed = 1;

  /// Throws ConfigError("<field>: ...") on the first invalid field.
  void validate() const;
};

/// Receiver positions for the configured layout; receiver ids are indices.
/// Grid points cover [0, width] x [0, height] inclusive.
std::vector<Point2D> deploy_receivers(const ScenarioConfig& config);

/// Receivers per square meter implied by the layout.
double receiver_density(const ScenarioConfig& config);

struct TargetState {
  Point2D position;
  double heading = 0.0; // [rad]
  double speed = 0.0;   // [m/s]
};

/// Random initial placement: uniform in the arena, uniform heading, speed
/// drawn from Normal(speed_mean, speed_std) clamped at zero.
std::vector<TargetState> initial_targets(const ScenarioConfig& config, Rng& rng);

/// Advance every target by one slot. `slot_index` is the index of the slot
/// being entered; a new leg (fresh heading and speed) starts whenever
/// slot_index is a positive multiple of turn_interval / slot_length. Targets
/// leaving the arena are reflected off the wall.
void step_motion(std::vector<TargetState>& targets, int slot_index,
                 const ScenarioConfig& config, Rng& rng);

/// Anonymous ranges measured by one receiver in one slot, in random order.
struct AnonymousDistanceSet {
  int receiver_id = 0;
  int slot_index = 0;
  std::vector<double> distances;
};

struct ScheduledTarget {
  int target_id = 0;
  Point2D position;
};

/// Ranges every receiver reports when `targets` transmit together.
///
/// Per receiver: in-range targets become arrivals at d / v_u, the comparator
/// keeps the detectable ones, and each surviving range gets an independent
/// Uniform(0, l_o) offset before the list is shuffled. With l_o = 0 the
/// reported values are bit-identical to the true distances. Returns one set
/// per receiver, possibly empty.
std::vector<AnonymousDistanceSet> measure_slot(std::span<const ScheduledTarget> targets,
                                               std::span<const Point2D> receivers,
                                               const ScenarioConfig& config, int slot_index,
                                               Rng& rng);

}  // namespace chorus
