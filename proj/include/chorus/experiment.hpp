#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chorus/pipeline.hpp"
#include "chorus/scenario.hpp"

namespace chorus {

/// Full configuration of one simulated run: the scenario plus the receiver-side
/// algorithm settings.
struct ExperimentConfig {
  std::string name = "custom";
  ScenarioConfig scenario;
  int n_slots = 600;

  int tracks = 5;             // l
  int candidates = 5;         // N_c
  int max_combinations = 200;
  std::optional<double> v_e;  // default (speed_mean + 4 speed_std) * slot_length
  double floor_std = 0.05;
  double ema_weight = 0.05;
  int coast_limit = 5;
  double arena_margin = 0.1;
  double merge_radius = 1e-3;
  std::optional<double> consistency_tolerance; // default max(0.01, noise_max_offset)
  double residue_gate = 0.5;
  double max_residue = 0.34;
  bool refine_with_inliers = true;

  /// d_s = max(separation_omega_factor * omega, Poisson-bound inversion at
  /// separation_target_prob), unless separation_distance is given. A target
  /// probability of 0 leaves only the omega term.
  double separation_target_prob = 0.0;
  double separation_omega_factor = 2.0;
  std::optional<double> separation_distance;

  void validate() const;
  double effective_v_e() const;
  double effective_consistency_tolerance() const;
  double effective_separation() const;
  LocatorConfig locator_config() const;
  FilterConfig filter_config() const;
};

/// Separation distance policy shared by the run loop and the analysis tools.
double separation_distance_for(double lambda, double omega, double target_prob,
                               double omega_factor);

struct TruthRecord {
  int slot = 0;
  int target_id = 0;
  Point2D position;
};

struct DistanceRecord {
  int slot = 0;
  int receiver_id = 0;
  double distance = 0.0;
};

struct ScheduleEntry {
  int round = 0;
  int slot = 0;
  std::vector<int> target_ids;
};

struct ErrorRecord {
  int slot = 0;
  int target_id = 0;
  double error = 0.0;
};

/// Estimates and truth that do not line up (slot or target missing).
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorted error samples with empirical quantiles.
struct ErrorCdf {
  std::vector<double> sorted;

  /// Linear interpolation between order statistics; q in [0, 1].
  double quantile(double q) const;
  /// Fraction of samples <= x.
  double fraction_below(double x) const;
};

/// Per located estimate, the Euclidean distance to the truth of the same
/// target in the same slot. Coasted estimates are skipped.
std::vector<ErrorRecord> compute_errors(std::span<const SlotEstimate> estimates,
                                        std::span<const TruthRecord> truth);
ErrorCdf compute_error_cdf(std::span<const SlotEstimate> estimates,
                           std::span<const TruthRecord> truth);
ErrorCdf make_cdf(std::vector<double> errors);

/// Mean number of targets per slot over the log.
double compute_efficiency(std::span<const ScheduleEntry> schedule_log);

struct MetricsReport {
  std::size_t error_count = 0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double mean_error = 0.0;
  double max_error = 0.0;
  double efficiency = 0.0;         // mean concurrent targets per slot
  double predicted_fraction = 0.0; // coasted estimates / all estimates
  int loss_events = 0;
  int slots = 0;
  double separation_distance = 0.0;
  ErrorCdf cdf;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<Point2D> receivers;
  std::vector<TruthRecord> truth;
  std::vector<SlotEstimate> estimates;
  std::vector<ErrorRecord> errors;
  std::vector<ScheduleEntry> schedule;
  std::vector<DistanceRecord> distances;
  MetricsReport metrics;
};

/// Bootstrap (one exclusive slot per target) followed by the scheduled loop,
/// n_slots slots in total. Deterministic for a given config.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Re-run the receiver side on recorded ranges. `truth` may be empty, in which
/// case no errors are computed.
ExperimentResult replay(const ExperimentConfig& config, std::span<const Point2D> receivers,
                        std::span<const DistanceRecord> distances,
                        std::span<const ScheduleEntry> schedule,
                        std::span<const TruthRecord> truth);

MetricsReport summarize(std::span<const SlotEstimate> estimates,
                        std::span<const ErrorRecord> errors,
                        std::span<const ScheduleEntry> schedule, int loss_events,
                        double separation_distance);

enum class SweepVariable { none, omega, noise };

SweepVariable parse_sweep_variable(const std::string& s);
std::string to_string(SweepVariable v);

/// Apply one sweep value to a config (omega keeps v_u and adjusts L_max).
ExperimentConfig with_sweep_value(const ExperimentConfig& base, SweepVariable var, double value);

struct ExperimentPreset {
  std::string name;
  ExperimentConfig config;
  SweepVariable sweep = SweepVariable::none;
  std::vector<double> sweep_values;
};

/// baseline, static, omega_sweep, noise_sweep.
std::vector<ExperimentPreset> builtin_presets();
ExperimentPreset find_preset(const std::string& name);

struct SweepPoint {
  double value = 0.0;
  std::vector<std::uint64_t> seeds;
  MetricsReport pooled;                 // errors pooled over seeds
  std::vector<MetricsReport> per_seed;
  double mean_efficiency = 0.0;
};

/// Runs every (value, seed) pair, spreading runs over up to `workers` threads
/// (0: hardware concurrency). Results are independent of the worker count.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, SweepVariable var,
                                  std::span<const double> values,
                                  std::span<const std::uint64_t> seeds, unsigned workers = 0);

}  // namespace chorus
