#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chorus/experiment.hpp"

namespace chorus {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// CSV layouts (header line first):
//   truth.csv      slot,target_id,x,y
//   estimates.csv  slot,target_id,x,y,flag        flag in {located, predicted}
//   errors.csv     slot,target_id,error
//   schedule.csv   round,slot,target_ids          ids joined with ';'
//   distances.csv  slot,receiver_id,distance
//   receivers.csv  receiver_id,x,y
void write_truth_csv(std::ostream& os, std::span<const TruthRecord> rows);
void write_estimates_csv(std::ostream& os, std::span<const SlotEstimate> rows);
void write_errors_csv(std::ostream& os, std::span<const ErrorRecord> rows);
void write_schedule_csv(std::ostream& os, std::span<const ScheduleEntry> rows);
void write_distances_csv(std::ostream& os, std::span<const DistanceRecord> rows);
void write_receivers_csv(std::ostream& os, std::span<const Point2D> receivers);

/// Readers throw std::runtime_error with the line number on malformed input.
std::vector<TruthRecord> read_truth_csv(std::istream& is);
std::vector<SlotEstimate> read_estimates_csv(std::istream& is);
std::vector<ScheduleEntry> read_schedule_csv(std::istream& is);
std::vector<DistanceRecord> read_distances_csv(std::istream& is);
std::vector<Point2D> read_receivers_csv(std::istream& is);

/// Config keys are the snake_case field names, e.g. arena_width, grid_spacing,
/// n_targets, slot_length, omega, noise_max_offset, seed, tracks, candidates.
/// Keys absent from `j` keep the value from `base`; unknown keys are rejected
/// with ConfigError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& config);

nlohmann::json metrics_to_json(const MetricsReport& m);

/// Writes truth, estimates, errors, schedule, distances, receivers CSVs and
/// summary.json into `dir` (created if missing).
void write_run_artifacts(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace chorus
