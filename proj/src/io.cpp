#include "chorus/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace chorus {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line_no) {
  T v{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": cannot parse '" + s + "'");
  }
  return v;
}

// Calls row(fields, line_no) for each data line after checking the header.
template <typename Row>
void read_csv(std::istream& is, const std::string& header, Row row) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV, expected header '" + header + "'");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw std::runtime_error("line 1: expected header '" + header + "', got '" + line + "'");
  const std::size_t columns = split(header, ',').size();
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != columns) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " fields");
    }
    row(fields, line_no);
  }
}

const char* kTruthHeader = "slot,target_id,x,y";
const char* kEstimatesHeader = "slot,target_id,x,y,flag";
const char* kErrorsHeader = "slot,target_id,error";
const char* kScheduleHeader = "round,slot,target_ids";
const char* kDistancesHeader = "slot,receiver_id,distance";
const char* kReceiversHeader = "receiver_id,x,y";

void open_out(std::ofstream& f, const std::filesystem::path& p) {
  f.open(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_truth_csv(std::ostream& os, std::span<const TruthRecord> rows) {
  os << kTruthHeader << '\n';
  for (const auto& r : rows) {
    os << r.slot << ',' << r.target_id << ',' << format_double(r.position.x) << ','
       << format_double(r.position.y) << '\n';
  }
}

void write_estimates_csv(std::ostream& os, std::span<const SlotEstimate> rows) {
  os << kEstimatesHeader << '\n';
  for (const auto& r : rows) {
    os << r.slot << ',' << r.target_id << ',' << format_double(r.position.x) << ','
       << format_double(r.position.y) << ',' << (r.located ? "located" : "predicted") << '\n';
  }
}

void write_errors_csv(std::ostream& os, std::span<const ErrorRecord> rows) {
  os << kErrorsHeader << '\n';
  for (const auto& r : rows) {
    os << r.slot << ',' << r.target_id << ',' << format_double(r.error) << '\n';
  }
}

void write_schedule_csv(std::ostream& os, std::span<const ScheduleEntry> rows) {
  os << kScheduleHeader << '\n';
  for (const auto& r : rows) {
    os << r.round << ',' << r.slot << ',';
    for (std::size_t i = 0; i < r.target_ids.size(); ++i) {
      if (i) os << ';';
      os << r.target_ids[i];
    }
    os << '\n';
  }
}

void write_distances_csv(std::ostream& os, std::span<const DistanceRecord> rows) {
  os << kDistancesHeader << '\n';
  for (const auto& r : rows) {
    os << r.slot << ',' << r.receiver_id << ',' << format_double(r.distance) << '\n';
  }
}

void write_receivers_csv(std::ostream& os, std::span<const Point2D> receivers) {
  os << kReceiversHeader << '\n';
  for (std::size_t i = 0; i < receivers.size(); ++i) {
    os << i << ',' << format_double(receivers[i].x) << ',' << format_double(receivers[i].y) << '\n';
  }
}

std::vector<TruthRecord> read_truth_csv(std::istream& is) {
  std::vector<TruthRecord> out;
  read_csv(is, kTruthHeader, [&](const std::vector<std::string>& f, std::size_t n) {
    out.push_back({parse_number<int>(f[0], n), parse_number<int>(f[1], n),
                   {parse_number<double>(f[2], n), parse_number<double>(f[3], n)}});
  });
  return out;
}

std::vector<SlotEstimate> read_estimates_csv(std::istream& is) {
  std::vector<SlotEstimate> out;
  read_csv(is, kEstimatesHeader, [&](const std::vector<std::string>& f, std::size_t n) {
    if (f[4] != "located" && f[4] != "predicted") {
      throw std::runtime_error("line " + std::to_string(n) + ": bad flag '" + f[4] + "'");
    }
    out.push_back({parse_number<int>(f[0], n), parse_number<int>(f[1], n),
                   {parse_number<double>(f[2], n), parse_number<double>(f[3], n)},
                   f[4] == "located"});
  });
  return out;
}

std::vector<ScheduleEntry> read_schedule_csv(std::istream& is) {
  std::vector<ScheduleEntry> out;
  read_csv(is, kScheduleHeader, [&](const std::vector<std::string>& f, std::size_t n) {
    ScheduleEntry e{parse_number<int>(f[0], n), parse_number<int>(f[1], n), {}};
    if (!f[2].empty()) {
      for (const auto& id : split(f[2], ';')) e.target_ids.push_back(parse_number<int>(id, n));
    }
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<DistanceRecord> read_distances_csv(std::istream& is) {
  std::vector<DistanceRecord> out;
  read_csv(is, kDistancesHeader, [&](const std::vector<std::string>& f, std::size_t n) {
    const double d = parse_number<double>(f[2], n);
    if (!(d >= 0.0)) throw std::runtime_error("line " + std::to_string(n) + ": negative distance");
    out.push_back({parse_number<int>(f[0], n), parse_number<int>(f[1], n), d});
  });
  return out;
}

std::vector<Point2D> read_receivers_csv(std::istream& is) {
  std::vector<Point2D> out;
  read_csv(is, kReceiversHeader, [&](const std::vector<std::string>& f, std::size_t n) {
    const int id = parse_number<int>(f[0], n);
    if (id != static_cast<int>(out.size())) {
      throw std::runtime_error("line " + std::to_string(n) + ": receiver ids must be 0..m-1 in order");
    }
    out.push_back({parse_number<double>(f[1], n), parse_number<double>(f[2], n)});
  });
  return out;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig c = std::move(base);
  ScenarioConfig& s = c.scenario;
  double range = s.acoustic.range;
  double omega = s.acoustic.omega;
  double v_u = s.acoustic.ultrasound_speed;
  std::optional<double> aftershock;

  for (const auto& [key, value] : j.items()) {
    auto num = [&]() -> double {
      if (!value.is_number()) throw ConfigError(key + ": expected a number");
      return value.get<double>();
    };
    auto integer = [&]() -> long long {
      if (!value.is_number_integer()) throw ConfigError(key + ": expected an integer");
      return value.get<long long>();
    };
    if (key == "name") {
      if (!value.is_string()) throw ConfigError("name: expected a string");
      c.name = value.get<std::string>();
    } else if (key == "arena_width") s.arena.width = num();
    else if (key == "arena_height") s.arena.height = num();
    else if (key == "receiver_layout") {
      if (!value.is_string()) throw ConfigError("receiver_layout: expected a string");
      const auto kind = value.get<std::string>();
      if (kind == "grid") s.receivers.kind = LayoutKind::grid;
      else if (kind == "explicit") s.receivers.kind = LayoutKind::explicit_positions;
      else if (kind == "poisson") s.receivers.kind = LayoutKind::poisson;
      else throw ConfigError("receiver_layout: expected grid|explicit|poisson, got '" + kind + "'");
    } else if (key == "grid_spacing") s.receivers.grid_spacing = num();
    else if (key == "poisson_lambda") s.receivers.poisson_lambda = num();
    else if (key == "receivers") {
      if (!value.is_array()) throw ConfigError("receivers: expected an array of [x, y]");
      s.receivers.positions.clear();
      for (const auto& p : value) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          throw ConfigError("receivers: expected an array of [x, y]");
        }
        s.receivers.positions.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      s.receivers.kind = LayoutKind::explicit_positions;
    } else if (key == "n_targets") s.n_targets = static_cast<int>(integer());
    else if (key == "slot_length") s.slot_length = num();
    else if (key == "speed_mean") s.speed_mean = num();
    else if (key == "speed_std") s.speed_std = num();
    else if (key == "turn_interval") s.turn_interval = num();
    else if (key == "noise_max_offset") s.noise_max_offset = num();
    else if (key == "range") range = num();
    else if (key == "omega") omega = num();
    else if (key == "ultrasound_speed") v_u = num();
    else if (key == "max_aftershock") aftershock = num();
    else if (key == "seed") {
      const long long seed = integer();
      if (seed < 0) throw ConfigError("seed: must be >= 0");
      s.seed = static_cast<std::uint64_t>(seed);
    } else if (key == "n_slots") c.n_slots = static_cast<int>(integer());
    else if (key == "tracks") c.tracks = static_cast<int>(integer());
    else if (key == "candidates") c.candidates = static_cast<int>(integer());
    else if (key == "max_combinations") c.max_combinations = static_cast<int>(integer());
    else if (key == "v_e") c.v_e = num();
    else if (key == "floor_std") c.floor_std = num();
    else if (key == "ema_weight") c.ema_weight = num();
    else if (key == "coast_limit") c.coast_limit = static_cast<int>(integer());
    else if (key == "arena_margin") c.arena_margin = num();
    else if (key == "merge_radius") c.merge_radius = num();
    else if (key == "consistency_tolerance") c.consistency_tolerance = num();
    else if (key == "residue_gate") c.residue_gate = num();
    else if (key == "max_residue") c.max_residue = num();
    else if (key == "refine_with_inliers") {
      if (!value.is_boolean()) throw ConfigError("refine_with_inliers: expected true or false");
      c.refine_with_inliers = value.get<bool>();
    }
    else if (key == "separation_target_prob") c.separation_target_prob = num();
    else if (key == "separation_omega_factor") c.separation_omega_factor = num();
    else if (key == "separation_distance") c.separation_distance = num();
    else throw ConfigError(key + ": unknown configuration key");
  }

  try {
    s.acoustic = aftershock ? AcousticParams::from_aftershock(range, *aftershock, v_u)
                            : AcousticParams::from_separation(range, omega, v_u);
    if (aftershock && j.contains("omega") && std::abs(s.acoustic.omega - omega) > 1e-9) {
      throw ConfigError("omega: inconsistent with max_aftershock * ultrasound_speed");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  const ScenarioConfig& s = c.scenario;
  nlohmann::json j;
  j["name"] = c.name;
  j["arena_width"] = s.arena.width;
  j["arena_height"] = s.arena.height;
  switch (s.receivers.kind) {
    case LayoutKind::grid:
      j["receiver_layout"] = "grid";
      j["grid_spacing"] = s.receivers.grid_spacing;
      break;
    case LayoutKind::explicit_positions: {
      j["receiver_layout"] = "explicit";
      auto arr = nlohmann::json::array();
      for (const auto& p : s.receivers.positions) arr.push_back({p.x, p.y});
      j["receivers"] = arr;
      break;
    }
    case LayoutKind::poisson:
      j["receiver_layout"] = "poisson";
      j["poisson_lambda"] = s.receivers.poisson_lambda;
      break;
  }
  j["n_targets"] = s.n_targets;
  j["slot_length"] = s.slot_length;
  j["speed_mean"] = s.speed_mean;
  j["speed_std"] = s.speed_std;
  j["turn_interval"] = s.turn_interval;
  j["noise_max_offset"] = s.noise_max_offset;
  j["range"] = s.acoustic.range;
  j["omega"] = s.acoustic.omega;
  j["ultrasound_speed"] = s.acoustic.ultrasound_speed;
  j["seed"] = s.seed;
  j["n_slots"] = c.n_slots;
  j["tracks"] = c.tracks;
  j["candidates"] = c.candidates;
  j["max_combinations"] = c.max_combinations;
  if (c.v_e) j["v_e"] = *c.v_e;
  j["floor_std"] = c.floor_std;
  j["ema_weight"] = c.ema_weight;
  j["coast_limit"] = c.coast_limit;
  j["arena_margin"] = c.arena_margin;
  j["merge_radius"] = c.merge_radius;
  if (c.consistency_tolerance) j["consistency_tolerance"] = *c.consistency_tolerance;
  j["residue_gate"] = c.residue_gate;
  j["max_residue"] = c.max_residue;
  j["refine_with_inliers"] = c.refine_with_inliers;
  j["separation_target_prob"] = c.separation_target_prob;
  j["separation_omega_factor"] = c.separation_omega_factor;
  if (c.separation_distance) j["separation_distance"] = *c.separation_distance;
  return j;
}

nlohmann::json metrics_to_json(const MetricsReport& m) {
  nlohmann::json j;
  j["error_count"] = m.error_count;
  j["p50"] = m.p50;
  j["p90"] = m.p90;
  j["p99"] = m.p99;
  j["mean_error"] = m.mean_error;
  j["max_error"] = m.max_error;
  j["efficiency"] = m.efficiency;
  j["predicted_fraction"] = m.predicted_fraction;
  j["loss_events"] = m.loss_events;
  j["slots"] = m.slots;
  j["separation_distance"] = m.separation_distance;
  // loss rate: declared losses per target-slot transmission
  double transmissions = m.efficiency * static_cast<double>(m.slots);
  j["loss_rate"] = transmissions > 0.0 ? static_cast<double>(m.loss_events) / transmissions : 0.0;
  return j;
}

void write_run_artifacts(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream f;
  open_out(f, dir / "truth.csv");
  write_truth_csv(f, result.truth);
  f.close();
  open_out(f, dir / "estimates.csv");
  write_estimates_csv(f, result.estimates);
  f.close();
  open_out(f, dir / "errors.csv");
  write_errors_csv(f, result.errors);
  f.close();
  open_out(f, dir / "schedule.csv");
  write_schedule_csv(f, result.schedule);
  f.close();
  open_out(f, dir / "distances.csv");
  write_distances_csv(f, result.distances);
  f.close();
  open_out(f, dir / "receivers.csv");
  write_receivers_csv(f, result.receivers);
  f.close();

  nlohmann::json summary;
  summary["config"] = config_to_json(result.config);
  summary["metrics"] = metrics_to_json(result.metrics);
  open_out(f, dir / "summary.json");
  f << summary.dump(2) << '\n';
}

}  // namespace chorus
