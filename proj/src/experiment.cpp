#include "chorus/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>
#include <utility>

#include "chorus/feasibility.hpp"
#include "chorus/scheduler.hpp"

namespace chorus {

void ExperimentConfig::validate() const {
  scenario.validate();
  auto check = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string(field) + ": " + what);
  };
  check(n_slots > 0, "n_slots", "must be > 0");
  check(tracks >= 1, "tracks", "must be >= 1");
  check(candidates >= 1, "candidates", "must be >= 1");
  check(max_combinations >= 1, "max_combinations", "must be >= 1");
  check(!v_e || (std::isfinite(*v_e) && *v_e > 0.0), "v_e", "must be > 0");
  check(std::isfinite(floor_std) && floor_std > 0.0, "floor_std", "must be > 0");
  check(ema_weight > 0.0 && ema_weight <= 1.0, "ema_weight", "must be in (0, 1]");
  check(coast_limit >= 0, "coast_limit", "must be >= 0");
  check(arena_margin >= 0.0, "arena_margin", "must be >= 0");
  check(merge_radius >= 0.0, "merge_radius", "must be >= 0");
  check(!consistency_tolerance || *consistency_tolerance > 0.0, "consistency_tolerance",
        "must be > 0");
  check(max_residue > 0.0, "max_residue", "must be > 0");
  check(residue_gate >= 0.0, "residue_gate", "must be >= 0");
  check(separation_target_prob >= 0.0 && separation_target_prob < 1.0,
        "separation_target_prob", "must be in [0, 1)");
  check(std::isfinite(separation_omega_factor) && separation_omega_factor >= 0.0,
        "separation_omega_factor", "must be >= 0");
  check(!separation_distance || (std::isfinite(*separation_distance) && *separation_distance > 0.0),
        "separation_distance", "must be > 0");
}

double ExperimentConfig::effective_v_e() const {
  if (v_e) return *v_e;
  const double bound = (scenario.speed_mean + 4.0 * scenario.speed_std) * scenario.slot_length;
  return std::max(bound, 1e-3);
}

double separation_distance_for(double lambda, double omega, double target_prob,
                               double omega_factor) {
  const double by_omega = omega_factor * omega;
  if (target_prob <= 0.0) return by_omega;
  return std::max(by_omega, solve_separation_distance(lambda, target_prob));
}

double ExperimentConfig::effective_consistency_tolerance() const {
  if (consistency_tolerance) return *consistency_tolerance;
  return std::max(0.01, scenario.noise_max_offset);
}

double ExperimentConfig::effective_separation() const {
  if (separation_distance) return *separation_distance;
  return separation_distance_for(receiver_density(scenario), scenario.acoustic.omega,
                                 separation_target_prob, separation_omega_factor);
}

LocatorConfig ExperimentConfig::locator_config() const {
  LocatorConfig c;
  c.v_e = effective_v_e();
  c.n_candidates = candidates;
  c.max_combinations = max_combinations;
  c.arena = scenario.arena;
  c.arena_margin = arena_margin;
  c.merge_radius = merge_radius;
  c.consistency_tolerance = effective_consistency_tolerance();
  c.residue_gate = residue_gate;
  c.max_residue = max_residue;
  c.refine_with_inliers = refine_with_inliers;
  return c;
}

FilterConfig ExperimentConfig::filter_config() const {
  FilterConfig c;
  c.tracks = tracks;
  c.ema_weight = ema_weight;
  c.floor_std = floor_std;
  c.coast_limit = coast_limit;
  return c;
}

double ErrorCdf::quantile(double q) const {
  if (sorted.empty()) return std::nan("");
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double ErrorCdf::fraction_below(double x) const {
  if (sorted.empty()) return std::nan("");
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

ErrorCdf make_cdf(std::vector<double> errors) {
  std::sort(errors.begin(), errors.end());
  return ErrorCdf{std::move(errors)};
}

std::vector<ErrorRecord> compute_errors(std::span<const SlotEstimate> estimates,
                                        std::span<const TruthRecord> truth) {
  std::map<std::pair<int, int>, Point2D> index;
  for (const auto& t : truth) index[{t.slot, t.target_id}] = t.position;

  std::vector<ErrorRecord> out;
  for (const auto& e : estimates) {
    if (!e.located) continue;
    const auto it = index.find({e.slot, e.target_id});
    if (it == index.end()) {
      throw AlignmentError("no truth for target " + std::to_string(e.target_id) + " in slot " +
                           std::to_string(e.slot));
    }
    out.push_back({e.slot, e.target_id, distance(e.position, it->second)});
  }
  return out;
}

ErrorCdf compute_error_cdf(std::span<const SlotEstimate> estimates,
                           std::span<const TruthRecord> truth) {
  std::vector<double> errs;
  for (const auto& r : compute_errors(estimates, truth)) errs.push_back(r.error);
  return make_cdf(std::move(errs));
}

double compute_efficiency(std::span<const ScheduleEntry> schedule_log) {
  if (schedule_log.empty()) throw std::invalid_argument("compute_efficiency: empty schedule log");
  double total = 0.0;
  for (const auto& e : schedule_log) total += static_cast<double>(e.target_ids.size());
  return total / static_cast<double>(schedule_log.size());
}

MetricsReport summarize(std::span<const SlotEstimate> estimates,
                        std::span<const ErrorRecord> errors,
                        std::span<const ScheduleEntry> schedule, int loss_events,
                        double separation_distance) {
  MetricsReport m;
  std::vector<double> errs;
  errs.reserve(errors.size());
  for (const auto& r : errors) errs.push_back(r.error);
  m.cdf = make_cdf(std::move(errs));
  m.error_count = m.cdf.sorted.size();
  if (!m.cdf.sorted.empty()) {
    m.p50 = m.cdf.quantile(0.5);
    m.p90 = m.cdf.quantile(0.9);
    m.p99 = m.cdf.quantile(0.99);
    m.mean_error = std::accumulate(m.cdf.sorted.begin(), m.cdf.sorted.end(), 0.0) /
                   static_cast<double>(m.cdf.sorted.size());
    m.max_error = m.cdf.sorted.back();
  }
  if (!schedule.empty()) m.efficiency = compute_efficiency(schedule);
  const auto predicted = std::count_if(estimates.begin(), estimates.end(),
                                       [](const SlotEstimate& e) { return !e.located; });
  m.predicted_fraction =
      estimates.empty() ? 0.0 : static_cast<double>(predicted) / static_cast<double>(estimates.size());
  m.loss_events = loss_events;
  m.slots = static_cast<int>(schedule.size());
  m.separation_distance = separation_distance;
  return m;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ScenarioConfig& sc = config.scenario;

  ExperimentResult res;
  res.config = config;
  res.receivers = deploy_receivers(sc);
  const double d_s = config.effective_separation();

  Rng motion_rng(derive_seed(sc.seed, 1));
  Rng noise_rng(derive_seed(sc.seed, 2));
  auto targets = initial_targets(sc, motion_rng);
  ChorusLocator locator(sc.n_targets, res.receivers, config.locator_config(),
                        config.filter_config());

  int slot = 0;
  for (int round = 0; slot < config.n_slots; ++round) {
    const auto known = locator.known_positions();
    const auto unknown = locator.unknown_targets();
    const SlotSchedule schedule = build_schedule(known, unknown, d_s);
    for (const auto& group : schedule.slots) {
      if (slot >= config.n_slots) break;
      if (slot > 0) step_motion(targets, slot, sc, motion_rng);
      for (std::size_t i = 0; i < targets.size(); ++i) {
        res.truth.push_back({slot, static_cast<int>(i), targets[i].position});
      }
      std::vector<ScheduledTarget> transmitting;
      for (int id : group) transmitting.push_back({id, targets[static_cast<std::size_t>(id)].position});
      const auto sets = measure_slot(transmitting, res.receivers, sc, slot, noise_rng);
      for (const auto& set : sets) {
        for (double d : set.distances) res.distances.push_back({slot, set.receiver_id, d});
      }
      auto est = locator.process_slot(slot, group, sets);
      res.estimates.insert(res.estimates.end(), est.begin(), est.end());
      res.schedule.push_back({round, slot, group});
      ++slot;
    }
  }

  res.errors = compute_errors(res.estimates, res.truth);
  res.metrics = summarize(res.estimates, res.errors, res.schedule, locator.loss_events(), d_s);
  return res;
}

ExperimentResult replay(const ExperimentConfig& config, std::span<const Point2D> receivers,
                        std::span<const DistanceRecord> distances,
                        std::span<const ScheduleEntry> schedule,
                        std::span<const TruthRecord> truth) {
  config.validate();
  ExperimentResult res;
  res.config = config;
  res.receivers.assign(receivers.begin(), receivers.end());
  res.schedule.assign(schedule.begin(), schedule.end());
  res.distances.assign(distances.begin(), distances.end());
  res.truth.assign(truth.begin(), truth.end());

  ChorusLocator locator(config.scenario.n_targets, res.receivers, config.locator_config(),
                        config.filter_config());

  // Group ranges by slot, keeping file order within each receiver.
  std::map<int, std::vector<AnonymousDistanceSet>> by_slot;
  for (const auto& r : distances) {
    if (r.receiver_id < 0 || r.receiver_id >= static_cast<int>(receivers.size())) {
      throw std::out_of_range("distance record references unknown receiver " +
                              std::to_string(r.receiver_id));
    }
    auto& sets = by_slot[r.slot];
    auto it = std::find_if(sets.begin(), sets.end(), [&](const AnonymousDistanceSet& s) {
      return s.receiver_id == r.receiver_id;
    });
    if (it == sets.end()) {
      sets.push_back({r.receiver_id, r.slot, {}});
      it = std::prev(sets.end());
    }
    it->distances.push_back(r.distance);
  }

  static const std::vector<AnonymousDistanceSet> kNone;
  for (const auto& entry : schedule) {
    const auto found = by_slot.find(entry.slot);
    const auto& sets = found == by_slot.end() ? kNone : found->second;
    auto est = locator.process_slot(entry.slot, entry.target_ids, sets);
    res.estimates.insert(res.estimates.end(), est.begin(), est.end());
  }

  if (!truth.empty()) res.errors = compute_errors(res.estimates, res.truth);
  res.metrics = summarize(res.estimates, res.errors, res.schedule, locator.loss_events(),
                          config.effective_separation());
  return res;
}

SweepVariable parse_sweep_variable(const std::string& s) {
  if (s == "none") return SweepVariable::none;
  if (s == "omega") return SweepVariable::omega;
  if (s == "noise" || s == "l_o" || s == "noise_max_offset") return SweepVariable::noise;
  throw std::invalid_argument("sweep variable: expected omega|noise|none, got '" + s + "'");
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::none: return "none";
    case SweepVariable::omega: return "omega";
    case SweepVariable::noise: return "noise";
  }
  return "none";
}

ExperimentConfig with_sweep_value(const ExperimentConfig& base, SweepVariable var, double value) {
  ExperimentConfig c = base;
  switch (var) {
    case SweepVariable::none:
      break;
    case SweepVariable::omega:
      c.scenario.acoustic = AcousticParams::from_separation(
          base.scenario.acoustic.range, value, base.scenario.acoustic.ultrasound_speed);
      break;
    case SweepVariable::noise:
      c.scenario.noise_max_offset = value;
      break;
  }
  return c;
}

std::vector<ExperimentPreset> builtin_presets() {
  ExperimentConfig baseline;
  baseline.name = "baseline";

  ExperimentConfig still = baseline;
  still.name = "static";
  still.scenario.n_targets = 1;
  still.scenario.speed_mean = 0.0;
  still.scenario.speed_std = 0.0;
  still.v_e = 0.05;
  still.n_slots = 100;

  ExperimentConfig omega = baseline;
  omega.name = "omega_sweep";
  ExperimentConfig noise = baseline;
  noise.name = "noise_sweep";

  return {
      {"baseline", baseline, SweepVariable::none, {}},
      {"static", still, SweepVariable::none, {}},
      {"omega_sweep", omega, SweepVariable::omega, {0.33, 1.65, 3.30}},
      {"noise_sweep", noise, SweepVariable::noise, {0.01, 0.05, 0.10}},
  };
}

ExperimentPreset find_preset(const std::string& name) {
  for (auto& p : builtin_presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("preset: unknown preset '" + name + "'");
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, SweepVariable var,
                                  std::span<const double> values,
                                  std::span<const std::uint64_t> seeds, unsigned workers) {
  const std::vector<double> vals = var == SweepVariable::none && values.empty()
                                       ? std::vector<double>{0.0}
                                       : std::vector<double>(values.begin(), values.end());
  const std::size_t n_runs = vals.size() * seeds.size();
  std::vector<MetricsReport> reports(n_runs);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n_runs; i = next++) {
      ExperimentConfig c = with_sweep_value(base, var, vals[i / seeds.size()]);
      c.scenario.seed = seeds[i % seeds.size()];
      reports[i] = run_experiment(c).metrics;
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n_runs, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::vector<SweepPoint> out;
  for (std::size_t v = 0; v < vals.size(); ++v) {
    SweepPoint sp;
    sp.value = vals[v];
    sp.seeds.assign(seeds.begin(), seeds.end());
    std::vector<double> pooled;
    double eff = 0.0;
    double predicted = 0.0;
    int losses = 0;
    int slots = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const MetricsReport& m = reports[v * seeds.size() + s];
      pooled.insert(pooled.end(), m.cdf.sorted.begin(), m.cdf.sorted.end());
      eff += m.efficiency;
      predicted += m.predicted_fraction;
      losses += m.loss_events;
      slots += m.slots;
      sp.per_seed.push_back(m);
    }
    const double n = static_cast<double>(std::max<std::size_t>(seeds.size(), 1));
    sp.pooled.cdf = make_cdf(std::move(pooled));
    sp.pooled.error_count = sp.pooled.cdf.sorted.size();
    if (!sp.pooled.cdf.sorted.empty()) {
      sp.pooled.p50 = sp.pooled.cdf.quantile(0.5);
      sp.pooled.p90 = sp.pooled.cdf.quantile(0.9);
      sp.pooled.p99 = sp.pooled.cdf.quantile(0.99);
      sp.pooled.mean_error = std::accumulate(sp.pooled.cdf.sorted.begin(), sp.pooled.cdf.sorted.end(), 0.0) /
                             static_cast<double>(sp.pooled.cdf.sorted.size());
      sp.pooled.max_error = sp.pooled.cdf.sorted.back();
    }
    sp.mean_efficiency = eff / n;
    sp.pooled.efficiency = sp.mean_efficiency;
    sp.pooled.predicted_fraction = predicted / n;
    sp.pooled.loss_events = losses;
    sp.pooled.slots = slots;
    if (!sp.per_seed.empty()) sp.pooled.separation_distance = sp.per_seed.front().separation_distance;
    out.push_back(std::move(sp));
  }
  return out;
}

}  // namespace chorus
