// chorus: command line front end for the concurrent-target locating simulator.
//
//   chorus run     --seed N [--preset NAME] [--config FILE] [overrides] [--out DIR]
//   chorus sweep   [--preset omega_sweep|noise_sweep] [--variable V --values ...] [--seeds N]
//   chorus analyze [--range R] [--omega W] [--lambda L] [--out DIR]
//   chorus replay  --in DIR [--config FILE] [--out DIR]

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chorus/feasibility.hpp"
#include "chorus/geometry.hpp"
#include "chorus/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::optional<int> n_targets;
  std::optional<int> n_slots;
  std::optional<double> omega;
  std::optional<double> noise;
  std::optional<double> slot_length;
  std::optional<double> speed_mean;
  std::optional<int> tracks;
  std::optional<int> candidates;
  std::optional<double> separation_distance;
  std::optional<double> v_e;

  void attach(CLI::App* app) {
    app->add_option("--n-targets", n_targets, "number of targets");
    app->add_option("--n-slots", n_slots, "slots per run");
    app->add_option("--omega", omega, "confident separation distance [m]");
    app->add_option("--noise", noise, "max positive range offset l_o [m]");
    app->add_option("--slot-length", slot_length, "slot length [s]");
    app->add_option("--speed-mean", speed_mean, "mean target speed [m/s]");
    app->add_option("--tracks", tracks, "tracks kept per target");
    app->add_option("--candidates", candidates, "candidate positions per slot");
    app->add_option("--separation-distance", separation_distance, "fixed d_s [m]");
    app->add_option("--v-e", v_e, "per-slot displacement bound [m]");
  }

  json as_json() const {
    json j = json::object();
    if (n_targets) j["n_targets"] = *n_targets;
    if (n_slots) j["n_slots"] = *n_slots;
    if (omega) j["omega"] = *omega;
    if (noise) j["noise_max_offset"] = *noise;
    if (slot_length) j["slot_length"] = *slot_length;
    if (speed_mean) j["speed_mean"] = *speed_mean;
    if (tracks) j["tracks"] = *tracks;
    if (candidates) j["candidates"] = *candidates;
    if (separation_distance) j["separation_distance"] = *separation_distance;
    if (v_e) j["v_e"] = *v_e;
    return j;
  }
};

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return json::parse(f);
}

// preset < config file < command line flags
chorus::ExperimentConfig resolve_config(const std::string& preset, const std::string& config_path,
                                        const Overrides& ov) {
  chorus::ExperimentConfig c = chorus::find_preset(preset).config;
  if (!config_path.empty()) c = chorus::config_from_json(read_json_file(config_path), c);
  return chorus::config_from_json(ov.as_json(), c);
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> s(static_cast<std::size_t>(count));
  std::iota(s.begin(), s.end(), first);
  return s;
}

void print_metrics(const chorus::MetricsReport& m) {
  std::printf("p50 %.4f m  p90 %.4f m  p99 %.4f m  efficiency %.3f  losses %d  d_s %.3f m\n",
              m.p50, m.p90, m.p99, m.efficiency, m.loss_events, m.separation_distance);
}

template <typename Fn>
void write_file(const fs::path& p, Fn fn) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  fn(f);
}

int cmd_run(const std::string& preset, const std::string& config_path, const Overrides& ov,
            std::uint64_t seed, const std::string& out) {
  chorus::ExperimentConfig c = resolve_config(preset, config_path, ov);
  c.scenario.seed = seed;
  const chorus::ExperimentResult r = chorus::run_experiment(c);
  chorus::write_run_artifacts(r, out);
  print_metrics(r.metrics);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_sweep(const std::string& preset, const std::string& config_path, const Overrides& ov,
              const std::string& variable, std::vector<double> values, std::uint64_t first_seed,
              int n_seeds, unsigned workers, const std::string& out) {
  const chorus::ExperimentPreset p = chorus::find_preset(preset);
  chorus::ExperimentConfig base = resolve_config(preset, config_path, ov);
  chorus::SweepVariable var = variable.empty() ? p.sweep : chorus::parse_sweep_variable(variable);
  if (values.empty()) values = p.sweep_values;
  if (var == chorus::SweepVariable::none && !values.empty()) {
    throw std::invalid_argument("values: given without a sweep variable");
  }
  const auto seeds = seed_range(first_seed, n_seeds);
  const auto points = chorus::run_sweep(base, var, values, seeds, workers);

  fs::create_directories(out);
  json summary = json::array();
  write_file(fs::path(out) / "sweep.csv", [&](std::ostream& os) {
    os << "variable,value,seeds,p50,p90,p99,mean_efficiency,loss_events\n";
    for (const auto& sp : points) {
      os << chorus::to_string(var) << ',' << chorus::format_double(sp.value) << ','
         << sp.seeds.size() << ',' << chorus::format_double(sp.pooled.p50) << ','
         << chorus::format_double(sp.pooled.p90) << ',' << chorus::format_double(sp.pooled.p99)
         << ',' << chorus::format_double(sp.mean_efficiency) << ',' << sp.pooled.loss_events
         << '\n';
    }
  });
  for (const auto& sp : points) {
    std::printf("%s = %g: ", chorus::to_string(var).c_str(), sp.value);
    print_metrics(sp.pooled);
    json e;
    e["value"] = sp.value;
    e["mean_efficiency"] = sp.mean_efficiency;
    e["pooled"] = chorus::metrics_to_json(sp.pooled);
    summary.push_back(e);
  }
  json doc;
  doc["variable"] = chorus::to_string(var);
  doc["config"] = chorus::config_to_json(base);
  doc["seeds"] = seeds;
  doc["points"] = summary;
  write_file(fs::path(out) / "sweep.json", [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_analyze(double range, double omega, double lambda, std::uint64_t samples,
                std::uint64_t seed, const std::string& out) {
  const chorus::AcousticParams params = chorus::AcousticParams::from_separation(range, omega);
  fs::create_directories(out);

  write_file(fs::path(out) / "blind_region.csv", [&](std::ostream& os) {
    os << "d_ab,cap,s_e,blind_area,blind_fraction\n";
    const double disk = std::numbers::pi * range * range;
    for (int i = 0; i <= 60; ++i) {
      const double d = 2.0 * range * i / 60.0;
      const auto bp = chorus::blind_region_params(d, params);
      const double area = chorus::blind_region_area(d, params);
      os << chorus::format_double(d) << ',' << chorus::format_double(bp.cap) << ','
         << chorus::format_double(bp.s_e) << ',' << chorus::format_double(area) << ','
         << chorus::format_double(area / disk) << '\n';
    }
  });

  write_file(fs::path(out) / "union_blind.csv", [&](std::ostream& os) {
    os << "k,d,union_area,std_error,tdr_area,tdr_lower_bound\n";
    const double disk = std::numbers::pi * range * range;
    for (int k = 2; k <= 7; ++k) {
      for (int i = 1; i <= 12; ++i) {
        const double d = 2.0 * range * i / 12.0;
        const auto est = chorus::symmetric_union_blind_area(k, d, params, samples,
                                                            seed + 100 * k + i);
        os << k << ',' << chorus::format_double(d) << ',' << chorus::format_double(est.area)
           << ',' << chorus::format_double(est.std_error) << ','
           << chorus::format_double(disk - est.area) << ','
           << chorus::format_double(chorus::tdr_lower_bound_area(d)) << '\n';
      }
    }
  });

  write_file(fs::path(out) / "three_receiver_bound.csv", [&](std::ostream& os) {
    os << "lambda,d,p_lower_bound\n";
    for (int li = 1; li <= 10; ++li) {
      for (int di = 1; di <= 12; ++di) {
        const chorus::DeploymentModel m{0.1 * li, 0.5 * di};
        os << chorus::format_double(m.lambda) << ',' << chorus::format_double(m.d) << ','
           << chorus::format_double(chorus::prob_three_receivers_lb(m)) << '\n';
      }
    }
  });

  std::printf("blind region, r = %g m, omega = %g m\n", range, omega);
  std::printf("  %8s %10s %10s\n", "d_ab", "area", "fraction");
  for (double d : {0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) {
    if (d > 2.0 * range) break;
    const double a = chorus::blind_region_area(d, params);
    std::printf("  %8.3f %10.4f %10.4f\n", d, a, a / (std::numbers::pi * range * range));
  }
  std::printf("separation distance at lambda = %g:\n", lambda);
  for (double p : {0.9, 0.95, 0.99, 0.999}) {
    std::printf("  P >= %.3f  ->  d = %.3f m\n", p, chorus::solve_separation_distance(lambda, p));
  }
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_replay(const std::string& in, const std::string& config_path, const std::string& out) {
  const fs::path dir(in);
  chorus::ExperimentConfig c;
  if (!config_path.empty()) {
    c = chorus::config_from_json(read_json_file(config_path));
  } else if (fs::exists(dir / "summary.json")) {
    c = chorus::config_from_json(read_json_file((dir / "summary.json").string()).at("config"));
  } else {
    throw std::invalid_argument("config: no --config given and no summary.json in " + in);
  }
  auto open = [&](const char* name) {
    std::ifstream f(dir / name);
    if (!f) throw std::runtime_error("cannot read " + (dir / name).string());
    return f;
  };
  std::ifstream rf = open("receivers.csv");
  std::ifstream df = open("distances.csv");
  std::ifstream sf = open("schedule.csv");
  const auto receivers = chorus::read_receivers_csv(rf);
  const auto distances = chorus::read_distances_csv(df);
  const auto schedule = chorus::read_schedule_csv(sf);
  std::vector<chorus::TruthRecord> truth;
  if (fs::exists(dir / "truth.csv")) {
    std::ifstream tf = open("truth.csv");
    truth = chorus::read_truth_csv(tf);
  }
  const auto r = chorus::replay(c, receivers, distances, schedule, truth);
  fs::create_directories(out);
  write_file(fs::path(out) / "estimates.csv",
             [&](std::ostream& os) { chorus::write_estimates_csv(os, r.estimates); });
  write_file(fs::path(out) / "errors.csv",
             [&](std::ostream& os) { chorus::write_errors_csv(os, r.errors); });
  json summary;
  summary["config"] = chorus::config_to_json(c);
  summary["metrics"] = chorus::metrics_to_json(r.metrics);
  write_file(fs::path(out) / "summary.json",
             [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
  if (truth.empty()) {
    std::printf("replayed %zu estimates (no truth.csv, errors skipped)\n", r.estimates.size());
  } else {
    print_metrics(r.metrics);
  }
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chorus: concurrent narrowband ultrasound locating simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "simulate one preset and write CSV/JSON outputs");
  std::string run_preset = "baseline", run_config, run_out = "out";
  std::uint64_t run_seed = 0;
  Overrides run_ov;
  run->add_option("--preset", run_preset, "baseline | static | omega_sweep | noise_sweep");
  run->add_option("--config", run_config, "JSON config file")->check(CLI::ExistingFile);
  run->add_option("--seed", run_seed, "RNG seed")->required();
  run->add_option("--out", run_out, "output directory");
  run_ov.attach(run);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "sweep omega or noise over several seeds");
  std::string sw_preset = "omega_sweep", sw_config, sw_var, sw_out = "sweep_out";
  std::vector<double> sw_values;
  std::uint64_t sw_seed = 1;
  int sw_seeds = 10;
  unsigned sw_workers = 0;
  Overrides sw_ov;
  sweep->add_option("--preset", sw_preset, "preset providing the base config and sweep values");
  sweep->add_option("--config", sw_config, "JSON config file")->check(CLI::ExistingFile);
  sweep->add_option("--variable", sw_var, "omega | noise");
  sweep->add_option("--values", sw_values, "sweep values [m]");
  sweep->add_option("--seed", sw_seed, "first seed");
  sweep->add_option("--seeds", sw_seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  sweep->add_option("--workers", sw_workers, "threads (0: all cores)");
  sweep->add_option("--out", sw_out, "output directory");
  sw_ov.attach(sweep);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "blind-region and deployment feasibility tables");
  double an_range = 3.0, an_omega = 0.33, an_lambda = 0.25;
  std::uint64_t an_samples = 200000, an_seed = 1;
  std::string an_out = "analysis";
  analyze->add_option("--range", an_range, "audible range r [m]");
  analyze->add_option("--omega", an_omega, "confident separation distance [m]");
  analyze->add_option("--lambda", an_lambda, "receiver density [1/m^2]");
  analyze->add_option("--samples", an_samples, "Monte Carlo samples per union estimate");
  analyze->add_option("--seed", an_seed, "RNG seed");
  analyze->add_option("--out", an_out, "output directory");

  // replay
  auto* rep = app.add_subcommand("replay", "re-run the locator on recorded distance CSVs");
  std::string rp_in, rp_config, rp_out = "replay_out";
  rep->add_option("--in", rp_in, "directory with receivers.csv, distances.csv, schedule.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  rep->add_option("--config", rp_config, "JSON config (default: <in>/summary.json)")
      ->check(CLI::ExistingFile);
  rep->add_option("--out", rp_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_preset, run_config, run_ov, run_seed, run_out);
    if (*sweep) {
      return cmd_sweep(sw_preset, sw_config, sw_ov, sw_var, sw_values, sw_seed, sw_seeds,
                       sw_workers, sw_out);
    }
    if (*analyze) return cmd_analyze(an_range, an_omega, an_lambda, an_samples, an_seed, an_out);
    if (*rep) return cmd_replay(rp_in, rp_config, rp_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
