#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chorus/experiment.hpp"
#include "chorus/feasibility.hpp"
#include "chorus/io.hpp"

using namespace chorus;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("chorus_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ExperimentConfig short_baseline(std::uint64_t seed) {
  auto c = find_preset("baseline").config;
  c.n_slots = 120;
  c.scenario.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("error cdf examples") {
  CHECK(make_cdf({0.01, 0.02, 0.03, 0.04}).quantile(0.5) == doctest::Approx(0.025));
  const auto zero = make_cdf({0, 0, 0});
  CHECK(zero.quantile(0.0) == 0.0);
  CHECK(zero.quantile(1.0) == 0.0);
  CHECK(zero.fraction_below(0.0) == 1.0);
  CHECK(zero.fraction_below(-1e-12) == 0.0);

  std::vector<double> e;
  for (int i = 0; i < 200; ++i) e.push_back(0.001 * ((i * 37) % 101));
  const auto sorted = make_cdf(e);
  std::shuffle(e.begin(), e.end(), std::mt19937_64(5));
  CHECK(make_cdf(e).sorted == sorted.sorted);
}

TEST_CASE("errors are matched by target id") {
  const std::vector<TruthRecord> truth{{0, 0, {1, 1}}, {0, 1, {5, 5}}, {1, 0, {1.1, 1}}};
  const std::vector<SlotEstimate> est{{0, 1, {5, 5.03}, true}, {0, 0, {1, 1}, true}, {1, 0, {0, 0}, false}};
  const auto errors = compute_errors(est, truth);
  REQUIRE(errors.size() == 2);
  CHECK(errors[0].error == doctest::Approx(0.03));
  CHECK(errors[1].error == 0.0);

  const std::vector<SlotEstimate> stray{{3, 0, {0, 0}, true}};
  CHECK_THROWS_AS(compute_errors(stray, truth), AlignmentError);
}

TEST_CASE("efficiency examples") {
  std::vector<ScheduleEntry> all;
  for (int s = 0; s < 6; ++s) all.push_back({s, s, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}});
  CHECK(compute_efficiency(all) == 10.0);

  std::vector<ScheduleEntry> alt;
  for (int s = 0; s < 8; ++s) {
    alt.push_back({s / 2, s, s % 2 == 0 ? std::vector<int>{0, 1, 2, 3, 4} : std::vector<int>{5}});
  }
  CHECK(compute_efficiency(alt) == 3.0);

  std::vector<ScheduleEntry> boot;
  for (int s = 0; s < 10; ++s) boot.push_back({0, s, {s}});
  CHECK(compute_efficiency(boot) == 1.0);
  CHECK_THROWS(compute_efficiency(std::vector<ScheduleEntry>{}));
}

TEST_CASE("static target is located exactly") {
  const auto res = run_experiment(find_preset("static").config);
  REQUIRE(!res.errors.empty());
  for (const auto& e : res.errors) CHECK(e.error <= 1e-6);
}

TEST_CASE("noiseless single moving target is tracked exactly") {
  auto c = find_preset("baseline").config;
  c.scenario.n_targets = 1;
  c.n_slots = 300;
  c.scenario.seed = 4;
  const auto res = run_experiment(c);
  REQUIRE(res.errors.size() > 250);
  for (const auto& e : res.errors) CHECK(e.error <= 1e-6);
}

TEST_CASE("schedule log holds every target once per round") {
  const auto res = run_experiment(short_baseline(3));
  std::map<int, std::multiset<int>> rounds;
  for (const auto& s : res.schedule) rounds[s.round].insert(s.target_ids.begin(), s.target_ids.end());
  const int last = res.schedule.back().round;
  for (const auto& [round, ids] : rounds) {
    if (round == last) continue;  // the final round may be cut by n_slots
    CHECK(ids.size() == 10);
    CHECK(std::set<int>(ids.begin(), ids.end()).size() == 10);
  }
  CHECK(res.metrics.efficiency >= 1.0);
  CHECK(res.metrics.efficiency <= 10.0);
}

TEST_CASE("runs are byte-identical per seed") {
  const auto a = scratch_dir("det_a");
  const auto b = scratch_dir("det_b");
  write_run_artifacts(run_experiment(short_baseline(9)), a);
  write_run_artifacts(run_experiment(short_baseline(9)), b);
  for (const char* f : {"truth.csv", "estimates.csv", "errors.csv", "schedule.csv", "summary.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("replay reproduces the run's estimates from its csv files") {
  auto c = short_baseline(12);
  c.scenario.noise_max_offset = 0.02;
  const auto run = run_experiment(c);
  const auto dir = scratch_dir("replay");
  write_run_artifacts(run, dir);

  std::ifstream rf(dir / "receivers.csv"), df(dir / "distances.csv"), sf(dir / "schedule.csv"),
      tf(dir / "truth.csv");
  const auto receivers = read_receivers_csv(rf);
  const auto distances = read_distances_csv(df);
  const auto schedule = read_schedule_csv(sf);
  const auto truth = read_truth_csv(tf);
  const auto again = replay(c, receivers, distances, schedule, truth);

  REQUIRE(again.estimates.size() == run.estimates.size());
  for (std::size_t i = 0; i < run.estimates.size(); ++i) {
    CHECK(again.estimates[i].target_id == run.estimates[i].target_id);
    CHECK(again.estimates[i].located == run.estimates[i].located);
    CHECK(distance(again.estimates[i].position, run.estimates[i].position) <= 1e-9);
  }
  CHECK(again.metrics.p90 == doctest::Approx(run.metrics.p90));
}

TEST_CASE("csv round trips") {
  const std::vector<TruthRecord> truth{{0, 1, {0.1, 1.0 / 3.0}}, {2, 0, {9.999999, 1e-9}}};
  std::stringstream ts;
  write_truth_csv(ts, truth);
  const auto t2 = read_truth_csv(ts);
  REQUIRE(t2.size() == 2);
  CHECK(t2[0].position == truth[0].position);
  CHECK(t2[1].position == truth[1].position);

  const std::vector<SlotEstimate> est{{4, 2, {1.5, 2.25}, true}, {5, 2, {1.6, 2.25}, false}};
  std::stringstream es;
  write_estimates_csv(es, est);
  const auto e2 = read_estimates_csv(es);
  REQUIRE(e2.size() == 2);
  CHECK(e2[1].located == false);
  CHECK(e2[0].position == est[0].position);

  const std::vector<ScheduleEntry> sched{{0, 0, {3}}, {1, 1, {0, 2, 5}}};
  std::stringstream ss;
  write_schedule_csv(ss, sched);
  const auto s2 = read_schedule_csv(ss);
  REQUIRE(s2.size() == 2);
  CHECK(s2[1].target_ids == std::vector<int>{0, 2, 5});

  std::stringstream bad("slot,target_id,x\n0,0,1\n");
  CHECK_THROWS_AS(read_truth_csv(bad), std::runtime_error);
}

TEST_CASE("config json") {
  const auto base = find_preset("baseline").config;
  SUBCASE("keys override the base") {
    const auto c = config_from_json(nlohmann::json{{"omega", 1.65}, {"n_targets", 4}, {"seed", 17}}, base);
    CHECK(c.scenario.acoustic.omega == doctest::Approx(1.65));
    CHECK(c.scenario.acoustic.max_aftershock == doctest::Approx(0.005));
    CHECK(c.scenario.n_targets == 4);
    CHECK(c.scenario.seed == 17);
    CHECK(c.n_slots == base.n_slots);
  }
  SUBCASE("unknown keys are rejected by name") {
    try {
      config_from_json(nlohmann::json{{"n_target", 4}}, base);
      FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).rfind("n_target:", 0) == 0);
    }
  }
  SUBCASE("invalid values name the field") {
    try {
      config_from_json(nlohmann::json{{"slot_length", -0.1}}, base);
      FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).rfind("slot_length:", 0) == 0);
    }
  }
  SUBCASE("round trip") {
    const auto c = config_from_json(config_to_json(base));
    CHECK(config_to_json(c) == config_to_json(base));
  }
}

TEST_CASE("separation policy") {
  auto c = find_preset("baseline").config;
  CHECK(c.effective_separation() == doctest::Approx(0.66));
  c.separation_target_prob = 0.99;
  CHECK(c.effective_separation() == doctest::Approx(solve_separation_distance(0.25, 0.99)));
  c.separation_distance = 1.25;
  CHECK(c.effective_separation() == 1.25);
}

TEST_CASE("presets") {
  CHECK(find_preset("omega_sweep").sweep_values == std::vector<double>{0.33, 1.65, 3.30});
  CHECK(find_preset("noise_sweep").sweep_values == std::vector<double>{0.01, 0.05, 0.10});
  CHECK_THROWS(find_preset("nope"));
  for (const auto& p : builtin_presets()) {
    for (double v : p.sweep_values) CHECK(v > 0.0);
  }
}
