#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "chorus/detection.hpp"
#include "chorus/experiment.hpp"
#include "chorus/feasibility.hpp"
#include "chorus/geometry.hpp"
#include "chorus/io.hpp"
#include "chorus/scheduler.hpp"

namespace py = pybind11;
using namespace chorus;

namespace {

using XY = std::pair<double, double>;

Point2D to_point(const XY& p) { return {p.first, p.second}; }

AcousticParams acoustic(double range, double omega) {
  return AcousticParams::from_separation(range, omega);
}

// Config and metrics cross the boundary as JSON text; the Python side parses it.
std::string run_json(const std::string& config_json, const std::string& preset) {
  const auto config = config_from_json(nlohmann::json::parse(config_json), find_preset(preset).config);
  const auto res = run_experiment(config);
  nlohmann::json out;
  out["config"] = config_to_json(res.config);
  out["metrics"] = metrics_to_json(res.metrics);
  out["errors"] = nlohmann::json::array();
  for (const auto& e : res.errors) out["errors"].push_back(e.error);
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chorus-mode ultrasound localization core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("blind_region_area",
        [](double d, double range, double omega) { return blind_region_area(d, acoustic(range, omega)); },
        py::arg("d"), py::arg("range") = 3.0, py::arg("omega") = 0.33);
  m.def(
      "monte_carlo_blind_area",
      [](double d, double range, double omega, std::uint64_t samples, std::uint64_t seed) {
        const auto est = monte_carlo_blind_area({0, 0}, {d, 0}, acoustic(range, omega), samples, seed);
        return std::make_pair(est.area, est.std_error);
      },
      py::arg("d"), py::arg("range") = 3.0, py::arg("omega") = 0.33, py::arg("samples") = 1000000,
      py::arg("seed") = 1);
  m.def("prob_three_receivers_lb",
        [](double lambda, double d) { return prob_three_receivers_lb({lambda, d}); },
        py::arg("lam"), py::arg("d"));
  m.def("solve_separation_distance", &solve_separation_distance, py::arg("lam"), py::arg("target_prob"));
  m.def(
      "multi_detectable",
      [](const std::vector<XY>& targets, const XY& receiver, double range, double omega) {
        std::vector<Point2D> pts;
        for (const auto& t : targets) pts.push_back(to_point(t));
        return multi_detectable(pts, to_point(receiver), acoustic(range, omega));
      },
      py::arg("targets"), py::arg("receiver"), py::arg("range") = 3.0, py::arg("omega") = 0.33);
  m.def(
      "divide_closest_targets",
      [](const std::vector<XY>& positions, double d_s) {
        std::vector<TargetPosition> t;
        for (std::size_t i = 0; i < positions.size(); ++i) t.push_back({static_cast<int>(i), to_point(positions[i])});
        return divide_closest_targets(t, d_s);
      },
      py::arg("positions"), py::arg("d_s"));
  m.def("_run_json", &run_json, py::arg("config_json"), py::arg("preset") = "baseline",
        py::call_guard<py::gil_scoped_release>());
}
