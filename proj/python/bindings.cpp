#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "rampsim/bridge_model.hpp"
#include "rampsim/error.hpp"
#include "rampsim/param_estimation.hpp"
#include "rampsim/pipeline.hpp"
#include "rampsim/power_pipeline.hpp"
#include "rampsim/segmentation.hpp"
#include "rampsim/simulator.hpp"
#include "rampsim/validation.hpp"

namespace py = pybind11;
using namespace rampsim;

namespace {

State to_state(int v) { return state_from_value(v); }

PowerSeries make_series(const std::vector<double>& generated, const std::vector<double>& corrected, double limit,
                        double capacity) {
  PowerSeries s;
  s.generated = generated;
  s.corrected = corrected;
  s.limit = limit;
  s.rated_capacity = capacity;
  s.steps.resize(generated.size());
  for (std::size_t k = 0; k < generated.size(); ++k) s.steps[k] = static_cast<std::int64_t>(k);
  return s;
}

}  // namespace

PYBIND11_MODULE(_rampsim, m) {
  m.doc() = "Ramp-limited wind power, semi-Markov charge model and battery penalty simulation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<InvalidParameterError>(m, "InvalidParameterError", base.ptr());
  auto est = py::register_exception<EstimationError>(m, "EstimationError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", est.ptr());
  py::register_exception<SimulationError>(m, "SimulationError", base.ptr());
  py::register_exception<StageError>(m, "StageError", base.ptr());

  py::class_<TurbineSpec>(m, "TurbineSpec")
      .def(py::init<>())
      .def_readwrite("cut_in_speed", &TurbineSpec::cut_in_speed)
      .def_readwrite("cut_out_speed", &TurbineSpec::cut_out_speed)
      .def_readwrite("rated_speed", &TurbineSpec::rated_speed)
      .def_readwrite("rated_capacity", &TurbineSpec::rated_capacity);

  m.def("wind_to_power", &wind_to_power, py::arg("speed"), py::arg("turbine") = TurbineSpec{});

  m.def(
      "apply_ramp_limit",
      [](const std::vector<double>& generated, double limit, std::optional<double> initial, double capacity) {
        return apply_ramp_limit(make_series(generated, {}, 0.0, capacity), {limit, 1.0}, initial).corrected;
      },
      py::arg("generated"), py::arg("limit"), py::arg("initial") = py::none(), py::arg("rated_capacity") = 2.0,
      "Corrected power for a generated power series and a per-step ramp limit (MW).");

  m.def(
      "generate_synthetic_wind",
      [](std::size_t n, double shape, double scale, double autocorrelation, std::uint64_t seed) {
        return generate_synthetic_wind({n, shape, scale, autocorrelation, seed});
      },
      py::arg("n_steps"), py::arg("shape") = 2.0, py::arg("scale") = 8.0, py::arg("autocorrelation") = 0.9,
      py::arg("seed") = 1);

  m.def(
      "extract_renewal",
      [](const std::vector<double>& generated, const std::vector<double>& corrected, double limit, double tol) {
        const auto seg = extract_segments(make_series(generated, corrected, limit, 2.0), tol);
        py::list out;
        for (const auto& r : seg.renewal)
          out.append(py::dict(py::arg("state") = state_value(r.state), py::arg("jump_time") = r.jump_time,
                              py::arg("sojourn") = r.sojourn, py::arg("censored") = r.censored));
        return out;
      },
      py::arg("generated"), py::arg("corrected"), py::arg("limit") = 0.0,
      py::arg("sign_tolerance") = kDefaultSignTolerance,
      "Renewal points (state, jump_time, sojourn, censored) of a corrected series.");

  m.def(
      "estimate_kernel",
      [](const std::vector<double>& generated, const std::vector<double>& corrected) {
        const auto seg = extract_segments(make_series(generated, corrected, 0.0, 2.0));
        return estimate_kernel(seg.renewal).to_json().dump();
      },
      py::arg("generated"), py::arg("corrected"), "Kernel estimate as a JSON string.");

  m.def("triangle", &triangle, py::arg("t"), py::arg("tau"), py::arg("height"), py::arg("sojourn"));
  m.def(
      "compute_initial_power",
      [](int side, double entry, int x, double limit, double capacity) {
        return compute_initial_power(to_state(side), entry, x, limit, capacity);
      },
      py::arg("side"), py::arg("entry_power"), py::arg("sojourn"), py::arg("limit"), py::arg("rated_capacity") = 2.0);
  m.def(
      "bb_transition",
      [](double y, double s, double t, double horizon, double sigma) {
        const auto law = bb_transition(y, s, t, horizon, sigma);
        return py::make_tuple(law.mean, law.variance);
      },
      py::arg("y_prev"), py::arg("s"), py::arg("t"), py::arg("horizon"), py::arg("sigma"));
  m.def(
      "sample_two_piece_bridge",
      [](int tau, int x, double sigma, std::uint64_t seed) {
        Rng rng(seed);
        return sample_two_piece_bridge(tau, x, sigma, rng);
      },
      py::arg("tau"), py::arg("sojourn"), py::arg("sigma"), py::arg("seed") = 0);
  m.def(
      "mle_sigma",
      [](const std::vector<double>& error, const std::vector<bool>& clipped, int tau, int x, int min_terms) {
        return mle_sigma({error, clipped}, tau, x, min_terms).sigma;
      },
      py::arg("error"), py::arg("clipped"), py::arg("tau"), py::arg("sojourn"), py::arg("min_terms") = 2);

  m.def("discounted_penalty", [](const std::vector<double>& m_, double r) { return discounted_penalty(m_, r); },
        py::arg("penalty"), py::arg("rate"));
  m.def("rel_l2_error",
        [](const std::vector<double>& real, const std::vector<double>& sim) { return rel_l2_error(real, sim); },
        py::arg("real"), py::arg("sim"));
  m.def("mape", [](const std::vector<double>& real, const std::vector<double>& sim) { return mape(real, sim).value; },
        py::arg("real"), py::arg("sim"));

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("parse", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def_readwrite("input_path", &RunConfig::input_path)
      .def_property(
          "synthetic_hours", [](const RunConfig& c) { return c.synthetic.n_steps; },
          [](RunConfig& c, std::size_t n) { c.synthetic.n_steps = n; })
      .def_readwrite("limits", &RunConfig::limits)
      .def_readwrite("horizon", &RunConfig::horizon)
      .def_readwrite("paths", &RunConfig::paths)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("initial_law", &RunConfig::initial_law)
      .def_readwrite("threads", &RunConfig::threads)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def("hash", &RunConfig::hash)
      .def("canonical", &RunConfig::canonical);

  m.def(
      "run_stage", [](const std::string& stage, const RunConfig& cfg) { run_stage(parse_stage(stage), cfg); },
      py::arg("stage"), py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("run_pipeline", &run_pipeline, py::arg("config"), py::call_guard<py::gil_scoped_release>());
}
