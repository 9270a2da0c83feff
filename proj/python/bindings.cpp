#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bimodal/experiment.hpp"

namespace py = pybind11;
using namespace bimodal;

namespace {

Mode make_mode(const std::string& name, int direction) {
  if (name == "aerial") return Mode::aerial();
  if (name == "ground") return Mode::ground(direction);
  throw ConfigError("mode must be 'aerial' or 'ground'");
}

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["ticks"] = s.ticks;
  d["duration"] = s.duration;
  d["rmse"] = s.rmse;
  d["max_error"] = s.max_error;
  d["max_lateral_error"] = s.max_lateral_error;
  d["mean_power"] = s.mean_power;
  d["peak_speed"] = s.peak_speed;
  d["slip_ticks"] = s.slip_ticks;
  d["lift_off_ticks"] = s.lift_off_ticks;
  d["relaxed_ticks"] = s.relaxed_ticks;
  d["degraded_ticks"] = s.degraded_ticks;
  d["mode_switches"] = s.mode_switches;
  d["switch_input_jump"] = s.switch_input_jump;
  d["completed"] = s.completed;
  return d;
}

py::dict track_dict(const TrackResult& r) {
  py::dict d;
  d["outcome"] = to_string(r.log.outcome);
  d["message"] = r.log.message;
  d["summary"] = summary_dict(r.summary);
  std::ostringstream csv;
  write_runlog_csv(csv, r.log);
  d["csv"] = csv.str();
  return d;
}

}  // namespace

PYBIND11_MODULE(_bimodal, m) {
  m.doc() = "Bi-modal bi-copter model, references, tracking control and analysis";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("mass", &VehicleParams::mass)
      .def_readwrite("wheel_mass", &VehicleParams::wheel_mass)
      .def_readwrite("inertia", &VehicleParams::inertia)
      .def_readwrite("arm_length", &VehicleParams::arm_length)
      .def_readwrite("servo_offset", &VehicleParams::servo_offset)
      .def_readwrite("axle_offset", &VehicleParams::axle_offset)
      .def_readwrite("wheel_radius", &VehicleParams::wheel_radius)
      .def_readwrite("wheel_offset", &VehicleParams::wheel_offset)
      .def_readwrite("rolling_friction", &VehicleParams::rolling_friction)
      .def_readwrite("lateral_friction", &VehicleParams::lateral_friction)
      .def_readwrite("thrust_coeff", &VehicleParams::thrust_coeff)
      .def_readwrite("torque_coeff", &VehicleParams::torque_coeff)
      .def_readwrite("gravity", &VehicleParams::gravity)
      .def_readwrite("max_thrust", &VehicleParams::max_thrust)
      .def_readwrite("max_tilt", &VehicleParams::max_tilt)
      .def_readwrite("air_density", &VehicleParams::air_density)
      .def_readwrite("disk_area", &VehicleParams::disk_area)
      .def_readwrite("contact_height", &VehicleParams::contact_height)
      .def("validate", &VehicleParams::validate)
      .def("weight", &VehicleParams::weight);

  // State and input cross the boundary as packed vectors: x = p v q(wxyz) omega, u = T1 T2 d1 d2.
  m.def(
      "derivative",
      [](const StateVector& x, const InputVector& u, const std::string& mode, int direction, const VehicleParams& p) {
        return derivative(RobotState::unpack(x), ControlInput::unpack(u), make_mode(mode, direction), p).pack();
      },
      py::arg("x"), py::arg("u"), py::arg("mode") = "aerial", py::arg("direction") = 1,
      py::arg("params") = VehicleParams{});
  m.def(
      "rk4_step",
      [](const StateVector& x, const InputVector& u, const std::string& mode, double dt, const VehicleParams& p) {
        return rk4_step(x, ControlInput::unpack(u), make_mode(mode, 1), dt, p);
      },
      py::arg("x"), py::arg("u"), py::arg("mode"), py::arg("dt"), py::arg("params") = VehicleParams{});
  m.def(
      "ground_normals",
      [](const StateVector& x, const InputVector& u, const VehicleParams& p) {
        const DerivativeResult r = evaluate(RobotState::unpack(x), ControlInput::unpack(u), Mode::ground(), p);
        return std::make_pair(r.reaction->F_n_left, r.reaction->F_n_right);
      },
      py::arg("x"), py::arg("u"), py::arg("params") = VehicleParams{});

  m.def("ideal_power", &ideal_power, py::arg("thrust"), py::arg("disk_area"), py::arg("air_density"));
  m.def("steering_ratio", &steering_ratio, py::arg("params") = VehicleParams{});
  m.def("energy_saving", py::overload_cast<double, double, double>(&energy_saving), py::arg("aerial_power"),
        py::arg("ground_power"), py::arg("standby_power") = 0.0);
  m.def(
      "width_ratios",
      [](const VehicleParams& p) {
        const double eta = hover_efficiency(p.mass, 2, p.disk_area, p.air_density, p.gravity);
        py::dict d;
        for (const LayoutSpec& l : all_layouts())
          d[py::str(to_string(l.kind))] = traversing_width(l, p.mass, eta, p.air_density, 0.0, p.gravity).ratio;
        return d;
      },
      py::arg("params") = VehicleParams{});

  m.def("bundled_scenarios", &bundled_scenarios);
  m.def("bundled_scenario_text", &bundled_scenario_text, py::arg("name"));
  m.def("validate_scenario", [](const std::string& text) { parse_scenario(text).validate(); }, py::arg("json_text"));
  m.def(
      "reference",
      [](const std::string& text, double t) {
        const ScenarioConfig c = parse_scenario(text);
        const VehicleParams p = c.model_params();
        ReferenceGenerator gen(build_trajectory(c.trajectory, p), p, flatness_options(c));
        const ReferencePoint r = gen.at(t);
        py::dict d;
        d["state"] = r.state.pack();
        d["input"] = r.input.pack();
        d["mode"] = r.mode.is_ground() ? "ground" : "aerial";
        d["duration"] = gen.trajectory().duration();
        return d;
      },
      py::arg("json_text"), py::arg("t"));
  m.def(
      "run_track",
      [](const std::string& text) {
        const ScenarioConfig c = parse_scenario(text);
        py::gil_scoped_release release;
        TrackResult r = run_track(c);
        py::gil_scoped_acquire acquire;
        return track_dict(r);
      },
      py::arg("json_text"));
  m.def(
      "run_energy_compare",
      [](const std::string& text) {
        const EnergyResult r = run_energy_compare(parse_scenario(text));
        py::dict d;
        d["aerial_power"] = r.metrics.aerial_power;
        d["ground_power"] = r.metrics.ground_power;
        d["xi"] = r.metrics.xi;
        return d;
      },
      py::arg("json_text"));
}
