#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bimodal/experiment.hpp"

namespace bimodal {

namespace detail {
// Generated at configure time from scenarios/*.json.
extern const std::vector<std::pair<std::string, std::string>> kBundledScenarios;
}  // namespace detail

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

// Strict view of one JSON object: every key must be consumed, types are checked.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& child(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string at(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void get(const char* key, double& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    out = v.get<double>();
  }
  void get(const char* key, std::optional<double>& out) {
    if (!take(key)) return;
    double v = 0.0;
    seen_.erase(key);
    get(key, v);
    out = v;
  }
  void get(const char* key, int& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    out = v.get<int>();
  }
  void get(const char* key, std::uint64_t& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(at(key), "expected a nonnegative integer");
    out = v.get<std::uint64_t>();
  }
  void get(const char* key, bool& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    out = v.get<std::string>();
  }
  template <int N>
  void get(const char* key, Eigen::Matrix<double, N, 1>& out) {
    if (!take(key)) return;
    out = vector<N>(j_.at(key), at(key));
  }
  template <int N>
  void get(const char* key, std::optional<Eigen::Matrix<double, N, 1>>& out) {
    if (!take(key)) return;
    out = vector<N>(j_.at(key), at(key));
  }

  template <int N>
  static Eigen::Matrix<double, N, 1> vector(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N))
      fail(where, "expected an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number()) fail(where, "expected an array of " + std::to_string(N) + " numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key().c_str()), "unknown key");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + (where.empty() ? std::string("<root>") : where) + ": " + what);
  }

 private:
  bool take(const char* key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_vehicle(Reader r, VehicleParams& p) {
  r.get("mass", p.mass);
  r.get("wheel_mass", p.wheel_mass);
  r.get("inertia", p.inertia);
  r.get("arm_length", p.arm_length);
  r.get("servo_offset", p.servo_offset);
  r.get("axle_offset", p.axle_offset);
  r.get("wheel_radius", p.wheel_radius);
  r.get("wheel_offset", p.wheel_offset);
  r.get("rolling_friction", p.rolling_friction);
  r.get("lateral_friction", p.lateral_friction);
  r.get("thrust_coeff", p.thrust_coeff);
  r.get("torque_coeff", p.torque_coeff);
  r.get("gravity", p.gravity);
  r.get("max_thrust", p.max_thrust);
  r.get("max_tilt", p.max_tilt);
  r.get("air_density", p.air_density);
  r.get("disk_area", p.disk_area);
  // The CoM sits on the axle height unless stated otherwise.
  p.contact_height = p.wheel_radius;
  r.get("contact_height", p.contact_height);
  r.get("speed_deadband", p.speed_deadband);
  r.done();
}

SegmentConfig read_segment(Reader r) {
  SegmentConfig s;
  r.get("type", s.type);
  r.get("mode", s.mode);
  r.get("direction", s.direction);
  r.get("A", s.A);
  r.get("B", s.B);
  r.get("omega", s.omega);
  r.get("fit_speed", s.fit_speed);
  r.get("fit_accel", s.fit_accel);
  r.get("aspect", s.aspect);
  r.get("laps", s.laps);
  r.get("radius", s.radius);
  r.get("velocity", s.velocity);
  r.get("duration", s.duration);
  if (r.has("start")) {
    const json& v = r.child("start");
    if (v.is_array() && v.size() == 2) {
      const Eigen::Vector2d xy = Reader::vector<2>(v, r.at("start"));
      s.start = Vec3(xy.x(), xy.y(), 0.0);
    } else {
      Reader::fail(r.at("start"), "expected an array of 2 numbers");
    }
  }
  r.get("altitude", s.altitude);
  r.get("rise", s.rise);
  r.get("yaw", s.yaw);
  r.done();
  return s;
}

void read_trajectory(Reader r, TrajectoryConfig& t) {
  if (r.has("segments")) {
    const json& segs = r.child("segments");
    if (!segs.is_array()) Reader::fail(r.at("segments"), "expected an array");
    t.segments.clear();
    for (std::size_t i = 0; i < segs.size(); ++i)
      t.segments.push_back(read_segment(Reader(segs[i], r.at("segments") + "[" + std::to_string(i) + "]")));
  }
  r.get("v_max", t.v_max);
  r.get("a_max", t.a_max);
  r.get("thrust_ratio", t.thrust_ratio);
  r.get("switch_thrust_ratio", t.switch_thrust_ratio);
  r.get("switch_ramp", t.switch_ramp);
  r.get("clamp_inputs", t.clamp_inputs);
  r.done();
}

void read_controller(Reader r, NmpcConfig& c) {
  r.get("horizon", c.horizon);
  r.get("dt", c.dt);
  r.get("q_position", c.q_position);
  r.get("q_velocity", c.q_velocity);
  r.get("q_attitude", c.q_attitude);
  r.get("q_rate", c.q_rate);
  r.get("q_input", c.q_input);
  r.get("u_min", c.u_min);
  r.get("u_max", c.u_max);
  r.get("jacobian_step", c.jacobian_step);
  r.get("max_qp_iterations", c.max_qp_iterations);
  r.get("qp_tolerance", c.qp_tolerance);
  r.get("normal_force_margin", c.normal_force_margin);
  r.get("slack_penalty", c.slack_penalty);
  r.get("sqp_iterations", c.sqp_iterations);
  r.get("opposed_tilt", c.opposed_tilt);
  r.done();
}

void read_environment(Reader r, EnvironmentConfig& e) {
  r.get("slip_model", e.slip_model);
  r.get("mu", e.mu);
  r.get("mu_s", e.mu_s);
  r.get("lateral_slip_threshold", e.lateral_slip_threshold);
  r.get("position_noise", e.position_noise);
  r.get("attitude_noise", e.attitude_noise);
  r.get("control_rate", e.control_rate);
  r.get("sim_rate", e.sim_rate);
  r.done();
}

void read_output(Reader r, OutputConfig& o) {
  r.get("decimation", o.decimation);
  r.get("record_timing", o.record_timing);
  r.get("planar_rmse", o.planar_rmse);
  r.done();
}

void read_benchmark(Reader r, BenchmarkConfig& b) {
  if (r.has("levels")) {
    const json& levels = r.child("levels");
    if (!levels.is_array() || levels.empty()) Reader::fail(r.at("levels"), "expected a nonempty array");
    b.levels.clear();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const Eigen::Vector2d l = Reader::vector<2>(levels[i], r.at("levels") + "[" + std::to_string(i) + "]");
      b.levels.push_back({l.x(), l.y()});
    }
  }
  r.get("lateral_failure", b.lateral_failure);
  r.get("aspect", b.aspect);
  r.done();
}

void read_energy(Reader r, EnergyConfig& e) {
  r.get("v_max", e.v_max);
  r.get("a_max", e.a_max);
  r.get("aspect", e.aspect);
  r.get("laps", e.laps);
  r.get("altitude", e.altitude);
  r.get("ground_thrust_ratio", e.ground_thrust_ratio);
  r.get("standby_power", e.standby_power);
  r.done();
}

template <int N>
ordered array(const Eigen::Matrix<double, N, 1>& v) {
  ordered a = ordered::array();
  for (int i = 0; i < N; ++i) a.push_back(v[i]);
  return a;
}

void positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config: " + what + " must be positive");
}

}  // namespace

VehicleParams ScenarioConfig::model_params() const {
  VehicleParams p = vehicle;
  if (environment.mu) p.rolling_friction = *environment.mu;
  if (environment.mu_s) p.lateral_friction = *environment.mu_s;
  return p;
}

void ScenarioConfig::validate() const {
  if (schema_version != kSchemaVersion)
    throw ConfigError("config: schema_version " + std::to_string(schema_version) + " is not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");
  static const std::set<std::string> kinds{"track", "energy_compare", "benchmark_slippery", "width_report"};
  if (!kinds.count(kind)) throw ConfigError("config: unknown scenario kind '" + kind + "'");
  const VehicleParams p = model_params();
  p.validate();
  controller.validate(p);
  if (duration) positive(*duration, "duration");
  positive(environment.control_rate, "environment.control_rate");
  positive(environment.sim_rate, "environment.sim_rate");
  positive(environment.lateral_slip_threshold, "environment.lateral_slip_threshold");
  if (environment.position_noise < 0.0 || environment.attitude_noise < 0.0)
    throw ConfigError("config: noise levels must be >= 0");
  if (output.decimation < 1) throw ConfigError("config: output.decimation must be at least 1");
  const TrajectoryConfig& t = trajectory;
  if (!(t.thrust_ratio > 0.0 && t.thrust_ratio < 1.0)) throw ConfigError("config: trajectory.thrust_ratio must lie in (0, 1)");
  if (!(t.switch_thrust_ratio > 0.0 && t.switch_thrust_ratio < 1.0))
    throw ConfigError("config: trajectory.switch_thrust_ratio must lie in (0, 1)");
  positive(t.switch_ramp, "trajectory.switch_ramp");
  if (t.v_max) positive(*t.v_max, "trajectory.v_max");
  if (t.a_max) positive(*t.a_max, "trajectory.a_max");
  static const std::set<std::string> types{"lemniscate", "circle", "line", "rest", "blend", "stop"};
  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    const SegmentConfig& s = t.segments[i];
    const std::string at = "trajectory.segments[" + std::to_string(i) + "]";
    if (!types.count(s.type)) throw ConfigError("config: " + at + ".type '" + s.type + "' is unknown");
    if (s.mode != "aerial" && s.mode != "ground") throw ConfigError("config: " + at + ".mode must be aerial or ground");
    if (s.direction != 1 && s.direction != -1) throw ConfigError("config: " + at + ".direction must be 1 or -1");
    if (s.laps < 1) throw ConfigError("config: " + at + ".laps must be at least 1");
    if (s.duration) positive(*s.duration, at + ".duration");
  }
  if (kind == "track" && t.segments.empty()) throw ConfigError("config: a track scenario needs trajectory segments");
  if (kind == "benchmark_slippery") {
    positive(benchmark.lateral_failure, "benchmark.lateral_failure");
    positive(benchmark.aspect, "benchmark.aspect");
    for (const auto& l : benchmark.levels) {
      positive(l[0], "benchmark.levels speed");
      positive(l[1], "benchmark.levels acceleration");
    }
  }
  if (kind == "energy_compare") {
    positive(energy.v_max, "energy.v_max");
    positive(energy.a_max, "energy.a_max");
    positive(energy.aspect, "energy.aspect");
    positive(energy.altitude, "energy.altitude");
    if (!(energy.ground_thrust_ratio > 0.0 && energy.ground_thrust_ratio < 1.0))
      throw ConfigError("config: energy.ground_thrust_ratio must lie in (0, 1)");
    if (energy.laps < 1) throw ConfigError("config: energy.laps must be at least 1");
    if (energy.standby_power < 0.0) throw ConfigError("config: energy.standby_power must be >= 0");
  }
}

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ScenarioConfig c;
  Reader r(j, "");
  if (!r.has("schema_version")) Reader::fail("schema_version", "missing");
  r.get("schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) c.validate();
  r.get("name", c.name);
  r.get("kind", c.kind);
  r.get("description", c.description);
  r.get("seed", c.seed);
  r.get("duration", c.duration);
  if (r.has("vehicle")) read_vehicle(Reader(r.child("vehicle"), "vehicle"), c.vehicle);
  if (r.has("trajectory")) read_trajectory(Reader(r.child("trajectory"), "trajectory"), c.trajectory);
  if (r.has("controller")) read_controller(Reader(r.child("controller"), "controller"), c.controller);
  if (r.has("environment")) read_environment(Reader(r.child("environment"), "environment"), c.environment);
  if (r.has("output")) read_output(Reader(r.child("output"), "output"), c.output);
  if (r.has("benchmark")) read_benchmark(Reader(r.child("benchmark"), "benchmark"), c.benchmark);
  if (r.has("energy")) read_energy(Reader(r.child("energy"), "energy"), c.energy);
  r.done();
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& c) {
  ordered j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["kind"] = c.kind;
  if (!c.description.empty()) j["description"] = c.description;
  j["seed"] = c.seed;
  if (c.duration) j["duration"] = *c.duration;

  const VehicleParams& p = c.vehicle;
  ordered v;
  v["mass"] = p.mass;
  v["wheel_mass"] = p.wheel_mass;
  v["inertia"] = array<3>(p.inertia);
  v["arm_length"] = p.arm_length;
  v["servo_offset"] = p.servo_offset;
  v["axle_offset"] = p.axle_offset;
  v["wheel_radius"] = p.wheel_radius;
  v["wheel_offset"] = p.wheel_offset;
  v["rolling_friction"] = p.rolling_friction;
  v["lateral_friction"] = p.lateral_friction;
  v["thrust_coeff"] = p.thrust_coeff;
  v["torque_coeff"] = p.torque_coeff;
  v["gravity"] = p.gravity;
  v["max_thrust"] = p.max_thrust;
  v["max_tilt"] = p.max_tilt;
  v["air_density"] = p.air_density;
  v["disk_area"] = p.disk_area;
  v["contact_height"] = p.contact_height;
  v["speed_deadband"] = p.speed_deadband;
  j["vehicle"] = v;

  ordered t;
  ordered segs = ordered::array();
  for (const SegmentConfig& s : c.trajectory.segments) {
    ordered o;
    o["type"] = s.type;
    o["mode"] = s.mode;
    if (s.direction != 1) o["direction"] = s.direction;
    if (s.A) o["A"] = *s.A;
    if (s.B) o["B"] = *s.B;
    if (s.omega) o["omega"] = *s.omega;
    if (s.fit_speed) o["fit_speed"] = *s.fit_speed;
    if (s.fit_accel) o["fit_accel"] = *s.fit_accel;
    o["aspect"] = s.aspect;
    o["laps"] = s.laps;
    o["radius"] = s.radius;
    o["velocity"] = array<3>(s.velocity);
    if (s.duration) o["duration"] = *s.duration;
    o["start"] = {s.start.x(), s.start.y()};
    o["altitude"] = s.altitude;
    o["rise"] = s.rise;
    if (s.yaw) o["yaw"] = *s.yaw;
    segs.push_back(o);
  }
  t["segments"] = segs;
  if (c.trajectory.v_max) t["v_max"] = *c.trajectory.v_max;
  if (c.trajectory.a_max) t["a_max"] = *c.trajectory.a_max;
  t["thrust_ratio"] = c.trajectory.thrust_ratio;
  t["switch_thrust_ratio"] = c.trajectory.switch_thrust_ratio;
  t["switch_ramp"] = c.trajectory.switch_ramp;
  t["clamp_inputs"] = c.trajectory.clamp_inputs;
  j["trajectory"] = t;

  const NmpcConfig& n = c.controller;
  ordered k;
  k["horizon"] = n.horizon;
  k["dt"] = n.dt;
  k["q_position"] = array<3>(n.q_position);
  k["q_velocity"] = array<3>(n.q_velocity);
  k["q_attitude"] = array<4>(n.q_attitude);
  k["q_rate"] = array<3>(n.q_rate);
  k["q_input"] = array<4>(n.q_input);
  if (n.u_min) k["u_min"] = array<4>(*n.u_min);
  if (n.u_max) k["u_max"] = array<4>(*n.u_max);
  k["jacobian_step"] = n.jacobian_step;
  k["max_qp_iterations"] = n.max_qp_iterations;
  k["qp_tolerance"] = n.qp_tolerance;
  k["normal_force_margin"] = n.normal_force_margin;
  k["slack_penalty"] = n.slack_penalty;
  k["sqp_iterations"] = n.sqp_iterations;
  k["opposed_tilt"] = n.opposed_tilt;
  j["controller"] = k;

  const EnvironmentConfig& e = c.environment;
  ordered env;
  env["slip_model"] = e.slip_model;
  if (e.mu) env["mu"] = *e.mu;
  if (e.mu_s) env["mu_s"] = *e.mu_s;
  env["lateral_slip_threshold"] = e.lateral_slip_threshold;
  env["position_noise"] = e.position_noise;
  env["attitude_noise"] = e.attitude_noise;
  env["control_rate"] = e.control_rate;
  env["sim_rate"] = e.sim_rate;
  j["environment"] = env;

  j["output"] = {{"decimation", c.output.decimation},
                 {"record_timing", c.output.record_timing},
                 {"planar_rmse", c.output.planar_rmse}};

  ordered b;
  ordered levels = ordered::array();
  for (const auto& l : c.benchmark.levels) levels.push_back({l[0], l[1]});
  b["levels"] = levels;
  b["lateral_failure"] = c.benchmark.lateral_failure;
  b["aspect"] = c.benchmark.aspect;
  j["benchmark"] = b;

  ordered en;
  en["v_max"] = c.energy.v_max;
  en["a_max"] = c.energy.a_max;
  en["aspect"] = c.energy.aspect;
  en["laps"] = c.energy.laps;
  en["altitude"] = c.energy.altitude;
  en["ground_thrust_ratio"] = c.energy.ground_thrust_ratio;
  en["standby_power"] = c.energy.standby_power;
  j["energy"] = en;
  return j.dump(2) + "\n";
}

std::vector<std::string> bundled_scenarios() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::kBundledScenarios) names.push_back(name);
  return names;
}

std::string bundled_scenario_text(const std::string& name) {
  for (const auto& [n, text] : detail::kBundledScenarios)
    if (n == name) return text;
  std::string known;
  for (const auto& [n, text] : detail::kBundledScenarios) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("config: no bundled scenario '" + name + "' (known: " + known + ")");
}

ScenarioConfig bundled_scenario(const std::string& name) { return parse_scenario(bundled_scenario_text(name)); }

}  // namespace bimodal
