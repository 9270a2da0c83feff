#include "bimodal/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bimodal {

namespace {

void positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(std::string("analysis: ") + what + " must be positive");
}

}  // namespace

double ideal_power(double thrust, double disk_area, double air_density) {
  if (!(thrust >= 0.0)) throw ConfigError("analysis: thrust must be >= 0");
  positive(disk_area, "disk area");
  positive(air_density, "air density");
  return std::sqrt(thrust * thrust * thrust / (2.0 * disk_area * air_density));
}

double hover_efficiency(double mass, int rotors, double disk_area, double air_density, double gravity) {
  positive(mass, "mass");
  positive(disk_area, "disk area");
  positive(air_density, "air density");
  positive(gravity, "gravity");
  if (rotors < 1) throw ConfigError("analysis: rotor count must be at least 1");
  return std::sqrt(2.0 * rotors * disk_area * air_density) / (gravity * std::sqrt(mass * gravity));
}

double rotor_radius(double eta, double mass, int rotors, double air_density, double gravity) {
  positive(eta, "hover efficiency");
  positive(mass, "mass");
  positive(air_density, "air density");
  positive(gravity, "gravity");
  if (rotors < 1) throw ConfigError("analysis: rotor count must be at least 1");
  return eta * gravity * std::sqrt(mass * gravity) / std::sqrt(2.0 * kPi * rotors * air_density);
}

std::string to_string(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::SingleRotor: return "single_rotor";
    case LayoutKind::BicopterLongitudinal: return "bicopter_longitudinal";
    case LayoutKind::BicopterHorizontal: return "bicopter_horizontal";
    case LayoutKind::QuadrotorX: return "quadrotor_x";
    case LayoutKind::Hexacopter: return "hexacopter";
  }
  return "unknown";
}

LayoutSpec LayoutSpec::of(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::SingleRotor: return {kind, 1, 2.0, 0};
    // Rotors in line with the motion: the cross-section is one disk.
    case LayoutKind::BicopterLongitudinal: return {kind, 2, 2.0, 0};
    case LayoutKind::BicopterHorizontal: return {kind, 2, 4.0, 1};
    // X layout flying along a diagonal bisector: two disks side by side.
    case LayoutKind::QuadrotorX: return {kind, 4, 4.0, 1};
    // Touching disks on a ring of radius 2R with one rotor at the nose: the outer rotors sit at
    // +-2R sin 60 deg, so the width is 2 (sqrt(3) + 1) R.
    case LayoutKind::Hexacopter: return {kind, 6, 2.0 * (std::sqrt(3.0) + 1.0), 2};
  }
  throw ConfigError("analysis: unknown layout");
}

std::vector<LayoutSpec> all_layouts() {
  return {LayoutSpec::of(LayoutKind::SingleRotor), LayoutSpec::of(LayoutKind::BicopterLongitudinal),
          LayoutSpec::of(LayoutKind::BicopterHorizontal), LayoutSpec::of(LayoutKind::QuadrotorX),
          LayoutSpec::of(LayoutKind::Hexacopter)};
}

WidthResult traversing_width(const LayoutSpec& layout, double mass, double eta, double air_density,
                             double clearance, double gravity) {
  if (clearance < 0.0) throw ConfigError("analysis: clearance must be >= 0");
  WidthResult r;
  r.layout = layout;
  r.rotor_radius = rotor_radius(eta, mass, layout.rotors, air_density, gravity);
  r.width = layout.radii * r.rotor_radius + layout.gaps * clearance;
  const double single = 2.0 * rotor_radius(eta, mass, 1, air_density, gravity);
  r.ratio = r.width / single;
  return r;
}

double max_yaw_torque(double thrust, const VehicleParams& params, YawVehicle vehicle) {
  positive(thrust, "thrust");
  if (!(thrust < params.weight())) throw ConfigError("analysis: rotor thrust must stay below the weight");
  if (vehicle == YawVehicle::QuadrotorBased) return params.torque_coeff / params.thrust_coeff * thrust;
  return params.arm_length * thrust;
}

double steering_ratio(const VehicleParams& params) {
  positive(params.torque_coeff, "torque coefficient");
  return params.arm_length * params.thrust_coeff / params.torque_coeff;
}

double rmse(const std::vector<Vec3>& actual, const std::vector<Vec3>& reference, bool planar) {
  if (actual.size() != reference.size()) throw ConfigError("rmse: sequences differ in length");
  if (actual.empty()) throw ConfigError("rmse: empty sequences");
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    Vec3 e = actual[i] - reference[i];
    if (planar) e.z() = 0.0;
    sum += e.squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double energy_saving(double aerial_power, double ground_power) {
  positive(aerial_power, "aerial power");
  return 1.0 - ground_power / aerial_power;
}

double energy_saving(double aerial_power, double ground_power, double standby_power) {
  if (standby_power < 0.0) throw ConfigError("analysis: standby power must be >= 0");
  return energy_saving(aerial_power - standby_power, ground_power - standby_power);
}

double yaw_of(const Vec4& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
}

RunSummary summarize(const RunLog& log, const VehicleParams& params, bool planar, double switch_window) {
  RunSummary s;
  s.ticks = log.ticks.size();
  s.completed = log.completed();
  s.relaxed_ticks = log.relaxed_ticks;
  s.degraded_ticks = log.degraded_ticks;
  s.min_predicted_normal = std::numeric_limits<double>::infinity();
  if (log.ticks.empty()) return s;
  s.duration = log.ticks.back().t - log.ticks.front().t;

  std::vector<Vec3> p, p_ref;
  std::vector<double> switch_times;
  double power = 0.0;
  for (std::size_t i = 0; i < log.ticks.size(); ++i) {
    const TickRecord& r = log.ticks[i];
    p.push_back(r.p);
    p_ref.push_back(r.p_ref);
    Vec3 e = r.p - r.p_ref;
    if (planar) e.z() = 0.0;
    s.max_error = std::max(s.max_error, e.norm());
    const double yaw = yaw_of(r.q_ref);
    s.max_lateral_error =
        std::max(s.max_lateral_error, std::abs(-std::sin(yaw) * (r.p.x() - r.p_ref.x()) + std::cos(yaw) * (r.p.y() - r.p_ref.y())));
    power += r.power;
    s.peak_speed = std::max(s.peak_speed, r.v.norm());
    s.slip_ticks += r.slipping;
    s.lift_off_ticks += r.lift_off;
    s.min_predicted_normal = std::min(s.min_predicted_normal, r.min_normal);
    if (i > 0 && r.ground_ref != log.ticks[i - 1].ground_ref) switch_times.push_back(r.t);
  }
  s.rmse = rmse(p, p_ref, planar);
  s.mean_power = power / static_cast<double>(log.ticks.size());
  s.mode_switches = static_cast<int>(switch_times.size());
  for (std::size_t i = 1; i < log.ticks.size(); ++i) {
    const double t = log.ticks[i].t;
    const bool near = std::any_of(switch_times.begin(), switch_times.end(),
                                  [&](double ts) { return std::abs(t - ts) <= switch_window; });
    if (!near) continue;
    const InputVector d = (log.ticks[i].u.pack() - log.ticks[i - 1].u.pack()).cwiseAbs();
    s.switch_input_jump = std::max({s.switch_input_jump, d[0] / params.max_thrust, d[1] / params.max_thrust,
                                    d[2] / (2.0 * params.max_tilt), d[3] / (2.0 * params.max_tilt)});
  }
  return s;
}

}  // namespace bimodal
