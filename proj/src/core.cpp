#include "bimodal/core.hpp"

#include <algorithm>
#include <sstream>

namespace bimodal {

Mat3 skew(const Vec3& w) {
  Mat3 S;
  S << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return S;
}

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return R;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return R;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return R;
}

Mat3 intermediate_frame_rotation(double yaw) { return rot_z(yaw); }

Orientation Orientation::from_quaternion(const Eigen::Quaterniond& q) {
  const double n = q.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) throw ConfigError("orientation: quaternion has zero or non-finite norm");
  return Orientation(Eigen::Quaterniond(q.coeffs() / n));
}

Orientation Orientation::from_wxyz(const Vec4& wxyz) {
  return from_quaternion(Eigen::Quaterniond(wxyz[0], wxyz[1], wxyz[2], wxyz[3]));
}

Orientation Orientation::from_euler(double roll, double pitch, double yaw) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                               Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                               Eigen::AngleAxisd(roll, Vec3::UnitX());
  return from_quaternion(q);
}

Orientation Orientation::from_rotation(const Mat3& R) { return from_quaternion(Eigen::Quaterniond(R)); }

EulerAngles Orientation::euler_unchecked() const {
  const Mat3 R = rotation();
  EulerAngles e;
  e.pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  e.roll = std::atan2(R(2, 1), R(2, 2));
  e.yaw = std::atan2(R(1, 0), R(0, 0));
  return e;
}

EulerAngles Orientation::euler() const {
  const EulerAngles e = euler_unchecked();
  if (std::abs(e.pitch) > kPi / 2.0 - 1e-3) {
    std::ostringstream msg;
    msg << "orientation: pitch " << e.pitch << " rad is within 1e-3 of gimbal lock";
    throw GimbalLockError(msg.str());
  }
  return e;
}

double Orientation::yaw() const {
  const Mat3 R = rotation();
  return std::atan2(R(1, 0), R(0, 0));
}

Orientation euler_to_orientation(double roll, double pitch, double yaw) {
  return Orientation::from_euler(roll, pitch, yaw);
}

EulerAngles orientation_to_euler(const Orientation& q) { return q.euler(); }

StateVector RobotState::pack() const {
  StateVector x;
  x.segment<3>(0) = p;
  x.segment<3>(3) = v;
  x.segment<4>(6) = q.wxyz();
  x.segment<3>(10) = omega;
  return x;
}

RobotState RobotState::unpack(const StateVector& x) {
  RobotState s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.q = Orientation::from_wxyz(x.segment<4>(6));
  s.omega = x.segment<3>(10);
  return s;
}

bool RobotState::finite() const {
  return p.allFinite() && v.allFinite() && q.wxyz().allFinite() && omega.allFinite();
}

void VehicleParams::validate() const {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw ConfigError(std::string("vehicle: ") + name + " must be strictly positive");
  };
  positive(mass, "mass");
  positive(wheel_mass, "wheel_mass");
  positive(inertia.x(), "inertia.xx");
  positive(inertia.y(), "inertia.yy");
  positive(inertia.z(), "inertia.zz");
  positive(arm_length, "arm_length");
  positive(servo_offset, "servo_offset");
  positive(axle_offset, "axle_offset");
  positive(wheel_radius, "wheel_radius");
  positive(wheel_offset, "wheel_offset");
  positive(thrust_coeff, "thrust_coeff");
  positive(torque_coeff, "torque_coeff");
  positive(gravity, "gravity");
  positive(max_thrust, "max_thrust");
  positive(max_tilt, "max_tilt");
  positive(air_density, "air_density");
  positive(disk_area, "disk_area");
  positive(contact_height, "contact_height");
  positive(speed_deadband, "speed_deadband");
  if (!(rolling_friction >= 0.0)) throw ConfigError("vehicle: rolling_friction must be >= 0");
  if (!(lateral_friction >= 0.0)) throw ConfigError("vehicle: lateral_friction must be >= 0");
  if (!(servo_offset < wheel_radius))
    throw ConfigError("vehicle: servo_offset (h1) must be smaller than wheel_radius (r)");
  if (!(max_tilt < kPi / 2.0)) throw ConfigError("vehicle: max_tilt must be below pi/2");
  if (!(2.0 * wheel_mass < mass)) throw ConfigError("vehicle: wheels cannot outweigh the vehicle");
}

void check_input_bounds(const ControlInput& u, const VehicleParams& params, double tolerance) {
  const InputVector x = u.pack();
  const InputVector lo = params.input_lower();
  const InputVector hi = params.input_upper();
  static constexpr std::array<const char*, 4> names{"thrust1", "thrust2", "tilt1", "tilt2"};
  for (int i = 0; i < kInputDim; ++i) {
    if (!std::isfinite(x[i]) || x[i] < lo[i] - tolerance || x[i] > hi[i] + tolerance) {
      std::ostringstream msg;
      msg << "input " << names[i] << " = " << x[i] << " outside [" << lo[i] << ", " << hi[i] << "]";
      throw BoundViolation(msg.str());
    }
  }
}

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

double unwrap_angle(double angle, double reference) {
  return reference + wrap_angle(angle - reference);
}

}  // namespace bimodal
