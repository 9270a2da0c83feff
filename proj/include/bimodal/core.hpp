#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>

#include "bimodal/errors.hpp"

namespace bimodal {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

/// Number of scalar entries in a packed RobotState: p(3) v(3) q(4, w first) omega(3).
inline constexpr int kStateDim = 13;
inline constexpr int kInputDim = 4;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using InputVector = Eigen::Matrix<double, kInputDim, 1>;

/// Cross-product matrix: skew(w) * a == w.cross(a).
Mat3 skew(const Vec3& w);

/// Rotation about the world z axis by `yaw`; maps intermediate-frame vectors to world.
Mat3 intermediate_frame_rotation(double yaw);

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Attitude as a unit quaternion. Rotation matrix and intrinsic Z-Y-X Euler views are derived.
class Orientation {
 public:
  Orientation() = default;

  /// Normalizes the given (w, x, y, z) coefficients; throws ConfigError on a zero quaternion.
  static Orientation from_quaternion(const Eigen::Quaterniond& q);
  static Orientation from_wxyz(const Vec4& wxyz);
  /// R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static Orientation from_euler(double roll, double pitch, double yaw);
  static Orientation from_rotation(const Mat3& R);

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Vec4 wxyz() const { return {q_.w(), q_.x(), q_.y(), q_.z()}; }
  Mat3 rotation() const { return q_.toRotationMatrix(); }

  /// Throws GimbalLockError when |pitch| > pi/2 - 1e-3.
  EulerAngles euler() const;
  /// Same extraction without the proximity check; used inside the model where pitch stays small.
  EulerAngles euler_unchecked() const;
  double yaw() const;

 private:
  explicit Orientation(const Eigen::Quaterniond& q) : q_(q) {}
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

Orientation euler_to_orientation(double roll, double pitch, double yaw);
EulerAngles orientation_to_euler(const Orientation& q);

struct RobotState {
  Vec3 p = Vec3::Zero();      ///< world position of the CoM [m]
  Vec3 v = Vec3::Zero();      ///< world velocity [m/s]
  Orientation q;              ///< body-to-world attitude
  Vec3 omega = Vec3::Zero();  ///< body angular rate [rad/s]

  StateVector pack() const;
  /// Quaternion part is renormalized.
  static RobotState unpack(const StateVector& x);
  bool finite() const;
};

struct ControlInput {
  double thrust1 = 0.0;  ///< [N]
  double thrust2 = 0.0;  ///< [N]
  double tilt1 = 0.0;    ///< servo angle [rad]
  double tilt2 = 0.0;    ///< servo angle [rad]

  InputVector pack() const { return {thrust1, thrust2, tilt1, tilt2}; }
  static ControlInput unpack(const InputVector& u) { return {u[0], u[1], u[2], u[3]}; }
};

/// Locomotion mode with the switch scalar s and, on the ground, the travel direction flag.
class Mode {
 public:
  enum class Kind { Aerial, Ground };

  static Mode aerial() { return Mode(Kind::Aerial, 1); }
  static Mode ground(int direction = 1) { return Mode(Kind::Ground, direction >= 0 ? 1 : -1); }

  Kind kind() const { return kind_; }
  bool is_ground() const { return kind_ == Kind::Ground; }
  double s() const { return is_ground() ? 1.0 : 0.0; }
  int direction() const { return direction_; }

  friend bool operator==(const Mode&, const Mode&) = default;

 private:
  Mode(Kind kind, int direction) : kind_(kind), direction_(direction) {}
  Kind kind_ = Kind::Aerial;
  int direction_ = 1;
};

/// Physical constants of the vehicle. Defaults are the prototype values.
struct VehicleParams {
  double mass = 0.83;             ///< total mass m [kg]
  double wheel_mass = 0.09;       ///< single wheel m_w [kg]
  Vec3 inertia{4.1e-3, 2.8e-3, 3.5e-3};  ///< diagonal of J [kg m^2]
  double arm_length = 0.07;       ///< l [m]
  double servo_offset = 0.04;     ///< h1, servo axis to CoM [m]
  double axle_offset = 0.02;      ///< h2 lever arm of the gravity pitch term [m]
  double wheel_radius = 0.15;     ///< r [m]
  double wheel_offset = 0.09;     ///< W, wheel to CoM lateral distance [m]
  double rolling_friction = 0.01; ///< mu
  double lateral_friction = 1.0;  ///< mu_s, sticking limit of lateral friction
  double thrust_coeff = 1.75e-8;  ///< c_t [N s^2]
  double torque_coeff = 0.012 * 1.75e-8;  ///< c_q [N m s^2]
  double gravity = 9.81;          ///< [m/s^2]
  double max_thrust = 8.0;        ///< T_max per rotor [N]
  double max_tilt = kPi / 4.0;    ///< delta_max [rad]
  double air_density = 1.225;     ///< rho [kg/m^3]
  double disk_area = kPi * 0.0635 * 0.0635;  ///< S, 5-inch propeller [m^2]
  double contact_height = 0.15;   ///< CoM height while both wheels touch the ground [m]
  double speed_deadband = 0.01;   ///< eps_v [m/s]

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  double weight() const { return mass * gravity; }
  Vec3 gravity_vector() const { return {0.0, 0.0, -gravity}; }
  Mat3 inertia_matrix() const { return inertia.asDiagonal(); }
  InputVector input_lower() const { return {0.0, 0.0, -max_tilt, -max_tilt}; }
  InputVector input_upper() const { return {max_thrust, max_thrust, max_tilt, max_tilt}; }
};

/// Throws BoundViolation when `u` leaves the actuator box by more than `tolerance`.
void check_input_bounds(const ControlInput& u, const VehicleParams& params, double tolerance = 1e-9);

/// Wraps to (-pi, pi].
double wrap_angle(double angle);
/// Returns the representative of `angle` closest to `reference`.
double unwrap_angle(double angle, double reference);

}  // namespace bimodal
