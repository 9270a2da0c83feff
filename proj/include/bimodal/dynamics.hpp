#pragma once

#include <optional>

#include "bimodal/core.hpp"

namespace bimodal {

/// Body-frame force and torque produced by the two tilting rotors.
struct BodyWrench {
  Vec3 thrust = Vec3::Zero();  ///< T_B; the x component is always zero
  Vec3 torque = Vec3::Zero();  ///< tau_B
};

/// Rejects inputs outside the actuator box.
BodyWrench actuator_wrench(const ControlInput& u, const VehicleParams& params);
/// Same map without the bound check (linearization perturbs inputs across the box edge).
BodyWrench actuator_wrench_unchecked(const ControlInput& u, const VehicleParams& params);

/// |v_planar| * yaw_rate, or 0 below the speed dead-band.
double centripetal_accel(const Vec3& v_world, double yaw_rate, double speed_deadband = 0.01);

/// How the lateral wheel force is resolved while on the ground.
struct LateralContact {
  bool slipping = false;
  /// In slip, the saturated friction acts along +y_G when positive and -y_G when negative.
  double friction_sign = 0.0;
};

struct ReactionOptions {
  /// Overrides sign(longitudinal speed) in the rolling friction; references use the direction flag.
  std::optional<double> rolling_sign;
  LateralContact lateral;
  /// Clamp negative per-wheel normals to zero (simulation); the model path leaves them signed.
  bool clamp_wheel_normals = false;
};

/// Ground reaction force (intermediate frame) and torque (body frame).
struct GroundReaction {
  double f_r = 0.0;        ///< rolling friction, along x_G
  double f_l = 0.0;        ///< lateral friction, along y_G
  double F_n = 0.0;        ///< total normal force, along z_G
  double F_n_left = 0.0;
  double F_n_right = 0.0;
  double f_r_left = 0.0;
  double f_r_right = 0.0;
  Vec3 tau_G = Vec3::Zero();
  bool contact_lost = false;  ///< F_n < 0: the wheels cannot stay on the ground
  bool lift_off_left = false;
  bool lift_off_right = false;

  Vec3 force() const { return {f_r, f_l, F_n}; }
};

/// Longitudinal speed v . x_G and yaw rate implied by the body rates.
struct PlanarKinematics {
  double longitudinal_speed = 0.0;
  double lateral_speed = 0.0;
  double yaw_rate = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};
PlanarKinematics planar_kinematics(const RobotState& state);

/// Stick-regime lateral acceleration (v . x_G) * yaw_rate, zero inside the dead-band.
double kinematic_lateral_accel(const RobotState& state, double speed_deadband);

GroundReaction ground_reaction(const RobotState& state, const BodyWrench& wrench, double lateral_accel,
                               const VehicleParams& params, const ReactionOptions& options = {});

struct StateDerivative {
  Vec3 p_dot = Vec3::Zero();
  Vec3 v_dot = Vec3::Zero();
  Vec4 q_dot = Vec4::Zero();  ///< (w, x, y, z) rate of the attitude quaternion
  Vec3 omega_dot = Vec3::Zero();

  StateVector pack() const;
};

/// Quaternion rate for a body-frame angular velocity.
Vec4 quaternion_rate(const Orientation& q, const Vec3& omega_body);

struct DerivativeResult {
  StateDerivative derivative;
  std::optional<GroundReaction> reaction;  ///< set in Ground mode
};

/// Unified model f(x, u): s = 0 in the air, s = 1 on the ground with a constrained roll axis.
DerivativeResult evaluate(const RobotState& state, const ControlInput& u, const Mode& mode,
                          const VehicleParams& params, const LateralContact& lateral = {});

StateDerivative derivative(const RobotState& state, const ControlInput& u, const Mode& mode,
                           const VehicleParams& params);

/// Classical RK4 on the packed state followed by quaternion renormalization. No dt limit.
StateVector rk4_step(const StateVector& x, const ControlInput& u, const Mode& mode, double dt,
                     const VehicleParams& params, const LateralContact& lateral = {});

/// Removes the components the ground contact forbids: height, vertical speed, roll, roll rate,
/// and (when `stick`) lateral speed.
RobotState project_ground_constraints(const RobotState& state, const VehicleParams& params, bool stick);

/// Integrates one fixed step of at most 20 ms. Throws DivergenceError on runaway values.
RobotState step(const RobotState& state, const ControlInput& u, const Mode& mode, double dt,
                const VehicleParams& params, const LateralContact& lateral = {});

struct SlipStatus {
  bool slipping = false;
  double excess = 0.0;  ///< unmet lateral force [N]
};
/// Stick when |f_l| <= mu_s * F_n (closed inequality).
SlipStatus slip_check(const GroundReaction& reaction, const VehicleParams& params);

/// Ideal momentum-theory power of both rotors [W].
double rotor_power(const ControlInput& u, const VehicleParams& params);

/// Contact-aware simulator: owns the state, mode switching, and the stick/slip machine.
class Simulator {
 public:
  struct Options {
    double dt = 1e-3;
    bool slip_model = false;
    double lateral_slip_threshold = 1e-3;  ///< [m/s] lateral speed treated as sliding
  };

  struct StepReport {
    Mode mode = Mode::aerial();
    std::optional<GroundReaction> reaction;
    bool slipping = false;
    bool lift_off = false;  ///< a wheel normal was clamped
    bool touchdown = false;
    bool takeoff = false;
    double power = 0.0;
  };

  Simulator(const VehicleParams& params, const Options& options, const RobotState& initial, const Mode& mode);

  /// Advances by options.dt with a zero-order-held input.
  StepReport advance(const ControlInput& u);

  const RobotState& state() const { return state_; }
  const Mode& mode() const { return mode_; }
  double time() const { return time_; }
  const VehicleParams& params() const { return params_; }

 private:
  VehicleParams params_;
  Options options_;
  RobotState state_;
  Mode mode_;
  double time_ = 0.0;
};

}  // namespace bimodal
