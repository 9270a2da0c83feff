#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "bimodal/dynamics.hpp"

namespace bimodal {

/// Flat output of the ground mode: position with derivatives to 4th order and the body-z thrust.
struct FlatSampleGround {
  double t = 0.0;
  std::array<Vec3, 5> p{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  /// T_B,z and its first two time derivatives (zero for the usual constant choice).
  std::array<double, 3> thrust_z{0.0, 0.0, 0.0};
  int direction = 1;  ///< +1 forward, -1 reverse travel
  /// Heading held when the planar speed is inside the dead-band; also the unwrap anchor.
  std::optional<double> previous_yaw;
};

/// Flat output of the aerial mode: position derivatives to 4th order and yaw to 2nd.
///
/// The attitude of this vehicle is not an algebraic function of (p, yaw): its roll torque is
/// tied to its lateral thrust, so the bank angle about the thrust axis obeys an unstable
/// second-order equation. Its bounded solution comes from solve_bank_profile; when `bank` is
/// absent the quasi-static value is used and the reference is flagged.
struct FlatSampleAerial {
  double t = 0.0;
  std::array<Vec3, 5> p{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<double, 3> yaw{0.0, 0.0, 0.0};  ///< psi, psi', psi''
  /// Point the body x axis along the horizontal velocity instead of using `yaw`.
  bool yaw_from_velocity = false;
  std::optional<double> previous_yaw;
  /// Bank angle about the thrust axis and its rate.
  std::optional<std::array<double, 2>> bank;
};

struct ReferenceFlags {
  bool yaw_held = false;        ///< planar speed below the dead-band
  bool inputs_clamped = false;  ///< only when clamping was requested
  bool wheel_lift = false;      ///< only when wheel lift-off was tolerated
  bool bank_quasi_static = false;  ///< aerial sample evaluated without a bank profile
};

/// Reference state and input at one instant, with the analytic state derivative for checks.
struct ReferencePoint {
  double t = 0.0;
  RobotState state;
  ControlInput input;
  Mode mode = Mode::aerial();
  StateDerivative state_dot;
  double yaw = 0.0;  ///< unwrapped heading
  std::optional<GroundReaction> reaction;
  ReferenceFlags flags;
};

struct FlatnessOptions {
  /// Clamp recovered inputs into the actuator box instead of raising BoundViolation.
  bool clamp_inputs = false;
  /// Accept negative wheel normals (flagged) instead of raising InfeasibleReference.
  bool tolerate_wheel_lift = false;
  /// Ablation: recover inputs under the restriction delta1 = -delta2.
  bool opposed_tilt = false;
  long sample_index = -1;
};

/// psi = alpha * atan2(p'_y, p'_x). Returns nullopt inside the speed dead-band.
std::optional<double> ground_yaw(const Vec3& p_dot, int direction, double speed_deadband = 0.01);

/// Heading of the body x axis: along the velocity when moving forward, against it in reverse.
std::optional<double> ground_heading(const Vec3& p_dot, int direction, double speed_deadband = 0.01);

/// Pitch that realizes the longitudinal acceleration with body thrust T_z on the ground.
/// `rolling_sign` is the sign applied to the rolling friction (alpha, or 0 at rest).
double ground_pitch(const Vec3& p_ddot, double yaw, double thrust_z, const VehicleParams& params,
                    double rolling_sign = 1.0, long sample_index = -1);

/// World-frame angular velocity of the Z-Y-X attitude with zero roll.
Vec3 ground_world_rates(double pitch_rate, double yaw, double yaw_rate);
/// Body-frame angular velocity (-psi' sin(theta), theta', psi' cos(theta)).
Vec3 ground_body_rates(double pitch, double pitch_rate, double yaw_rate);
/// Time derivative of ground_body_rates.
Vec3 ground_body_accels(double pitch, double pitch_rate, double pitch_acc, double yaw_rate, double yaw_acc);

struct WheelNormals {
  double left = 0.0;
  double right = 0.0;
};
WheelNormals wheel_normals(double F_n, double f_l, double tau_Bx, double pitch, const VehicleParams& params);

/// Small-angle lateral thrust m a_l / (1 - h1/r).
double lateral_thrust_approx(double lateral_accel, const VehicleParams& params);

/// Inputs that realize (T_z, T_y, tau_y, tau_z); the roll torque follows as h1 T_y.
ControlInput recover_inputs(double thrust_z, double thrust_y, double tau_y, double tau_z,
                            const VehicleParams& params);

ReferencePoint ground_flat_to_reference(const FlatSampleGround& sample, const VehicleParams& params,
                                        const FlatnessOptions& options = {});

ReferencePoint aerial_flat_to_reference(const FlatSampleAerial& sample, const VehicleParams& params,
                                        const FlatnessOptions& options = {});

/// Bank acceleration gamma'' demanded by the roll equation at bank angle `gamma`.
double bank_acceleration(const FlatSampleAerial& sample, double gamma, const VehicleParams& params);

/// Bank angle that balances the roll equation with gamma'' = 0.
double quasi_static_bank(const FlatSampleAerial& sample, const VehicleParams& params);

/// Bounded bank-angle solution on a uniform grid, interpolated by quintic Hermite pieces.
class BankProfile {
 public:
  BankProfile() = default;
  BankProfile(double t0, double step, std::vector<double> gamma, std::vector<double> gamma_dot,
              std::vector<double> gamma_ddot);

  double start() const { return t0_; }
  double end() const { return t0_ + step_ * static_cast<double>(gamma_.size() - 1); }
  bool empty() const { return gamma_.empty(); }
  /// (gamma, gamma') at t, clamped to the profile span.
  std::array<double, 2> at(double t) const;
  /// gamma'' of the interpolant (for consistency checks).
  double second_derivative(double t) const;
  std::size_t nodes() const { return gamma_.size(); }

 private:
  double t0_ = 0.0;
  double step_ = 0.0;
  std::vector<double> gamma_, gamma_dot_, gamma_ddot_;
};

/// Solves gamma'' = F(t, gamma) on [t0, t1] with Numerov's scheme and Newton iterations.
/// The two boundary values are the quasi-static banks; the unstable roll mode confines
/// their influence to layers of width sqrt(J_x / (h1 m |f|)) at the ends.
BankProfile solve_bank_profile(const std::function<FlatSampleAerial(double)>& sampler, double t0, double t1,
                               const VehicleParams& params, double step = 5e-3);

}  // namespace bimodal
