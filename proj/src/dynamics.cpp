#include "bimodal/dynamics.hpp"

#include <algorithm>
#include <sstream>

namespace bimodal {

namespace {

double sign_with_deadband(double value, double deadband) {
  if (std::abs(value) < deadband) return 0.0;
  return value > 0.0 ? 1.0 : -1.0;
}

void check_divergence(const StateVector& x) {
  for (int i = 0; i < kStateDim; ++i) {
    if (!std::isfinite(x[i]) || std::abs(x[i]) > 1e6) {
      std::ostringstream msg;
      msg << "integration diverged: state component " << i << " = " << x[i];
      throw DivergenceError(msg.str());
    }
  }
}

}  // namespace

BodyWrench actuator_wrench_unchecked(const ControlInput& u, const VehicleParams& params) {
  const double s1 = std::sin(u.tilt1), c1 = std::cos(u.tilt1);
  const double s2 = std::sin(u.tilt2), c2 = std::cos(u.tilt2);
  const double lateral = -u.thrust1 * s1 - u.thrust2 * s2;
  BodyWrench w;
  w.thrust = Vec3(0.0, lateral, u.thrust1 * c1 + u.thrust2 * c2);
  w.torque = Vec3(lateral * params.servo_offset,
                  (-u.thrust1 * c1 + u.thrust2 * c2) * params.arm_length,
                  (-u.thrust1 * s1 + u.thrust2 * s2) * params.arm_length);
  return w;
}

BodyWrench actuator_wrench(const ControlInput& u, const VehicleParams& params) {
  check_input_bounds(u, params);
  return actuator_wrench_unchecked(u, params);
}

double centripetal_accel(const Vec3& v_world, double yaw_rate, double speed_deadband) {
  const double speed = std::hypot(v_world.x(), v_world.y());
  if (speed < speed_deadband) return 0.0;
  return speed * yaw_rate;
}

PlanarKinematics planar_kinematics(const RobotState& state) {
  const EulerAngles e = state.q.euler_unchecked();
  PlanarKinematics k;
  k.pitch = e.pitch;
  k.yaw = e.yaw;
  const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
  k.longitudinal_speed = state.v.x() * cy + state.v.y() * sy;
  k.lateral_speed = -state.v.x() * sy + state.v.y() * cy;
  // Z-Y-X kinematics: psi_dot = (w_y sin(phi) + w_z cos(phi)) / cos(theta).
  k.yaw_rate = (state.omega.y() * std::sin(e.roll) + state.omega.z() * std::cos(e.roll)) / std::cos(e.pitch);
  return k;
}

double kinematic_lateral_accel(const RobotState& state, double speed_deadband) {
  const PlanarKinematics k = planar_kinematics(state);
  if (std::abs(k.longitudinal_speed) < speed_deadband) return 0.0;
  return k.longitudinal_speed * k.yaw_rate;
}

GroundReaction ground_reaction(const RobotState& state, const BodyWrench& wrench, double lateral_accel,
                               const VehicleParams& params, const ReactionOptions& options) {
  const PlanarKinematics k = planar_kinematics(state);
  const double cth = std::cos(k.pitch);
  const double m = params.mass;
  const double sigma = options.rolling_sign ? *options.rolling_sign
                                            : sign_with_deadband(k.longitudinal_speed, params.speed_deadband);

  GroundReaction g;
  g.F_n = params.weight() - wrench.thrust.z() * cth;
  g.contact_lost = g.F_n < 0.0;
  if (options.lateral.slipping) {
    g.f_l = options.lateral.friction_sign * params.lateral_friction * std::max(g.F_n, 0.0);
  } else {
    g.f_l = m * lateral_accel - wrench.thrust.y();
  }
  g.f_r = -params.rolling_friction * g.F_n * sigma;

  const double split = g.f_l * params.wheel_radius / params.wheel_offset +
                       wrench.torque.x() * cth / params.wheel_offset;
  g.F_n_left = 0.5 * g.F_n - split;
  g.F_n_right = 0.5 * g.F_n + split;
  g.lift_off_left = g.F_n_left < 0.0;
  g.lift_off_right = g.F_n_right < 0.0;
  if (options.clamp_wheel_normals && !g.contact_lost) {
    if (g.lift_off_left) {
      g.F_n_left = 0.0;
      g.F_n_right = g.F_n;
    } else if (g.lift_off_right) {
      g.F_n_right = 0.0;
      g.F_n_left = g.F_n;
    }
  }
  g.f_r_left = -params.rolling_friction * g.F_n_left * sigma;
  g.f_r_right = -params.rolling_friction * g.F_n_right * sigma;

  const Vec3 bracket(g.f_l * params.wheel_radius + (g.F_n_right - g.F_n_left) * params.wheel_offset,
                     (m - 2.0 * params.wheel_mass) * params.axle_offset * params.gravity * std::sin(k.pitch),
                     (g.f_r_right - g.f_r_left) * params.wheel_offset);
  // The bracket is written in the intermediate frame; the Euler equations need body components.
  g.tau_G = state.q.rotation().transpose() * intermediate_frame_rotation(k.yaw) * bracket;
  return g;
}

StateVector StateDerivative::pack() const {
  StateVector x;
  x.segment<3>(0) = p_dot;
  x.segment<3>(3) = v_dot;
  x.segment<4>(6) = q_dot;
  x.segment<3>(10) = omega_dot;
  return x;
}

Vec4 quaternion_rate(const Orientation& q, const Vec3& w) {
  const Eigen::Quaterniond& a = q.quaternion();
  return 0.5 * Vec4(-a.x() * w.x() - a.y() * w.y() - a.z() * w.z(),
                    a.w() * w.x() + a.y() * w.z() - a.z() * w.y(),
                    a.w() * w.y() + a.z() * w.x() - a.x() * w.z(),
                    a.w() * w.z() + a.x() * w.y() - a.y() * w.x());
}

DerivativeResult evaluate(const RobotState& state, const ControlInput& u, const Mode& mode,
                          const VehicleParams& params, const LateralContact& lateral) {
  const BodyWrench wrench = actuator_wrench_unchecked(u, params);
  const Mat3 R = state.q.rotation();
  const Vec3& J = params.inertia;
  const Vec3 Jw = J.cwiseProduct(state.omega);

  DerivativeResult out;
  StateDerivative& d = out.derivative;
  d.p_dot = state.v;
  d.q_dot = quaternion_rate(state.q, state.omega);
  Vec3 force = R * wrench.thrust;
  Vec3 torque = wrench.torque - state.omega.cross(Jw);

  if (mode.is_ground()) {
    ReactionOptions opts;
    opts.lateral = lateral;
    const double a_l = lateral.slipping ? 0.0 : kinematic_lateral_accel(state, params.speed_deadband);
    const GroundReaction g = ground_reaction(state, wrench, a_l, params, opts);
    const PlanarKinematics k = planar_kinematics(state);
    force += intermediate_frame_rotation(k.yaw) * g.force();
    torque += g.tau_G;
    out.reaction = g;
  }

  d.v_dot = params.gravity_vector() + force / params.mass;
  d.omega_dot = torque.cwiseQuotient(J);

  if (mode.is_ground()) {
    // Hold the roll coordinate: n . omega is proportional to the roll rate, so its second
    // derivative is cancelled with the least kinetic-energy correction J^-1 n lambda.
    const PlanarKinematics k = planar_kinematics(state);
    const Mat3 Rt = R.transpose();
    const Vec3 x_G(std::cos(k.yaw), std::sin(k.yaw), 0.0);
    const Vec3 y_G(-std::sin(k.yaw), std::cos(k.yaw), 0.0);
    const Vec3 n = Rt * x_G;
    const Vec3 n_dot = -state.omega.cross(n) + k.yaw_rate * (Rt * y_G);
    const Vec3 Jinv_n = n.cwiseQuotient(J);
    const double lambda = -(d.omega_dot.dot(n) + state.omega.dot(n_dot)) / n.dot(Jinv_n);
    d.omega_dot += lambda * Jinv_n;
  }
  return out;
}

StateDerivative derivative(const RobotState& state, const ControlInput& u, const Mode& mode,
                           const VehicleParams& params) {
  DerivativeResult r = evaluate(state, u, mode, params);
  if (r.reaction && r.reaction->contact_lost) {
    std::ostringstream msg;
    msg << "ground contact lost: normal force " << r.reaction->F_n << " N";
    throw Error(msg.str());
  }
  return r.derivative;
}

StateVector rk4_step(const StateVector& x, const ControlInput& u, const Mode& mode, double dt,
                     const VehicleParams& params, const LateralContact& lateral) {
  auto f = [&](const StateVector& s) {
    return evaluate(RobotState::unpack(s), u, mode, params, lateral).derivative.pack();
  };
  const StateVector k1 = f(x);
  const StateVector k2 = f(x + 0.5 * dt * k1);
  const StateVector k3 = f(x + 0.5 * dt * k2);
  const StateVector k4 = f(x + dt * k3);
  StateVector next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  next.segment<4>(6).normalize();
  return next;
}

RobotState project_ground_constraints(const RobotState& state, const VehicleParams& params, bool stick) {
  RobotState s = state;
  const EulerAngles e = state.q.euler_unchecked();
  s.p.z() = params.contact_height;
  s.v.z() = 0.0;
  s.q = Orientation::from_euler(0.0, e.pitch, e.yaw);
  const Vec3 x_G(std::cos(e.yaw), std::sin(e.yaw), 0.0);
  const Vec3 y_G(-std::sin(e.yaw), std::cos(e.yaw), 0.0);
  const Vec3 n = s.q.rotation().transpose() * x_G;
  const Vec3 Jinv_n = n.cwiseQuotient(params.inertia);
  s.omega -= (s.omega.dot(n) / n.dot(Jinv_n)) * Jinv_n;
  if (stick) s.v -= s.v.dot(y_G) * y_G;
  return s;
}

RobotState step(const RobotState& state, const ControlInput& u, const Mode& mode, double dt,
                const VehicleParams& params, const LateralContact& lateral) {
  if (!(dt > 0.0) || dt > 0.02) {
    std::ostringstream msg;
    msg << "step: dt = " << dt << " s outside (0, 0.02]";
    throw ConfigError(msg.str());
  }
  check_input_bounds(u, params);
  const StateVector next = rk4_step(state.pack(), u, mode, dt, params, lateral);
  check_divergence(next);
  RobotState out = RobotState::unpack(next);
  if (mode.is_ground()) out = project_ground_constraints(out, params, !lateral.slipping);
  return out;
}

SlipStatus slip_check(const GroundReaction& reaction, const VehicleParams& params) {
  const double limit = params.lateral_friction * reaction.F_n;
  SlipStatus s;
  if (std::abs(reaction.f_l) <= limit) return s;
  s.slipping = true;
  s.excess = std::abs(reaction.f_l) - limit;
  return s;
}

double rotor_power(const ControlInput& u, const VehicleParams& params) {
  const double denom = 2.0 * params.disk_area * params.air_density;
  auto p = [&](double T) {
    const double t = std::max(T, 0.0);
    return std::sqrt(t * t * t / denom);
  };
  return p(u.thrust1) + p(u.thrust2);
}

Simulator::Simulator(const VehicleParams& params, const Options& options, const RobotState& initial,
                     const Mode& mode)
    : params_(params), options_(options), state_(initial), mode_(mode) {
  params_.validate();
  if (!(options_.dt > 0.0) || options_.dt > 0.02) throw ConfigError("simulator: dt must lie in (0, 0.02] s");
  if (!state_.finite()) throw ConfigError("simulator: initial state is not finite");
  if (mode_.is_ground()) state_ = project_ground_constraints(state_, params_, true);
}

Simulator::StepReport Simulator::advance(const ControlInput& u) {
  check_input_bounds(u, params_);
  StepReport report;
  report.power = rotor_power(u, params_);
  const BodyWrench wrench = actuator_wrench_unchecked(u, params_);

  if (mode_.is_ground()) {
    ReactionOptions probe;
    probe.clamp_wheel_normals = true;
    const GroundReaction stick =
        ground_reaction(state_, wrench, kinematic_lateral_accel(state_, params_.speed_deadband), params_, probe);
    if (stick.contact_lost) {
      mode_ = Mode::aerial();
      report.takeoff = true;
    } else {
      LateralContact lateral;
      const PlanarKinematics k = planar_kinematics(state_);
      if (options_.slip_model) {
        if (std::abs(k.lateral_speed) > options_.lateral_slip_threshold) {
          lateral = {true, k.lateral_speed > 0.0 ? -1.0 : 1.0};
        } else if (slip_check(stick, params_).slipping) {
          lateral = {true, stick.f_l > 0.0 ? 1.0 : -1.0};
        }
      }
      ReactionOptions used = probe;
      used.lateral = lateral;
      report.reaction = lateral.slipping ? ground_reaction(state_, wrench, 0.0, params_, used) : stick;
      report.slipping = lateral.slipping;
      report.lift_off = report.reaction->lift_off_left || report.reaction->lift_off_right;

      const int direction = k.longitudinal_speed < -params_.speed_deadband ? -1 : 1;
      mode_ = Mode::ground(direction);
      RobotState next = step(state_, u, mode_, options_.dt, params_, lateral);
      if (lateral.slipping) {
        // Kinetic friction cannot reverse the sliding direction within one step.
        const PlanarKinematics after = planar_kinematics(next);
        if (after.lateral_speed * k.lateral_speed < 0.0) next = project_ground_constraints(next, params_, true);
      }
      state_ = next;
      time_ += options_.dt;
      report.mode = mode_;
      return report;
    }
  }

  state_ = step(state_, u, mode_, options_.dt, params_);
  if (state_.p.z() <= params_.contact_height + 1e-3 && state_.v.z() <= 0.0) {
    const PlanarKinematics k = planar_kinematics(state_);
    mode_ = Mode::ground(k.longitudinal_speed < -params_.speed_deadband ? -1 : 1);
    state_ = project_ground_constraints(state_, params_, !options_.slip_model);
    report.touchdown = true;
  }
  time_ += options_.dt;
  report.mode = mode_;
  return report;
}

}  // namespace bimodal
