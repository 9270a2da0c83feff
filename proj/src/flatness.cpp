#include "bimodal/flatness.hpp"

#include <algorithm>
#include <sstream>

#include "bimodal/taylor.hpp"

namespace bimodal {

namespace {

using GJet = Taylor<2>;

template <typename T>
struct JetVec {
  T x, y, z;

  friend JetVec operator+(const JetVec& a, const JetVec& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend JetVec operator*(const T& s, const JetVec& a) { return {s * a.x, s * a.y, s * a.z}; }
  JetVec dt() const { return {x.dt(), y.dt(), z.dt()}; }
};

template <typename T>
T dot(const JetVec<T>& a, const JetVec<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename T>
JetVec<T> cross(const JetVec<T>& a, const JetVec<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename T>
JetVec<T> normalized(const JetVec<T>& a, T& norm) {
  norm = sqrt(dot(a, a));
  const T inv = 1.0 / norm;
  return inv * a;
}

std::string at_sample(const std::string& what, long index) {
  return index >= 0 ? what + " (sample " + std::to_string(index) + ")" : what;
}

ControlInput finalize_input(ControlInput u, const VehicleParams& params, const FlatnessOptions& options,
                            ReferenceFlags& flags) {
  if (options.clamp_inputs) {
    const InputVector x = u.pack();
    const InputVector c = x.cwiseMax(params.input_lower()).cwiseMin(params.input_upper());
    if ((c - x).cwiseAbs().maxCoeff() > 0.0) flags.inputs_clamped = true;
    return ControlInput::unpack(c);
  }
  try {
    check_input_bounds(u, params);
  } catch (const BoundViolation& e) {
    throw BoundViolation(at_sample(std::string("reference ") + e.what(), options.sample_index));
  }
  return u;
}

double anchor_yaw(double yaw, const std::optional<double>& previous) {
  return previous ? unwrap_angle(yaw, *previous) : yaw;
}

BodyWrench ground_wrench(double thrust_z, double thrust_y, const VehicleParams& params) {
  BodyWrench w;
  w.thrust = Vec3(0.0, thrust_y, thrust_z);
  w.torque = Vec3(params.servo_offset * thrust_y, 0.0, 0.0);
  return w;
}

}  // namespace

std::optional<double> ground_yaw(const Vec3& p_dot, int direction, double speed_deadband) {
  if (std::hypot(p_dot.x(), p_dot.y()) < speed_deadband) return std::nullopt;
  return (direction >= 0 ? 1.0 : -1.0) * std::atan2(p_dot.y(), p_dot.x());
}

std::optional<double> ground_heading(const Vec3& p_dot, int direction, double speed_deadband) {
  if (std::hypot(p_dot.x(), p_dot.y()) < speed_deadband) return std::nullopt;
  const double s = direction >= 0 ? 1.0 : -1.0;
  return std::atan2(s * p_dot.y(), s * p_dot.x());
}

double ground_pitch(const Vec3& p_ddot, double yaw, double thrust_z, const VehicleParams& params,
                    double rolling_sign, long sample_index) {
  const double m = params.mass;
  const double mu = params.rolling_friction * rolling_sign;
  const double along = p_ddot.x() * std::cos(yaw) + p_ddot.y() * std::sin(yaw);
  const double arg = (m * along + mu * m * params.gravity) / (std::sqrt(1.0 + mu * mu) * thrust_z);
  if (!(thrust_z > 0.0) || !(std::abs(arg) <= 1.0)) {
    std::ostringstream msg;
    msg << "ground pitch: arcsine argument " << arg << " outside [-1, 1]";
    throw InfeasibleReference(msg.str(), sample_index);
  }
  return std::asin(arg) - std::atan(mu);
}

Vec3 ground_world_rates(double pitch_rate, double yaw, double yaw_rate) {
  return {-pitch_rate * std::sin(yaw), pitch_rate * std::cos(yaw), yaw_rate};
}

Vec3 ground_body_rates(double pitch, double pitch_rate, double yaw_rate) {
  return {-yaw_rate * std::sin(pitch), pitch_rate, yaw_rate * std::cos(pitch)};
}

Vec3 ground_body_accels(double pitch, double pitch_rate, double pitch_acc, double yaw_rate, double yaw_acc) {
  const double s = std::sin(pitch), c = std::cos(pitch);
  return {-yaw_acc * s - yaw_rate * pitch_rate * c, pitch_acc, yaw_acc * c - yaw_rate * pitch_rate * s};
}

WheelNormals wheel_normals(double F_n, double f_l, double tau_Bx, double pitch, const VehicleParams& params) {
  const double split = f_l * params.wheel_radius / params.wheel_offset + tau_Bx * std::cos(pitch) / params.wheel_offset;
  return {0.5 * F_n - split, 0.5 * F_n + split};
}

double lateral_thrust_approx(double lateral_accel, const VehicleParams& params) {
  return params.mass * lateral_accel / (1.0 - params.servo_offset / params.wheel_radius);
}

ControlInput recover_inputs(double thrust_z, double thrust_y, double tau_y, double tau_z,
                            const VehicleParams& params) {
  const double l = params.arm_length;
  // a_i = T_i cos(delta_i), b_i = T_i sin(delta_i); the wrench map is linear in them.
  const double a1 = 0.5 * (thrust_z - tau_y / l);
  const double a2 = 0.5 * (thrust_z + tau_y / l);
  const double b1 = 0.5 * (-thrust_y - tau_z / l);
  const double b2 = 0.5 * (-thrust_y + tau_z / l);
  return {std::hypot(a1, b1), std::hypot(a2, b2), std::atan2(b1, a1), std::atan2(b2, a2)};
}

ReferencePoint ground_flat_to_reference(const FlatSampleGround& sample, const VehicleParams& params,
                                        const FlatnessOptions& options) {
  const long idx = options.sample_index;
  const double m = params.mass;
  ReferencePoint ref;
  ref.t = sample.t;
  ref.mode = Mode::ground(sample.direction);

  const double thrust_z = sample.thrust_z[0];
  if (!(thrust_z > 0.0) || !(thrust_z < params.weight()))
    throw InfeasibleReference(at_sample("ground reference: T_B,z must lie in (0, mg)", idx), idx);

  const Vec3& v = sample.p[1];
  const double s = sample.direction >= 0 ? 1.0 : -1.0;
  const bool moving = std::hypot(v.x(), v.y()) >= params.speed_deadband;

  GJet yaw;
  double sigma = 0.0;
  if (moving) {
    const GJet vx = s * GJet::from_derivatives(std::array{sample.p[1].x(), sample.p[2].x(), sample.p[3].x()});
    const GJet vy = s * GJet::from_derivatives(std::array{sample.p[1].y(), sample.p[2].y(), sample.p[3].y()});
    yaw = atan2(vy, vx);
    yaw[0] = anchor_yaw(yaw[0], sample.previous_yaw);
    sigma = s;
  } else {
    yaw = GJet(sample.previous_yaw.value_or(0.0));
    ref.flags.yaw_held = true;
  }

  GJet sy, cy;
  sincos(yaw, sy, cy);
  const GJet ax = GJet::from_derivatives(std::array{sample.p[2].x(), sample.p[3].x(), sample.p[4].x()});
  const GJet ay = GJet::from_derivatives(std::array{sample.p[2].y(), sample.p[3].y(), sample.p[4].y()});
  const GJet along = ax * cy + ay * sy;
  const GJet tz = GJet::from_derivatives(sample.thrust_z);
  const double mu = params.rolling_friction * sigma;
  const GJet arg = (m * along + mu * m * params.gravity) / (std::sqrt(1.0 + mu * mu) * tz);
  if (!(std::abs(arg.value()) < 1.0)) {
    std::ostringstream msg;
    msg << "ground reference: pitch arcsine argument " << arg.value() << " outside (-1, 1)";
    throw InfeasibleReference(msg.str(), idx);
  }
  const GJet pitch = asin(arg) - std::atan(mu);

  const double th = pitch.value(), th_d = pitch.derivative(1), th_dd = pitch.derivative(2);
  const double psi = yaw.value(), psi_d = yaw.derivative(1), psi_dd = yaw.derivative(2);
  ref.yaw = psi;

  RobotState& x = ref.state;
  x.p = sample.p[0];
  x.v = sample.p[1];
  x.q = Orientation::from_euler(0.0, th, psi);
  x.omega = ground_body_rates(th, th_d, psi_d);
  const Vec3 omega_dot = ground_body_accels(th, th_d, th_dd, psi_d, psi_dd);

  const Vec3& J = params.inertia;
  const Vec3 M = J.cwiseProduct(omega_dot) + x.omega.cross(J.cwiseProduct(x.omega));
  const double longitudinal = x.v.x() * std::cos(psi) + x.v.y() * std::sin(psi);
  const double a_l = moving ? longitudinal * psi_d : 0.0;

  ReactionOptions ro;
  ro.rolling_sign = sigma;
  auto reaction_at = [&](double thrust_y) {
    return ground_reaction(x, ground_wrench(thrust_z, thrust_y, params), a_l, params, ro);
  };

  ControlInput u;
  GroundReaction g;
  if (!options.opposed_tilt) {
    // tau_G is affine in T_B,y, so the roll balance h1 Y + tau_G,x(Y) = M_x is solved exactly.
    const GroundReaction g0 = reaction_at(0.0);
    const GroundReaction g1 = reaction_at(1.0);
    const double slope = params.servo_offset + g1.tau_G.x() - g0.tau_G.x();
    const double thrust_y = (M.x() - g0.tau_G.x()) / slope;
    g = reaction_at(thrust_y);
    u = recover_inputs(thrust_z, thrust_y, M.y() - g.tau_G.y(), M.z() - g.tau_G.z(), params);
  } else {
    // With delta1 = -delta2 only T_z, tau_y, tau_z are assignable; the roll balance is left to
    // the ground constraint. T_B,y is a by-product, so iterate it to consistency.
    double thrust_y = 0.0;
    const double l = params.arm_length;
    for (int it = 0; it < 100; ++it) {
      g = reaction_at(thrust_y);
      const double tau_y = M.y() - g.tau_G.y(), tau_z = M.z() - g.tau_G.z();
      const double delta = std::atan(-tau_z / (l * thrust_z));
      const double sum = thrust_z / std::cos(delta);
      const double diff = tau_y / (l * std::cos(delta));
      u = {0.5 * (sum - diff), 0.5 * (sum + diff), delta, -delta};
      const double next = std::sin(delta) * diff;
      const bool done = std::abs(next - thrust_y) < 1e-13;
      thrust_y = next;
      if (done) break;
    }
    g = reaction_at(thrust_y);
  }

  if (g.contact_lost)
    throw InfeasibleReference(at_sample("ground reference: normal force is negative", idx), idx);
  if (g.lift_off_left || g.lift_off_right) {
    if (!options.tolerate_wheel_lift) {
      std::ostringstream msg;
      msg << "ground reference: wheel lift-off (left " << g.F_n_left << " N, right " << g.F_n_right << " N)";
      throw InfeasibleReference(msg.str(), idx);
    }
    ref.flags.wheel_lift = true;
  }
  ref.reaction = g;
  ref.input = finalize_input(u, params, options, ref.flags);

  StateDerivative& d = ref.state_dot;
  d.p_dot = x.v;
  d.v_dot = sample.p[2];
  d.q_dot = quaternion_rate(x.q, x.omega);
  d.omega_dot = omega_dot;
  return ref;
}


namespace {

// Thrust-direction frame R0 (z along p'' - g, x toward the heading) with its body rates.
struct AerialFrame {
  JetVec<GJet> x0, y0, z0;
  GJet yaw;
  double lever = 0.0;  ///< h1 m |f|: roll torque per unit sin(bank)
  double thrust = 0.0; ///< m |f|
  Vec3 omega0 = Vec3::Zero();
  Vec3 omega0_dot = Vec3::Zero();
  bool yaw_held = false;
};

GJet jet_of(const std::array<Vec3, 5>& p, int first, int axis) {
  return GJet::from_derivatives(std::array{p[first][axis], p[first + 1][axis], p[first + 2][axis]});
}

AerialFrame aerial_frame(const FlatSampleAerial& s, const VehicleParams& params, long idx) {
  AerialFrame fr;
  JetVec<GJet> f{jet_of(s.p, 2, 0), jet_of(s.p, 2, 1), jet_of(s.p, 2, 2)};
  f.z[0] += params.gravity;
  if (!(dot(f, f).value() > 1e-6 * params.gravity * params.gravity))
    throw InfeasibleReference(at_sample("aerial reference: commanded free fall", idx), idx);

  if (s.yaw_from_velocity && std::hypot(s.p[1].x(), s.p[1].y()) >= params.speed_deadband) {
    fr.yaw = atan2(jet_of(s.p, 1, 1), jet_of(s.p, 1, 0));
    fr.yaw[0] = anchor_yaw(fr.yaw[0], s.previous_yaw);
  } else if (s.yaw_from_velocity) {
    fr.yaw = GJet(s.previous_yaw.value_or(s.yaw[0]));
    fr.yaw_held = true;
  } else {
    fr.yaw = GJet::from_derivatives(s.yaw);
  }

  GJet f_norm;
  fr.z0 = normalized(f, f_norm);
  GJet sy, cy;
  sincos(fr.yaw, sy, cy);
  GJet y_norm;
  fr.y0 = normalized(cross(fr.z0, JetVec<GJet>{cy, sy, GJet(0.0)}), y_norm);
  if (!(y_norm.value() > 1e-6))
    throw InfeasibleReference(at_sample("aerial reference: thrust axis aligned with heading", idx), idx);
  fr.x0 = cross(fr.y0, fr.z0);

  // omega0 = vee(R0^T R0'); the jets carry one more order for its derivative.
  const GJet wx = dot(fr.z0, fr.y0.dt()), wy = dot(fr.x0, fr.z0.dt()), wz = dot(fr.y0, fr.x0.dt());
  fr.omega0 = Vec3(wx.value(), wy.value(), wz.value());
  fr.omega0_dot = Vec3(wx.derivative(1), wy.derivative(1), wz.derivative(1));
  fr.thrust = params.mass * f_norm.value();
  fr.lever = params.servo_offset * fr.thrust;
  return fr;
}

// gamma'' from J_x w_x' + (J_z - J_y) w_y w_z = h1 m |f| sin(gamma), with
// w = Rx(gamma)^T omega0 + gamma' e_x, hence w_x' = omega0_x' + gamma''.
struct RollForcing {
  double lever = 0.0;
  Vec3 omega0 = Vec3::Zero();
  double omega0_dot_x = 0.0;

  double accel(double gamma, const Vec3& J) const {
    const double c = std::cos(gamma), s = std::sin(gamma);
    const double wy = c * omega0.y() + s * omega0.z();
    const double wz = -s * omega0.y() + c * omega0.z();
    return (lever * s - (J.z() - J.y()) * wy * wz) / J.x() - omega0_dot_x;
  }
  double slope(double gamma, const Vec3& J) const {
    const double c = std::cos(gamma), s = std::sin(gamma);
    const double wy = c * omega0.y() + s * omega0.z();
    const double wz = -s * omega0.y() + c * omega0.z();
    return (lever * c - (J.z() - J.y()) * (wz * wz - wy * wy)) / J.x();
  }
  double quasi_static(const Vec3& J) const {
    double gamma = 0.0;
    for (int it = 0; it < 50; ++it) {
      const double c = std::cos(gamma), s = std::sin(gamma);
      const double wy = c * omega0.y() + s * omega0.z();
      const double wz = -s * omega0.y() + c * omega0.z();
      const double arg = (J.x() * omega0_dot_x + (J.z() - J.y()) * wy * wz) / lever;
      const double next = std::asin(std::clamp(arg, -1.0, 1.0));
      const bool done = std::abs(next - gamma) < 1e-15;
      gamma = next;
      if (done) break;
    }
    return gamma;
  }
};

RollForcing forcing_of(const AerialFrame& fr) { return {fr.lever, fr.omega0, fr.omega0_dot.x()}; }

}  // namespace

double bank_acceleration(const FlatSampleAerial& sample, double gamma, const VehicleParams& params) {
  return forcing_of(aerial_frame(sample, params, -1)).accel(gamma, params.inertia);
}

double quasi_static_bank(const FlatSampleAerial& sample, const VehicleParams& params) {
  return forcing_of(aerial_frame(sample, params, -1)).quasi_static(params.inertia);
}

ReferencePoint aerial_flat_to_reference(const FlatSampleAerial& sample, const VehicleParams& params,
                                        const FlatnessOptions& options) {
  const long idx = options.sample_index;
  const Vec3& J = params.inertia;
  ReferencePoint ref;
  ref.t = sample.t;
  ref.mode = Mode::aerial();

  const AerialFrame fr = aerial_frame(sample, params, idx);
  ref.flags.yaw_held = fr.yaw_held;
  const RollForcing rf = forcing_of(fr);
  std::array<double, 2> bank{0.0, 0.0};
  if (sample.bank) {
    bank = *sample.bank;
  } else {
    bank[0] = rf.quasi_static(J);
    ref.flags.bank_quasi_static = true;
  }
  const GJet gamma = GJet::from_derivatives(std::array{bank[0], bank[1], rf.accel(bank[0], J)});

  GJet sb, cb;
  sincos(gamma, sb, cb);
  const JetVec<GJet> xb = fr.x0;
  const JetVec<GJet> yb = cb * fr.y0 + sb * fr.z0;
  const JetVec<GJet> zb = (-sb) * fr.y0 + cb * fr.z0;
  const GJet wx = dot(zb, yb.dt()), wy = dot(xb, zb.dt()), wz = dot(yb, xb.dt());

  Mat3 R;
  R << xb.x[0], yb.x[0], zb.x[0],
       xb.y[0], yb.y[0], zb.y[0],
       xb.z[0], yb.z[0], zb.z[0];
  RobotState& x = ref.state;
  x.p = sample.p[0];
  x.v = sample.p[1];
  x.q = Orientation::from_rotation(R);
  x.omega = Vec3(wx.value(), wy.value(), wz.value());
  const Vec3 omega_dot(wx.derivative(1), wy.derivative(1), wz.derivative(1));
  ref.yaw = fr.yaw.value();

  const Vec3 M = J.cwiseProduct(omega_dot) + x.omega.cross(J.cwiseProduct(x.omega));
  const ControlInput u = recover_inputs(fr.thrust * std::cos(bank[0]), fr.thrust * std::sin(bank[0]),
                                        M.y(), M.z(), params);
  ref.input = finalize_input(u, params, options, ref.flags);

  StateDerivative& d = ref.state_dot;
  d.p_dot = x.v;
  d.v_dot = sample.p[2];
  d.q_dot = quaternion_rate(x.q, x.omega);
  d.omega_dot = omega_dot;
  return ref;
}

BankProfile::BankProfile(double t0, double step, std::vector<double> gamma, std::vector<double> gamma_dot,
                         std::vector<double> gamma_ddot)
    : t0_(t0), step_(step), gamma_(std::move(gamma)), gamma_dot_(std::move(gamma_dot)),
      gamma_ddot_(std::move(gamma_ddot)) {
  if (gamma_.size() < 2 || gamma_dot_.size() != gamma_.size() || gamma_ddot_.size() != gamma_.size() ||
      !(step_ > 0.0))
    throw ConfigError("bank profile: need at least two nodes of matching size and a positive step");
}

namespace {

// Quintic Hermite piece on [0, 1] in the local coordinate, from values, slopes and curvatures
// already scaled by the step.
std::array<double, 6> hermite5(double y0, double d0, double a0, double y1, double d1, double a1) {
  return {y0,
          d0,
          0.5 * a0,
          -10.0 * y0 - 6.0 * d0 - 1.5 * a0 + 0.5 * a1 - 4.0 * d1 + 10.0 * y1,
          15.0 * y0 + 8.0 * d0 + 1.5 * a0 - a1 + 7.0 * d1 - 15.0 * y1,
          -6.0 * y0 - 3.0 * d0 - 0.5 * a0 + 0.5 * a1 - 3.0 * d1 + 6.0 * y1};
}

}  // namespace

std::array<double, 2> BankProfile::at(double t) const {
  const double h = step_;
  const double u = std::clamp((t - t0_) / h, 0.0, static_cast<double>(gamma_.size() - 1));
  const std::size_t i = std::min(static_cast<std::size_t>(u), gamma_.size() - 2);
  const double s = u - static_cast<double>(i);
  const auto c = hermite5(gamma_[i], h * gamma_dot_[i], h * h * gamma_ddot_[i], gamma_[i + 1],
                          h * gamma_dot_[i + 1], h * h * gamma_ddot_[i + 1]);
  const double value = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
  const double slope = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
  return {value, slope / h};
}

double BankProfile::second_derivative(double t) const {
  const double h = step_;
  const double u = std::clamp((t - t0_) / h, 0.0, static_cast<double>(gamma_.size() - 1));
  const std::size_t i = std::min(static_cast<std::size_t>(u), gamma_.size() - 2);
  const double s = u - static_cast<double>(i);
  const auto c = hermite5(gamma_[i], h * gamma_dot_[i], h * h * gamma_ddot_[i], gamma_[i + 1],
                          h * gamma_dot_[i + 1], h * h * gamma_ddot_[i + 1]);
  return (2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]))) / (h * h);
}

BankProfile solve_bank_profile(const std::function<FlatSampleAerial(double)>& sampler, double t0, double t1,
                               const VehicleParams& params, double step) {
  if (!(t1 > t0) || !(step > 0.0)) throw ConfigError("bank profile: need t1 > t0 and a positive step");
  const Vec3& J = params.inertia;
  const std::size_t n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((t1 - t0) / step - 1e-9)));
  const double h = (t1 - t0) / static_cast<double>(n);

  std::vector<RollForcing> rf(n + 1);
  std::vector<double> g(n + 1), F(n + 1), dF(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    rf[i] = forcing_of(aerial_frame(sampler(t0 + h * static_cast<double>(i)), params, static_cast<long>(i)));
    g[i] = rf[i].quasi_static(J);
  }

  // Numerov: g[i+1] - 2 g[i] + g[i-1] = h^2/12 (F[i+1] + 10 F[i] + F[i-1]), ends held fixed.
  const double k = h * h / 12.0;
  std::vector<double> sub(n + 1), diag(n + 1), sup(n + 1), rhs(n + 1);
  bool converged = false;
  for (int it = 0; it < 50 && !converged; ++it) {
    for (std::size_t i = 0; i <= n; ++i) {
      F[i] = rf[i].accel(g[i], J);
      dF[i] = rf[i].slope(g[i], J);
    }
    for (std::size_t i = 1; i < n; ++i) {
      rhs[i] = -(g[i + 1] - 2.0 * g[i] + g[i - 1] - k * (F[i + 1] + 10.0 * F[i] + F[i - 1]));
      sub[i] = i > 1 ? 1.0 - k * dF[i - 1] : 0.0;
      diag[i] = -2.0 - 10.0 * k * dF[i];
      sup[i] = i + 1 < n ? 1.0 - k * dF[i + 1] : 0.0;
    }
    // Thomas elimination on the interior nodes.
    for (std::size_t i = 2; i < n; ++i) {
      const double w = sub[i] / diag[i - 1];
      diag[i] -= w * sup[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    double change = 0.0;
    double next = 0.0;
    for (std::size_t i = n - 1; i >= 1; --i) {
      const double delta = (rhs[i] - (i + 1 < n ? sup[i] * next : 0.0)) / diag[i];
      g[i] += delta;
      next = delta;
      change = std::max(change, std::abs(delta));
    }
    converged = change < 1e-14;
  }
  if (!converged) throw InfeasibleReference("aerial reference: bank-angle boundary problem did not converge");
  for (std::size_t i = 0; i <= n; ++i) F[i] = rf[i].accel(g[i], J);

  std::vector<double> gd(n + 1);
  for (std::size_t i = 1; i < n; ++i) gd[i] = (g[i + 1] - g[i - 1]) / (2.0 * h) - h * (F[i + 1] - F[i - 1]) / 12.0;
  gd[0] = (g[1] - g[0]) / h - h * (2.0 * F[0] + F[1]) / 6.0;
  gd[n] = (g[n] - g[n - 1]) / h + h * (2.0 * F[n] + F[n - 1]) / 6.0;
  return BankProfile(t0, h, std::move(g), std::move(gd), std::move(F));
}

}  // namespace bimodal
