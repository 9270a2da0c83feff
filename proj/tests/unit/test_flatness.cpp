#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bimodal/flatness.hpp"

using namespace bimodal;

namespace {

// Ground circle of radius R at speed v, counter-clockwise from (R, 0).
FlatSampleGround circle_sample(double t, double R, double v, double thrust_z, const VehicleParams& p) {
  const double w = v / R;
  FlatSampleGround s;
  s.t = t;
  s.thrust_z = {thrust_z, 0.0, 0.0};
  for (int k = 0; k < 5; ++k) {
    const double phase = w * t + k * kPi / 2, scale = std::pow(w, k);
    s.p[k] = Vec3(R * scale * std::cos(phase), R * scale * std::sin(phase), k == 0 ? p.contact_height : 0.0);
  }
  return s;
}

FlatSampleAerial aerial_circle(double t, double R, double v, bool follow) {
  const double w = v / R;
  FlatSampleAerial s;
  s.t = t;
  s.yaw_from_velocity = follow;
  for (int k = 0; k < 5; ++k) {
    const double phase = w * t + k * kPi / 2, scale = std::pow(w, k);
    s.p[k] = Vec3(R * scale * std::cos(phase), R * scale * std::sin(phase), k == 0 ? 1.0 : 0.0);
  }
  return s;
}

double oracle_error(const ReferencePoint& r, const VehicleParams& p) {
  return (derivative(r.state, r.input, r.mode, p).pack() - r.state_dot.pack()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(GroundYaw, Examples) {
  EXPECT_NEAR(*ground_yaw({1, 0, 0}, 1), 0.0, 1e-15);
  EXPECT_NEAR(*ground_yaw({0, 2, 0}, 1), kPi / 2, 1e-15);
  EXPECT_NEAR(*ground_yaw({1, 1, 0}, -1), -kPi / 4, 1e-15);
  EXPECT_FALSE(ground_yaw({0.001, 0, 0}, 1).has_value());
}

TEST(GroundPitch, Examples) {
  VehicleParams p;
  p.rolling_friction = 0.0;
  EXPECT_NEAR(ground_pitch(Vec3::Zero(), 0.0, 6.0, p), 0.0, 1e-15);
  const double theta = ground_pitch({1.0, 0.0, 0.0}, 0.0, 6.0, p);
  EXPECT_NEAR(theta, std::asin(0.83 / 6.0), 1e-12);
  EXPECT_NEAR(theta, 0.1388, 5e-5);
}

TEST(GroundPitch, RoundTripThroughDynamics) {
  const VehicleParams p;
  for (double a : {-1.5, 0.3, 1.0, 2.0}) {
    const double theta = ground_pitch({a, 0.0, 0.0}, 0.0, 6.0, p, 1.0);
    RobotState s;
    s.p.z() = p.contact_height;
    s.v.x() = 1.0;
    s.q = Orientation::from_euler(0.0, theta, 0.0);
    EXPECT_NEAR(derivative(s, {3.0, 3.0, 0.0, 0.0}, Mode::ground(), p).v_dot.x(), a, 1e-9);
  }
}

TEST(GroundPitch, UnreachableRaises) {
  EXPECT_THROW(ground_pitch({20.0, 0.0, 0.0}, 0.0, 2.0, VehicleParams{}), InfeasibleReference);
}

TEST(GroundRates, Examples) {
  EXPECT_LT(ground_world_rates(0.0, 0.4, 0.0).norm(), 1e-15);
  EXPECT_LT((ground_world_rates(0.3, 0.0, 0.5) - Vec3(0.0, 0.3, 0.5)).norm(), 1e-15);
  EXPECT_LT((ground_body_rates(0.0, 0.3, 0.5) - Vec3(0.0, 0.3, 0.5)).norm(), 1e-15);
}

TEST(GroundRates, AccelsMatchFiniteDifferences) {
  auto theta = [](double t) { return 0.1 * std::sin(1.3 * t); };
  auto psi = [](double t) { return 0.7 * t + 0.2 * std::cos(0.9 * t); };
  const double h = 1e-5;
  for (double t = 0.0; t < 5.0; t += 0.37) {
    auto d1 = [&](auto f, double x) { return (f(x + h) - f(x - h)) / (2 * h); };
    auto d2 = [&](auto f, double x) { return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h); };
    auto w = [&](double x) { return ground_body_rates(theta(x), d1(theta, x), d1(psi, x)); };
    const Vec3 fd = (w(t + 1e-4) - w(t - 1e-4)) / 2e-4;
    const Vec3 an = ground_body_accels(theta(t), d1(theta, t), d2(theta, t), d1(psi, t), d2(psi, t));
    EXPECT_LT((fd - an).cwiseAbs().maxCoeff(), 1e-5) << "t = " << t;
  }
}

TEST(WheelNormals, Examples) {
  const VehicleParams p;
  const WheelNormals even = wheel_normals(4.0, 0.0, 0.0, 0.0, p);
  EXPECT_EQ(even.left, 2.0);
  EXPECT_EQ(even.right, 2.0);
  const WheelNormals n = wheel_normals(4.0, 1.0, 0.0, 0.0, p);
  EXPECT_NEAR(n.left, 2.0 - 0.15 / 0.09, 1e-12);
  EXPECT_NEAR(n.left, 0.333, 5e-4);
  EXPECT_NEAR(n.right, 3.667, 5e-4);
}

TEST(WheelNormals, SumIsTotal) {
  const VehicleParams p;
  for (double fn : {0.5, 4.0, 7.0})
    for (double fl : {-2.0, 0.3, 1.7})
      for (double tx : {-0.1, 0.0, 0.05}) {
        const WheelNormals n = wheel_normals(fn, fl, tx, 0.1, p);
        // exact up to the rounding of the two halves
        EXPECT_LE(std::abs(n.left + n.right - fn), 4 * 2.3e-16 * std::max({fn, std::abs(n.left), std::abs(n.right)}));
      }
}

TEST(LateralThrust, Approximation) {
  const VehicleParams p;
  EXPECT_EQ(lateral_thrust_approx(0.0, p), 0.0);
  EXPECT_NEAR(lateral_thrust_approx(2.0, p), 0.83 * 2.0 / (1.0 - 0.04 / 0.15), 1e-12);
  EXPECT_NEAR(lateral_thrust_approx(2.0, p), 2.264, 5e-4);
  for (double a : {-3.0, -0.5, 0.5, 3.0}) EXPECT_GT(std::abs(lateral_thrust_approx(a, p)), p.mass * std::abs(a));
}

TEST(GroundFlatness, StraightLineIsUnforced) {
  VehicleParams p;
  p.rolling_friction = 0.0;
  FlatSampleGround s;
  s.p[0] = Vec3(0.0, 0.0, p.contact_height);
  s.p[1] = Vec3(1.0, 0.0, 0.0);
  s.thrust_z = {5.0, 0.0, 0.0};
  const ReferencePoint r = ground_flat_to_reference(s, p);
  EXPECT_NEAR(r.input.tilt1, 0.0, 1e-12);
  EXPECT_NEAR(r.input.tilt2, 0.0, 1e-12);
  EXPECT_NEAR(r.input.thrust1, 2.5, 1e-12);
  EXPECT_NEAR(r.input.thrust2, 2.5, 1e-12);
  EXPECT_NEAR(r.state.q.euler().pitch, 0.0, 1e-12);
}

TEST(GroundFlatness, CircleOracle) {
  const VehicleParams p;
  for (int i = 0; i < 20; ++i) {
    const ReferencePoint r = ground_flat_to_reference(circle_sample(0.3 * i, 2.0, 1.5, 5.0, p), p);
    EXPECT_LT(oracle_error(r, p), 1e-6);
  }
}

TEST(GroundFlatness, LateralThrustNearApproximation) {
  const VehicleParams p;
  const ReferencePoint r = ground_flat_to_reference(circle_sample(0.0, 2.0, 1.5, 5.0, p), p);
  const double Ty = actuator_wrench(r.input, p).thrust.y();
  const double approx = lateral_thrust_approx(1.5 * 1.5 / 2.0, p);
  EXPECT_LT(std::abs(std::abs(Ty) - approx) / approx, 0.15);
  EXPECT_GT(std::abs(Ty), p.mass * 1.5 * 1.5 / 2.0);
}

TEST(GroundFlatness, InfeasibleNormalRaises) {
  const VehicleParams p;
  // tight, fast circle at high body thrust leaves the inner wheel in the air
  EXPECT_THROW(ground_flat_to_reference(circle_sample(0.0, 0.5, 2.5, 7.5, p), p), Error);
}

TEST(AerialFlatness, Hover) {
  const VehicleParams p;
  FlatSampleAerial s;
  s.p[0] = Vec3(0, 0, 1);
  const ReferencePoint r = aerial_flat_to_reference(s, p);
  EXPECT_NEAR(r.input.thrust1, p.weight() / 2, 1e-12);
  EXPECT_NEAR(r.input.thrust2, p.weight() / 2, 1e-12);
  EXPECT_NEAR(r.input.tilt1, 0.0, 1e-12);
  EXPECT_NEAR(r.input.tilt2, 0.0, 1e-12);
  EXPECT_LT((r.state.q.rotation() - Mat3::Identity()).norm(), 1e-12);
}

TEST(AerialFlatness, SteadyLateralAcceleration) {
  const VehicleParams p;
  FlatSampleAerial s;
  s.p[0] = Vec3(0, 0, 1);
  s.p[2] = Vec3(0, 1, 0);
  const ReferencePoint r = aerial_flat_to_reference(s, p);
  // with zero rates the roll torque h1 T_y must vanish, so the tilts are equal (here zero)
  EXPECT_NEAR(r.input.tilt1, r.input.tilt2, 1e-12);
  EXPECT_NEAR(r.state.q.euler().pitch, 0.0, 1e-12);
  // banking toward +y is a negative roll
  EXPECT_NEAR(std::tan(r.state.q.euler().roll), -1.0 / p.gravity, 1e-9);
  EXPECT_LT(oracle_error(r, p), 1e-9);
}

TEST(AerialFlatness, CircleWithBankProfile) {
  const VehicleParams p;
  for (bool follow : {false, true}) {
    auto sampler = [&](double t) { return aerial_circle(t, 2.0, 2.0, follow); };
    const BankProfile prof = solve_bank_profile(sampler, 0.0, 8.0, p);
    for (double t = 0.0; t <= 8.0; t += 0.1) {
      FlatSampleAerial s = sampler(t);
      s.bank = prof.at(t);
      const ReferencePoint r = aerial_flat_to_reference(s, p);
      EXPECT_LT(oracle_error(r, p), 1e-6) << "t = " << t;
    }
  }
}

TEST(AerialFlatness, QuasiStaticIsFlagged) {
  const VehicleParams p;
  const ReferencePoint r = aerial_flat_to_reference(aerial_circle(0.0, 2.0, 2.0, true), p);
  EXPECT_TRUE(r.flags.bank_quasi_static);
}

TEST(Recovery, InvertsActuatorMap) {
  const VehicleParams p;
  const ControlInput u{3.1, 4.4, 0.2, -0.15};
  const BodyWrench w = actuator_wrench(u, p);
  const ControlInput back = recover_inputs(w.thrust.z(), w.thrust.y(), w.torque.y(), w.torque.z(), p);
  EXPECT_LT((back.pack() - u.pack()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Options, ClampFlagsInputs) {
  const VehicleParams p;
  FlatSampleAerial s;
  s.p[0] = Vec3(0, 0, 1);
  s.p[2] = Vec3(0, 0, 12.0);
  EXPECT_THROW(aerial_flat_to_reference(s, p), BoundViolation);
  FlatnessOptions o;
  o.clamp_inputs = true;
  const ReferencePoint r = aerial_flat_to_reference(s, p, o);
  EXPECT_TRUE(r.flags.inputs_clamped);
  EXPECT_LE(r.input.thrust1, p.max_thrust);
}
