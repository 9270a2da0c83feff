#include <gtest/gtest.h>

#include <cmath>

#include "bimodal/trajectory.hpp"

using namespace bimodal;

TEST(Lemniscate, StartState) {
  const Segment s = Segment::lemniscate(3.0, 1.5, 0.5, Vec3(1, 2, 1), 20.0, Mode::aerial());
  EXPECT_LT((s.derivative(0.0, 0) - Vec3(1, 2, 1)).norm(), 1e-15);
  EXPECT_LT((s.derivative(0.0, 1) - Vec3(1.5, 1.5, 0.0)).norm(), 1e-15);
}

TEST(Lemniscate, Periodic) {
  const double W = 0.7, T = 2 * kPi / W;
  const Segment s = Segment::lemniscate(2.0, 1.0, W, Vec3::Zero(), 3 * T, Mode::aerial());
  for (double t = 0.0; t < T; t += 0.31)
    for (int k = 0; k < 5; ++k) EXPECT_LT((s.derivative(t + T, k) - s.derivative(t, k)).norm(), 1e-12);
}

TEST(Lemniscate, DerivativesMatchFiniteDifferences) {
  const double A = 3.0, W = 0.8;
  const Segment s = Segment::lemniscate(A, 1.5, W, Vec3::Zero(), 10.0, Mode::aerial());
  const double h = 1e-5;
  for (double t = 0.2; t < 9.0; t += 0.43)
    for (int k = 0; k < 4; ++k) {
      const Vec3 fd = (s.derivative(t + h, k) - s.derivative(t - h, k)) / (2 * h);
      EXPECT_LT((fd - s.derivative(t, k + 1)).norm(), 1e-6 * A * W * W * std::pow(2 * W, k)) << k;
    }
}

TEST(Lemniscate, PeaksMatchDenseScan) {
  const double A = 2.5, B = 1.25, W = 0.9;
  const Peaks p = lemniscate_peaks(A, B, W);
  const Segment s = Segment::lemniscate(A, B, W, Vec3::Zero(), 2 * kPi / W, Mode::aerial());
  double v = 0.0, a = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double t = s.duration() * i / 100000.0;
    v = std::max(v, s.derivative(t, 1).norm());
    a = std::max(a, s.derivative(t, 2).norm());
  }
  EXPECT_NEAR(p.speed, v, 1e-9);
  EXPECT_NEAR(p.accel, a, 1e-6);
}

TEST(Lemniscate, HalvingRateQuartersAcceleration) {
  EXPECT_NEAR(lemniscate_peaks(2.0, 1.0, 0.5).accel * 4.0, lemniscate_peaks(2.0, 1.0, 1.0).accel, 1e-12);
}

TEST(Lemniscate, FitHitsPaperAerialPeaks) {
  const Segment s = fit_lemniscate(2.9, 3.0, 0.5, Vec3::Zero(), 1, Mode::aerial());
  const Peaks p = s.peaks();
  EXPECT_NEAR(p.speed, 2.9, 1e-9);
  EXPECT_LE(p.accel, 3.0 + 1e-9);
}

TEST(Scaling, CompliantUnchanged) {
  const Segment s = Segment::circle(2.0, 0.5, Vec3::Zero(), 10.0, Mode::aerial());
  const ScaledSegment r = scale_to_limits(s, 5.0, 5.0);
  EXPECT_EQ(r.rate, 1.0);
  EXPECT_EQ(r.segment.duration(), 10.0);
}

TEST(Scaling, SlowsToLimits) {
  const Segment s = Segment::lemniscate(4.0, 2.0, 1.0, Vec3::Zero(), 2 * kPi, Mode::aerial());
  const ScaledSegment r = scale_to_limits(s, 2.9, 3.0);
  EXPECT_LT(r.rate, 1.0);
  EXPECT_LE(r.peaks.speed, 2.9 + 1e-9);
  EXPECT_LE(r.peaks.accel, 3.0 + 1e-9);
  EXPECT_TRUE(std::abs(r.peaks.speed - 2.9) < 1e-9 || std::abs(r.peaks.accel - 3.0) < 1e-9);
  EXPECT_NEAR(r.segment.duration(), s.duration() / r.rate, 1e-12);
}

TEST(Blend, IdenticalEndpointsStayConstant) {
  const std::array<Vec3, 3> a{Vec3(1, 2, 3), Vec3::Zero(), Vec3::Zero()};
  const Segment b = Segment::blend(a, a, 2.0, Mode::aerial());
  for (double t = 0.0; t <= 2.0; t += 0.25) {
    EXPECT_LT((b.derivative(t, 0) - a[0]).norm(), 1e-14);
    EXPECT_LT(b.derivative(t, 1).norm(), 1e-14);
  }
}

TEST(Blend, BoundaryConditions) {
  const std::array<Vec3, 3> a{Vec3(0, 0, 0.15), Vec3(1.0, 0.5, 0.0), Vec3(0.2, -0.3, 0.0)};
  const std::array<Vec3, 3> b{Vec3(3, 1, 1.0), Vec3(0.0, 1.2, 0.4), Vec3(-0.1, 0.0, 0.3)};
  const Segment s = Segment::blend(a, b, 2.5, Mode::aerial());
  for (int k = 0; k < 3; ++k) {
    EXPECT_LT((s.derivative(0.0, k) - a[k]).norm(), 1e-12);
    EXPECT_LT((s.derivative(2.5, k) - b[k]).norm(), 1e-11);
  }
}

TEST(Blend, StretchedForAccelerationLimit) {
  const Segment from = Segment::line(Vec3(0, 0, 0.15), Vec3(1, 0, 0), 1.0, Mode::ground());
  const Segment to = Segment::rest(Vec3(3, 0, 1.0), 1.0, Mode::aerial());
  const BlendResult r = takeoff_landing_blend(from, to, 1.0, 1.0);
  EXPECT_TRUE(r.extended);
  EXPECT_LE(r.segment.peaks().accel, 1.0);
  EXPECT_EQ(r.segment.mode(), Mode::aerial());
}

TEST(Hybrid, RejectsDiscontinuousJoint) {
  const VehicleParams p;
  const Segment a = Segment::line(Vec3(0, 0, 1), Vec3(1, 0, 0), 1.0, Mode::aerial());
  const Segment b = Segment::line(Vec3(1.5, 0, 1), Vec3(1, 0, 0), 1.0, Mode::aerial());
  EXPECT_THROW(HybridTrajectory({a, b}, 4.0, p), ConfigError);
}

TEST(Hybrid, RejectsGroundOffPlane) {
  const VehicleParams p;
  const Segment a = Segment::line(Vec3(0, 0, 1), Vec3(1, 0, 0), 1.0, Mode::ground());
  EXPECT_THROW(HybridTrajectory({a}, 4.0, p), ConfigError);
}

TEST(Hybrid, SegmentLookupAndHold) {
  const VehicleParams p;
  const Segment a = Segment::line(Vec3(0, 0, 1), Vec3(1, 0, 0), 2.0, Mode::aerial());
  const Segment b = Segment::line(Vec3(2, 0, 1), Vec3(1, 0, 0), 3.0, Mode::aerial());
  const HybridTrajectory h({a, b}, 4.0, p);
  EXPECT_EQ(h.duration(), 5.0);
  EXPECT_EQ(h.segment_index(1.999), 0u);
  EXPECT_EQ(h.segment_index(2.0), 1u);
  EXPECT_EQ(h.segment_index(99.0), 1u);
  const auto after = h.flat(6.0);
  EXPECT_LT((after[0] - Vec3(5, 0, 1)).norm(), 1e-12);
  EXPECT_EQ(after[1].norm(), 0.0);
}

TEST(Hybrid, ThrustRampIsSmooth) {
  const VehicleParams p;
  HybridTrajectory h({Segment::rest(Vec3(0, 0, p.contact_height), 4.0, Mode::ground())}, 4.0, p);
  h.add_thrust_ramp({1.0, 3.0, 4.0, 8.0});
  EXPECT_EQ(h.thrust_z(0.5)[0], 4.0);
  EXPECT_EQ(h.thrust_z(3.5)[0], 8.0);
  EXPECT_NEAR(h.thrust_z(2.0)[0], 6.0, 1e-12);
  const double d = 1e-6;
  for (double t : {1.3, 2.0, 2.7}) EXPECT_NEAR((h.thrust_z(t + d)[0] - h.thrust_z(t - d)[0]) / (2 * d), h.thrust_z(t)[1], 1e-6);
  EXPECT_NEAR(h.thrust_z(1.0)[1], 0.0, 1e-12);
  EXPECT_NEAR(h.thrust_z(3.0)[1], 0.0, 1e-12);
}

TEST(References, RestGivesIdenticalSamples) {
  const VehicleParams p;
  const HybridTrajectory h({Segment::rest(Vec3(1, 1, 1), 5.0, Mode::aerial())}, 4.0, p);
  const auto refs = sample_references(h, 0.5, 10, 0.05, p);
  ASSERT_EQ(refs.size(), 11u);
  for (const ReferencePoint& r : refs) {
    EXPECT_EQ(r.state.pack(), refs[0].state.pack());
    EXPECT_EQ(r.input.pack(), refs[0].input.pack());
  }
  EXPECT_NEAR(refs[0].input.thrust1, p.weight() / 2, 1e-12);
}

TEST(References, ShiftConsistency) {
  const VehicleParams p;
  const Segment s = fit_lemniscate(2.0, 2.0, 0.5, Vec3(0, 0, p.contact_height), 1, Mode::ground());
  ReferenceGenerator gen(HybridTrajectory({s}, 0.6 * p.weight(), p), p);
  const auto a = gen.sample(1.0, 20, 0.05);
  const auto b = gen.sample(1.05, 19, 0.05);
  for (int k = 0; k < 20; ++k) {
    EXPECT_LT((a[k + 1].state.pack() - b[k].state.pack()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a[k + 1].input.pack() - b[k].input.pack()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(References, PaperGroundEightFeasible) {
  const VehicleParams p;
  const Segment s = fit_lemniscate(2.8, 3.0, 0.5, Vec3(0, 0, p.contact_height), 1, Mode::ground());
  ReferenceGenerator gen(HybridTrajectory({s}, 0.6 * p.weight(), p), p);
  for (double t = 0.0; t <= s.duration(); t += 0.01) {
    const ReferencePoint r = gen.at(t);  // throws on a bound or normal violation
    ASSERT_TRUE(r.reaction.has_value());
    EXPECT_GE(r.reaction->F_n_left, 0.0);
    EXPECT_GE(r.reaction->F_n_right, 0.0);
    EXPECT_NO_THROW(check_input_bounds(r.input, p));
  }
}

TEST(References, AerialEightOracle) {
  const VehicleParams p;
  const Segment s = fit_lemniscate(2.9, 3.0, 0.5, Vec3(0, 0, 1), 1, Mode::aerial());
  ReferenceGenerator gen(HybridTrajectory({s}, 0.6 * p.weight(), p), p);
  ASSERT_EQ(gen.bank_profiles().size(), 1u);
  double worst = 0.0;
  for (double t = 0.0; t <= s.duration(); t += 0.05) {
    const ReferencePoint r = gen.at(t);
    worst = std::max(worst, (derivative(r.state, r.input, r.mode, p).pack() - r.state_dot.pack()).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-6);
}
