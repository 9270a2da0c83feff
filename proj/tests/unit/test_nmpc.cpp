#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "bimodal/nmpc.hpp"

using namespace bimodal;

namespace {

RobotState hover_state(double z = 1.0) {
  RobotState s;
  s.p.z() = z;
  return s;
}

std::vector<ReferencePoint> hover_refs(int K, double z = 1.0) {
  const VehicleParams p;
  const HybridTrajectory h({Segment::rest(Vec3(0, 0, z), 10.0, Mode::aerial())}, 4.0, p);
  return sample_references(h, 0.0, K, 0.05, p);
}

}  // namespace

TEST(Discretize, HoverFixedPoint) {
  const VehicleParams p;
  const double t = p.weight() / 2;
  const StateVector x = hover_state().pack();
  EXPECT_LT((discretize(x, {t, t, 0, 0}, Mode::aerial(), 0.05, p) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Discretize, HalfStepsCompose) {
  const VehicleParams p;
  RobotState s = hover_state();
  s.v = {1.0, -0.5, 0.2};
  s.omega = {0.2, 0.1, -0.3};
  const ControlInput u{4.2, 3.9, 0.1, -0.08};
  const double dt = 0.02;
  const StateVector full = discretize(s.pack(), u, Mode::aerial(), dt, p);
  const StateVector half = discretize(discretize(s.pack(), u, Mode::aerial(), dt / 2, p), u, Mode::aerial(), dt / 2, p);
  EXPECT_LT((full - half).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Linearize, MatchesCentralDifferences) {
  const VehicleParams p;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> a(-0.3, 0.3), t(2.0, 6.0);
  for (int i = 0; i < 20; ++i) {
    RobotState s = hover_state(1.0);
    s.v = {a(rng), a(rng), a(rng)};
    s.q = Orientation::from_euler(a(rng), a(rng), 3 * a(rng));
    s.omega = {a(rng), a(rng), a(rng)};
    const ControlInput u{t(rng), t(rng), a(rng), a(rng)};
    const Linearization f = linearize(s.pack(), u, Mode::aerial(), 0.05, p, 1e-6, false);
    const Linearization c = linearize(s.pack(), u, Mode::aerial(), 0.05, p, 1e-5, true);
    EXPECT_LT((f.A - c.A).norm() / c.A.norm(), 1e-4);
    EXPECT_LT((f.B - c.B).norm() / c.B.norm(), 1e-4);
  }
}

TEST(WarmStart, ConstantSolutionShiftsToItself) {
  OcpSolution s;
  s.inputs.assign(5, ControlInput{1, 2, 0.1, 0.2});
  s.states.assign(6, hover_state().pack());
  const WarmStart w = shift_warm_start(s);
  ASSERT_EQ(w.inputs.size(), 5u);
  for (const auto& u : w.inputs) EXPECT_EQ(u.pack(), s.inputs[0].pack());
}

TEST(WarmStart, ShiftTwiceIsShiftByTwo) {
  OcpSolution s;
  for (int k = 0; k < 6; ++k) s.inputs.push_back({double(k), 0, 0, 0});
  for (int k = 0; k < 7; ++k) {
    StateVector x = StateVector::Zero();
    x[0] = k;
    s.states.push_back(x);
  }
  const WarmStart once = shift_warm_start(s);
  OcpSolution again = s;
  again.inputs = once.inputs;
  again.states = once.states;
  const WarmStart twice = shift_warm_start(again);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(twice.inputs[k].thrust1, std::min(k + 2, 5));
  for (int k = 0; k < 7; ++k) EXPECT_EQ(twice.states[k][0], std::min(k + 2, 6));
}

TEST(Solve, ZeroErrorFixedPoint) {
  const VehicleParams p;
  const NmpcConfig cfg;
  const auto refs = hover_refs(cfg.horizon);
  const OcpSolution s = solve(refs[0].state, refs, cfg, p);
  EXPECT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_LT((s.inputs[0].pack() - refs[0].input.pack()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Solve, ZeroErrorOnGroundLine) {
  const VehicleParams p;
  const NmpcConfig cfg;
  const HybridTrajectory h({Segment::line(Vec3(0, 0, p.contact_height), Vec3(1, 0, 0), 5.0, Mode::ground())},
                           0.6 * p.weight(), p);
  const auto refs = sample_references(h, 1.0, cfg.horizon, cfg.dt, p);
  const OcpSolution s = solve(refs[0].state, refs, cfg, p);
  EXPECT_LT((s.inputs[0].pack() - refs[0].input.pack()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Solve, OffsetIsReducedOverTheHorizon) {
  const VehicleParams p;
  const NmpcConfig cfg;
  const auto refs = hover_refs(cfg.horizon);
  for (int axis = 0; axis < 3; ++axis) {
    RobotState x = refs[0].state;
    x.p[axis] += 0.2;
    const OcpSolution s = solve(x, refs, cfg, p);
    std::vector<double> e;
    for (int k = 0; k <= cfg.horizon; ++k) e.push_back((s.states[k].head<3>() - refs[k].state.p).norm());
    // The y channel is non-minimum-phase (roll torque is h1 T_y), so it may grow briefly first.
    const std::size_t peak = std::max_element(e.begin(), e.end()) - e.begin();
    if (axis != 1) EXPECT_EQ(peak, 0u);
    EXPECT_LT(e[peak], 0.2 * 1.05);
    for (std::size_t k = peak + 1; k < e.size(); ++k) EXPECT_LT(e[k], e[k - 1]) << "axis " << axis << " step " << k;
    EXPECT_LT(e.back(), 0.25 * 0.2);

    // no-op baseline: hold the reference inputs
    std::vector<StateVector> xs{x.pack()};
    std::vector<ControlInput> us;
    for (int k = 0; k < cfg.horizon; ++k) {
      us.push_back(refs[k].input);
      xs.push_back(discretize(xs.back(), refs[k].input, Mode::aerial(), cfg.dt, p));
    }
    EXPECT_LT(s.cost, tracking_cost(xs, us, refs, cfg));
  }
}

TEST(Solve, InputsInsideBox) {
  const VehicleParams p;
  NmpcConfig cfg;
  const auto refs = hover_refs(cfg.horizon);
  RobotState x = refs[0].state;
  x.p.z() -= 2.0;  // far below: wants more than T_max
  const OcpSolution s = solve(x, refs, cfg, p);
  for (const ControlInput& u : s.inputs) {
    EXPECT_LE(u.thrust1, p.max_thrust + 1e-9);
    EXPECT_LE(u.thrust2, p.max_thrust + 1e-9);
    EXPECT_GE(u.thrust1, -1e-9);
  }
  EXPECT_NEAR(s.inputs[0].thrust1, p.max_thrust, 1e-6);
}

TEST(Solve, OpposedTiltAblation) {
  const VehicleParams p;
  NmpcConfig cfg;
  cfg.opposed_tilt = true;
  const auto refs = hover_refs(cfg.horizon);
  RobotState x = refs[0].state;
  x.p.y() += 0.3;
  const OcpSolution s = solve(x, refs, cfg, p);
  for (const ControlInput& u : s.inputs) EXPECT_NEAR(u.tilt1 + u.tilt2, 0.0, 1e-9);
}

TEST(Config, Validation) {
  const VehicleParams p;
  NmpcConfig cfg;
  EXPECT_NO_THROW(cfg.validate(p));
  cfg.horizon = 0;
  EXPECT_THROW(cfg.validate(p), ConfigError);
  cfg = NmpcConfig{};
  cfg.q_position.x() = -1.0;
  EXPECT_THROW(cfg.validate(p), ConfigError);
}

TEST(Loop, HoverSteadyState) {
  const VehicleParams p;
  ReferenceGenerator gen(HybridTrajectory({Segment::rest(Vec3(0, 0, 1), 3.0, Mode::aerial())}, 4.0, p), p);
  LoopOptions o;
  const RunLog log = control_loop(gen, p, NmpcConfig{}, o);
  ASSERT_TRUE(log.completed());
  EXPECT_LT((log.ticks.back().p - log.ticks.back().p_ref).norm(), 1e-4);
}

TEST(Loop, RecoversFromOffsetWithNoise) {
  const VehicleParams p;
  ReferenceGenerator gen(HybridTrajectory({Segment::rest(Vec3(0, 0, 1), 3.0, Mode::aerial())}, 4.0, p), p);
  LoopOptions o;
  o.position_noise = 0.002;
  o.attitude_noise = 0.002;
  o.seed = 3;
  const RunLog a = control_loop(gen, p, NmpcConfig{}, o);
  const RunLog b = control_loop(gen, p, NmpcConfig{}, o);
  ASSERT_TRUE(a.completed());
  ASSERT_EQ(a.ticks.size(), b.ticks.size());
  for (std::size_t i = 0; i < a.ticks.size(); ++i) ASSERT_EQ(a.ticks[i].p, b.ticks[i].p);
  EXPECT_LT((a.ticks.back().p - a.ticks.back().p_ref).norm(), 0.02);
}

TEST(Loop, WarmStartNotWorseThanCold) {
  const VehicleParams p;
  const NmpcConfig cfg;
  const Segment s = fit_lemniscate(1.5, 1.5, 0.5, Vec3(0, 0, p.contact_height), 1, Mode::ground());
  ReferenceGenerator gen(HybridTrajectory({s}, 0.6 * p.weight(), p), p);
  LoopOptions o;
  const RunLog log = control_loop(gen, p, cfg, o);
  ASSERT_TRUE(log.completed());
  // replay every 20th tick: solve cold and warm from the logged state
  double warm_total = 0.0, cold_total = 0.0;
  std::optional<OcpSolution> prev;
  for (std::size_t i = 0; i + 1 < log.ticks.size(); i += 1) {
    const TickRecord& r = log.ticks[i];
    RobotState x;
    x.p = r.p;
    x.v = r.v;
    x.q = Orientation::from_wxyz(r.q);
    x.omega = r.omega;
    const auto refs = gen.sample(r.t, cfg.horizon, cfg.dt);
    WarmStart w;
    if (prev) w = shift_warm_start(*prev);
    const OcpSolution warm = solve(x, refs, cfg, p, prev ? &w : nullptr);
    if (i % 20 == 0 && prev) {
      warm_total += warm.cost;
      cold_total += solve(x, refs, cfg, p).cost;
    }
    prev = warm;
  }
  EXPECT_LE(warm_total, cold_total * (1.0 + 1e-6));
}
