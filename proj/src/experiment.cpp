#include "bimodal/experiment.hpp"

#include <cmath>
#include <limits>

namespace bimodal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mode mode_of(const SegmentConfig& s) { return s.mode == "ground" ? Mode::ground(s.direction) : Mode::aerial(); }

bool closed_form(const SegmentConfig& s) { return s.type != "blend" && s.type != "stop"; }

double required(const std::optional<double>& v, const std::string& what) {
  if (!v) throw ConfigError("trajectory: " + what + " is required");
  return *v;
}

// Closed-form piece with its start at the origin, slowed to the limits.
Segment make_piece(const SegmentConfig& s, const TrajectoryConfig& cfg, std::size_t index) {
  const std::string at = "segment " + std::to_string(index);
  const Mode mode = mode_of(s);
  Segment seg = Segment::rest(Vec3::Zero(), 1.0, mode);
  if (s.type == "lemniscate") {
    if (s.fit_speed || s.fit_accel) {
      seg = fit_lemniscate(required(s.fit_speed, at + " fit_speed"), required(s.fit_accel, at + " fit_accel"),
                           s.aspect, Vec3::Zero(), s.laps, mode);
    } else {
      const double omega = required(s.omega, at + " omega");
      seg = Segment::lemniscate(required(s.A, at + " A"), required(s.B, at + " B"), omega, Vec3::Zero(),
                                s.laps * 2.0 * kPi / omega, mode);
    }
  } else if (s.type == "circle") {
    const double omega = required(s.omega, at + " omega");
    seg = Segment::circle(s.radius, omega, Vec3::Zero(), s.laps * 2.0 * kPi / omega, mode);
  } else if (s.type == "line") {
    seg = Segment::line(Vec3::Zero(), s.velocity, required(s.duration, at + " duration"), mode);
  } else if (s.type == "rest") {
    seg = Segment::rest(Vec3::Zero(), required(s.duration, at + " duration"), mode);
  } else {
    throw ConfigError("trajectory: " + at + " of type " + s.type + " is not a closed-form piece");
  }
  if (cfg.v_max || cfg.a_max) seg = scale_to_limits(seg, cfg.v_max.value_or(kInf), cfg.a_max.value_or(kInf)).segment;
  if (!mode.is_ground() && s.yaw) seg.set_yaw_policy({false, *s.yaw});
  return seg;
}

Segment placed(const Segment& seg, const Vec3& start) { return seg.shifted(start - seg.derivative(0.0, 0)); }

}  // namespace

HybridTrajectory build_trajectory(const TrajectoryConfig& cfg, const VehicleParams& params) {
  const auto& in = cfg.segments;
  if (in.empty()) throw ConfigError("trajectory: no segments");
  if (!closed_form(in.front())) throw ConfigError("trajectory: the first segment must be a closed-form piece");
  const double a_limit = cfg.a_max.value_or(kInf);

  std::vector<Segment> out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const SegmentConfig& s = in[i];
    if (i == 0) {
      const Segment piece = make_piece(s, cfg, i);
      const double z = piece.mode().is_ground() ? params.contact_height : s.altitude;
      out.push_back(placed(piece, Vec3(s.start.x(), s.start.y(), z)));
      continue;
    }
    const Segment& prev = out.back();
    const auto end = prev.end_state();
    if (s.type == "blend") {
      if (i + 1 >= in.size() || !closed_form(in[i + 1]))
        throw ConfigError("trajectory: a blend must be followed by a closed-form piece");
      const double T = s.duration.value_or(2.0);
      const Segment next = make_piece(in[i + 1], cfg, i + 1);
      // The next piece starts where coasting at the mean velocity would end, at the new height.
      Vec3 target = end[0] + 0.5 * (end[1] + next.derivative(0.0, 1)) * T;
      target.z() = next.mode().is_ground() ? params.contact_height : end[0].z() + s.rise;
      const Segment next_placed = placed(next, target);
      const BlendResult blend = takeoff_landing_blend(prev, next_placed, T, a_limit);
      out.push_back(blend.segment);
      out.push_back(next_placed);
      ++i;
    } else if (s.type == "stop") {
      // Quintic to rest, covering half the coasting distance.
      double T = s.duration.value_or(2.0);
      auto make = [&](double d) {
        Segment b = Segment::blend(end, {end[0] + 0.5 * end[1] * d, Vec3::Zero(), Vec3::Zero()}, d, prev.mode());
        b.set_yaw_policy(prev.yaw_policy());
        return b;
      };
      Segment stop = make(T);
      for (int k = 0; k < 100 && stop.peaks().accel > a_limit; ++k) stop = make(T *= 1.1);
      out.push_back(stop);
    } else {
      out.push_back(placed(make_piece(s, cfg, i), end[0]));
    }
  }

  HybridTrajectory traj(out, cfg.thrust_ratio * params.weight(), params);
  bool switches = false;
  for (std::size_t i = 1; i < out.size(); ++i) switches = switches || out[i].mode().is_ground() != out[i - 1].mode().is_ground();
  if (switches) traj.add_switch_ramps(cfg.switch_thrust_ratio * params.weight(), cfg.switch_ramp);
  return traj;
}

FlatnessOptions flatness_options(const ScenarioConfig& c) {
  FlatnessOptions o;
  o.clamp_inputs = c.trajectory.clamp_inputs;
  o.opposed_tilt = c.controller.opposed_tilt;
  // The ablation reference may ask for more than its wheels can give; the run shows what happens.
  o.tolerate_wheel_lift = c.controller.opposed_tilt;
  return o;
}

LoopOptions loop_options(const ScenarioConfig& c) {
  LoopOptions o;
  o.control_rate = c.environment.control_rate;
  o.sim_rate = c.environment.sim_rate;
  o.slip_model = c.environment.slip_model;
  o.lateral_slip_threshold = c.environment.lateral_slip_threshold;
  o.position_noise = c.environment.position_noise;
  o.attitude_noise = c.environment.attitude_noise;
  o.seed = c.seed;
  o.record_timing = c.output.record_timing;
  o.duration = c.duration;
  return o;
}

TrackResult run_track(const ScenarioConfig& c) {
  c.validate();
  const VehicleParams model = c.model_params();
  ReferenceGenerator gen(build_trajectory(c.trajectory, model), model, flatness_options(c));
  TrackResult r;
  r.reference_peaks = gen.trajectory().peaks();
  r.log = control_loop(gen, c.sim_params(), c.controller, loop_options(c));
  r.summary = summarize(r.log, model, c.output.planar_rmse);
  return r;
}

EnergyResult run_energy_compare(const ScenarioConfig& c) {
  c.validate();
  auto variant = [&](bool ground) {
    ScenarioConfig s = c;
    s.kind = "track";
    SegmentConfig lem;
    lem.type = "lemniscate";
    lem.mode = ground ? "ground" : "aerial";
    lem.fit_speed = c.energy.v_max;
    lem.fit_accel = c.energy.a_max;
    lem.aspect = c.energy.aspect;
    lem.laps = c.energy.laps;
    lem.altitude = c.energy.altitude;
    SegmentConfig stop;
    stop.type = "stop";
    stop.mode = lem.mode;
    s.trajectory.segments = {lem, stop};
    s.trajectory.v_max.reset();
    s.trajectory.a_max = c.energy.a_max;
    s.trajectory.thrust_ratio = c.energy.ground_thrust_ratio;
    return run_track(s);
  };
  EnergyResult r;
  r.ground = variant(true);
  r.aerial = variant(false);
  r.metrics.rmse = std::max(r.ground.summary.rmse, r.aerial.summary.rmse);
  r.metrics.ground_power = r.ground.summary.mean_power;
  r.metrics.aerial_power = r.aerial.summary.mean_power;
  r.metrics.standby_power = c.energy.standby_power;
  r.metrics.xi = energy_saving(r.metrics.aerial_power, r.metrics.ground_power, c.energy.standby_power);
  return r;
}

ScenarioConfig benchmark_scenario(const ScenarioConfig& c, double v_max, double a_max, bool ablation) {
  ScenarioConfig s = c;
  s.kind = "track";
  SegmentConfig lem;
  lem.type = "lemniscate";
  lem.mode = "ground";
  lem.fit_speed = v_max;
  lem.fit_accel = a_max;
  lem.aspect = c.benchmark.aspect;
  SegmentConfig stop;
  stop.type = "stop";
  stop.mode = "ground";
  s.trajectory.segments = {lem, stop};
  s.trajectory.v_max.reset();
  s.trajectory.a_max = a_max;
  s.controller.opposed_tilt = ablation;
  s.name = c.name + (ablation ? "_ablation_" : "_full_") + std::to_string(v_max);
  return s;
}

BenchmarkResult run_benchmark(const ScenarioConfig& c) {
  c.validate();
  BenchmarkResult r;
  for (const auto& level : c.benchmark.levels) {
    for (const bool ablation : {false, true}) {
      BenchmarkEntry e;
      e.variant = ablation ? "ablation" : "full";
      e.v_max = level[0];
      e.a_max = level[1];
      e.result = run_track(benchmark_scenario(c, level[0], level[1], ablation));
      e.failed = !e.result.summary.completed || e.result.summary.max_lateral_error > c.benchmark.lateral_failure;
      auto& first = ablation ? r.ablation_failure_speed : r.full_failure_speed;
      if (e.failed && !first) first = level[0];
      r.entries.push_back(std::move(e));
    }
  }
  return r;
}

int exit_code(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::Completed: return kExitOk;
    case RunOutcome::SolverFailure: return kExitSolver;
    case RunOutcome::InfeasibleReference: return kExitInfeasible;
    case RunOutcome::Diverged: return kExitDivergence;
  }
  return kExitOther;
}

}  // namespace bimodal
