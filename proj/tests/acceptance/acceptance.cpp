// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bimodal/experiment.hpp"

using namespace bimodal;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = elapsed < budget_s;
  const bool pass = o.pass && in_time;
  failures += !pass;
  std::printf("%s %s: %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), elapsed,
              budget_s, in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double oracle_error(const ReferencePoint& r, const VehicleParams& p) {
  return (derivative(r.state, r.input, r.mode, p).pack() - r.state_dot.pack()).cwiseAbs().maxCoeff();
}

// First-run CSVs kept for the determinism check.
std::map<std::string, std::string> first_runs;

std::string csv_of(const RunLog& log) {
  std::ostringstream s;
  write_runlog_csv(s, log);
  return s.str();
}

std::string scenario_output(const std::string& name) {
  const ScenarioConfig c = bundled_scenario(name);
  if (c.kind == "energy_compare") {
    const EnergyResult r = run_energy_compare(c);
    return csv_of(r.ground.log) + csv_of(r.aerial.log) + energy_json(c.name, r);
  }
  if (c.kind == "benchmark_slippery") {
    const BenchmarkResult r = run_benchmark(c);
    std::string out;
    for (const BenchmarkEntry& e : r.entries) out += csv_of(e.result.log);
    return out + benchmark_json(c.name, r);
  }
  if (c.kind == "width_report") return width_report_csv(c.model_params());
  const TrackResult r = run_track(c);
  return csv_of(r.log) + summary_json(c.name, r);
}

Outcome flatness_oracle() {
  const VehicleParams p;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_ground = 0.0, worst_aerial = 0.0;
  int ground = 0, aerial = 0, samples = 0, rejected = 0;
  while (ground < 10) {
    const double v = 0.5 + 2.0 * u(rng), a = 0.5 + 2.0 * u(rng), aspect = 0.3 + 0.4 * u(rng);
    const double ratio = 0.3 + 0.4 * u(rng);
    const int direction = u(rng) < 0.3 ? -1 : 1;
    const Segment s = u(rng) < 0.5 ? fit_lemniscate(v, a, aspect, Vec3(0, 0, p.contact_height), 1, Mode::ground(direction))
                                   : Segment::circle(v * v / a, a / v, Vec3(0, 0, p.contact_height), 2 * kPi * v / a,
                                                     Mode::ground(direction));
    try {
      ReferenceGenerator gen(HybridTrajectory({s}, ratio * p.weight(), p), p);
      double worst = 0.0;
      for (int i = 0; i <= 200; ++i) worst = std::max(worst, oracle_error(gen.at(s.duration() * i / 200.0), p));
      worst_ground = std::max(worst_ground, worst);
      samples += 201;
      ++ground;
    } catch (const Error&) {
      ++rejected;  // infeasible draw (wheel lift or input bound); only feasible trajectories count
    }
  }
  while (aerial < 10) {
    const double v = 0.5 + 2.5 * u(rng), a = 0.5 + 2.5 * u(rng), aspect = 0.3 + 0.4 * u(rng);
    Segment s = fit_lemniscate(v, a, aspect, Vec3(0, 0, 0.5 + u(rng)), 1, Mode::aerial());
    if (u(rng) < 0.4) s.set_yaw_policy({false, 2 * kPi * (u(rng) - 0.5)});
    try {
      ReferenceGenerator gen(HybridTrajectory({s}, 0.6 * p.weight(), p), p);
      double worst = 0.0;
      for (int i = 0; i <= 200; ++i) worst = std::max(worst, oracle_error(gen.at(s.duration() * i / 200.0), p));
      worst_aerial = std::max(worst_aerial, worst);
      samples += 201;
      ++aerial;
    } catch (const Error&) {
      ++rejected;
    }
  }
  const double worst = std::max(worst_ground, worst_aerial);
  return {worst < 1e-6, "max |f(x_r,u_r) - dx_r/dt| ground " + fmt("%.2e", worst_ground) + ", aerial " +
                            fmt("%.2e", worst_aerial) + " over " + std::to_string(samples) + " samples (" +
                            std::to_string(rejected) + " infeasible draws skipped), bound 1e-6"};
}

Outcome structural_identities() {
  const VehicleParams p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> T(0.0, p.max_thrust), d(-p.max_tilt, p.max_tilt), a(-3.0, 3.0);
  bool torque_exact = true;
  double sum_err = 0.0, quat_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const BodyWrench w = actuator_wrench({T(rng), T(rng), d(rng), d(rng)}, p);
    torque_exact = torque_exact && w.torque.x() == w.thrust.y() * p.servo_offset;
    RobotState s;
    s.p.z() = p.contact_height;
    s.q = Orientation::from_euler(0.0, 0.2 * a(rng) / 3.0, a(rng));
    s.v = Vec3(a(rng), 0.0, 0.0);
    const GroundReaction g = ground_reaction(s, w, a(rng), p);
    const double scale = std::max({std::abs(g.F_n_left), std::abs(g.F_n_right), std::abs(g.F_n)});
    if (scale > 0.0) sum_err = std::max(sum_err, std::abs(g.F_n_left + g.F_n_right - g.F_n) / scale);
    const Vec4 q = Orientation::from_euler(a(rng), 0.45 * a(rng), a(rng)).wxyz();
    const Vec4 back = Orientation::from_rotation(Orientation::from_wxyz(q).rotation()).wxyz();
    const Vec4 e = Orientation::from_euler(orientation_to_euler(Orientation::from_wxyz(q)).roll,
                                           orientation_to_euler(Orientation::from_wxyz(q)).pitch,
                                           orientation_to_euler(Orientation::from_wxyz(q)).yaw)
                       .wxyz();
    quat_err = std::max({quat_err, std::min((back - q).norm(), (back + q).norm()), std::min((e - q).norm(), (e + q).norm())});
  }
  // sum of the normals is exact up to one rounding of each half
  const bool pass = torque_exact && sum_err <= 4 * std::numeric_limits<double>::epsilon() && quat_err < 1e-9;
  return {pass, std::string("tau_x == h1 T_y bitwise: ") + (torque_exact ? "yes" : "no") + ", normal sum rel. err " +
                    fmt("%.1e", sum_err) + " (<= 4 ulp), quaternion round trip " + fmt("%.1e", quat_err) +
                    " (< 1e-9), 10000 draws"};
}

Outcome jacobian_check() {
  const VehicleParams p;
  const NmpcConfig cfg;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> s(-1.0, 1.0), T(1.0, 7.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const bool ground = i % 2 == 1;
    RobotState x;
    x.p = Vec3(s(rng), s(rng), ground ? p.contact_height : 1.0 + s(rng));
    x.v = ground ? Vec3(1.5 * s(rng), 1.5 * s(rng), 0.0) : Vec3(2 * s(rng), 2 * s(rng), s(rng));
    x.q = Orientation::from_euler(ground ? 0.0 : 0.3 * s(rng), 0.3 * s(rng), 3.0 * s(rng));
    x.omega = Vec3(ground ? 0.0 : s(rng), s(rng), s(rng));
    const ControlInput u{T(rng), T(rng), 0.6 * s(rng), 0.6 * s(rng)};
    const Mode m = ground ? Mode::ground() : Mode::aerial();
    const Linearization used = linearize(x.pack(), u, m, cfg.dt, p, cfg.jacobian_step, false);
    const Linearization ref = linearize(x.pack(), u, m, cfg.dt, p, 1e-5, true);
    worst = std::max({worst, (used.A - ref.A).norm() / ref.A.norm(), (used.B - ref.B).norm() / ref.B.norm()});
  }
  return {worst < 1e-4, "max relative Frobenius error of A, B vs central differences " + fmt("%.2e", worst) +
                            " over 100 points (50 aerial, 50 ground), bound 1e-4"};
}

Outcome steering_sweep() {
  VehicleParams p;
  std::string table;
  bool pass = true;
  for (int i = 0; i <= 10; ++i) {
    const double r = 0.01 + 0.001 * i;
    p.torque_coeff = r * p.thrust_coeff;
    const double s = steering_ratio(p);
    pass = pass && s >= 3.5 - 1e-12 && s <= 7.0 + 1e-12;
    if (r <= 0.014 + 1e-12) pass = pass && s >= 5.0;
    table += (i ? ", " : "") + fmt("%.3f", r) + "->" + fmt("%.2f", s);
  }
  return {pass, "c_q/c_t -> ratio: " + table + "; in [3.5, 7] and >= 5 up to 1.4%"};
}

Outcome width_ordering() {
  const VehicleParams p;
  const double eta = hover_efficiency(p.mass, 2, p.disk_area, p.air_density, p.gravity);
  std::string table;
  double lon = 0.0, others = std::numeric_limits<double>::infinity();
  for (const LayoutSpec& l : all_layouts()) {
    const double r = traversing_width(l, p.mass, eta, p.air_density, 0.0, p.gravity).ratio;
    table += (table.empty() ? "" : ", ") + to_string(l.kind) + " " + fmt("%.4f", r);
    if (l.kind == LayoutKind::BicopterLongitudinal) lon = r;
    else others = std::min(others, r);
  }
  const bool pass = std::abs(lon - 1.0 / std::sqrt(2.0)) <= 1e-12 && lon < others;
  return {pass, table + "; longitudinal = 1/sqrt(2) +- 1e-12 and strictly smallest"};
}

Outcome closed_loop() {
  std::string detail;
  bool pass = true;
  {
    const TrackResult r = run_track(bundled_scenario("aerial_8shape"));
    first_runs["aerial_8shape"] = csv_of(r.log) + summary_json("aerial_8shape", r);
    pass = pass && r.log.completed() && r.summary.rmse < 0.05;
    detail += "aerial 2.9/3.0 rmse " + fmt("%.4f", r.summary.rmse) + " m (< 0.05)";
  }
  {
    const TrackResult r = run_track(bundled_scenario("ground_8shape_slippery"));
    first_runs["ground_8shape_slippery"] = csv_of(r.log) + summary_json("ground_8shape_slippery", r);
    pass = pass && r.log.completed() && r.summary.rmse < 0.12;
    detail += "; ground mu_s=0.3 2.8/3.0 rmse " + fmt("%.4f", r.summary.rmse) + " m (< 0.12), slip ticks " +
              std::to_string(r.summary.slip_ticks);
  }
  {
    const TrackResult r = run_track(bundled_scenario("hybrid_3d"));
    first_runs["hybrid_3d"] = csv_of(r.log) + summary_json("hybrid_3d", r);
    const RunSummary& s = r.summary;
    const bool clean = s.lift_off_ticks == 0 && s.degraded_ticks == 0 && s.relaxed_ticks == 0 && s.slip_ticks == 0;
    const bool ok = r.log.completed() && clean && s.mode_switches >= 2 && s.switch_input_jump <= 0.1 &&
                    r.reference_peaks.speed <= 2.4 + 1e-6 && r.reference_peaks.accel <= 2.2 + 1e-6;
    pass = pass && ok;
    detail += "; hybrid peaks " + fmt("%.2f", r.reference_peaks.speed) + "/" + fmt("%.2f", r.reference_peaks.accel) +
              " " + (r.log.completed() ? "completed" : "not completed") + ", " + std::to_string(s.mode_switches) +
              " switches, flags lift/relaxed/degraded/slip " + std::to_string(s.lift_off_ticks) + "/" +
              std::to_string(s.relaxed_ticks) + "/" + std::to_string(s.degraded_ticks) + "/" +
              std::to_string(s.slip_ticks) + ", max normalized input step near switches " +
              fmt("%.4f", s.switch_input_jump) + " (<= 0.1), rmse " + fmt("%.4f", s.rmse) + " m";
  }
  return {pass, detail};
}

Outcome slippery_benchmark() {
  const ScenarioConfig c = bundled_scenario("benchmark_slippery");
  const BenchmarkResult r = run_benchmark(c);
  std::string out;
  for (const BenchmarkEntry& e : r.entries) out += csv_of(e.result.log);
  first_runs["benchmark_slippery"] = out + benchmark_json(c.name, r);
  auto find = [&](const std::string& variant, double v) -> const BenchmarkEntry& {
    for (const BenchmarkEntry& e : r.entries)
      if (e.variant == variant && std::abs(e.v_max - v) < 1e-9) return e;
    throw std::runtime_error("benchmark level missing");
  };
  const BenchmarkEntry &f1 = find("full", 1.0), &a1 = find("ablation", 1.0);
  const BenchmarkEntry &f2 = find("full", 2.0), &a2 = find("ablation", 2.0);
  const bool pass = !f1.failed && !a1.failed && f1.result.log.completed() && a1.result.log.completed() &&
                    a2.failed && !f2.failed && f2.result.summary.rmse < 0.12;
  return {pass, "mu_s " + fmt("%.2f", *c.environment.mu_s) + ", threshold " + fmt("%.2f", c.benchmark.lateral_failure) +
                    " m; 1/0.7: full lateral " + fmt("%.4f", f1.result.summary.max_lateral_error) + " m, ablation " +
                    fmt("%.4f", a1.result.summary.max_lateral_error) + " m (both finish); 2/1.8: ablation lateral " +
                    fmt("%.4f", a2.result.summary.max_lateral_error) + " m (" + (a2.failed ? "fails" : "does not fail") +
                    "), full rmse " + fmt("%.4f", f2.result.summary.rmse) + " m (< 0.12)"};
}

Outcome energy() {
  const ScenarioConfig c = bundled_scenario("energy_compare");
  const EnergyResult r = run_energy_compare(c);
  first_runs["energy_compare"] = csv_of(r.ground.log) + csv_of(r.aerial.log) + energy_json(c.name, r);
  const bool pass = r.ground.log.completed() && r.aerial.log.completed() &&
                    r.metrics.ground_power < r.metrics.aerial_power && r.metrics.xi >= 0.6;
  return {pass, "mean rotor power aerial " + fmt("%.2f", r.metrics.aerial_power) + " W, ground " +
                    fmt("%.2f", r.metrics.ground_power) + " W, xi_sim " + fmt("%.4f", r.metrics.xi) + " (>= 0.6)"};
}

// Steady circles plus accelerating figure-eights; samples with pitch inside the small-angle
// regime and a lateral acceleration large enough for a relative comparison.
Outcome lateral_approximation() {
  const VehicleParams p;
  double worst = 0.0, min_factor = std::numeric_limits<double>::infinity();
  int n = 0;
  auto check = [&](const ReferencePoint& r) {
    const PlanarKinematics k = planar_kinematics(r.state);
    const double al = k.longitudinal_speed * k.yaw_rate;
    if (std::abs(al) < 0.2 || std::abs(k.pitch) > 0.2) return;
    const double Ty = std::abs(actuator_wrench(r.input, p).thrust.y());
    const double approx = std::abs(lateral_thrust_approx(al, p));
    worst = std::max(worst, std::abs(Ty - approx) / approx);
    min_factor = std::min(min_factor, Ty / (p.mass * std::abs(al)));
    ++n;
  };
  for (double R : {1.0, 2.0, 4.0})
    for (double al = 0.2; al <= 2.0 + 1e-9; al += 0.2) {
      const double v = std::sqrt(al * R), w = v / R;
      FlatSampleGround s;
      s.thrust_z = {0.6 * p.weight(), 0.0, 0.0};
      for (int k = 0; k < 5; ++k) {
        const double ph = k * kPi / 2, sc = std::pow(w, k);
        s.p[k] = Vec3(R * sc * std::cos(ph), R * sc * std::sin(ph), k == 0 ? p.contact_height : 0.0);
      }
      check(ground_flat_to_reference(s, p));
    }
  for (const auto& [v, a] : std::vector<std::pair<double, double>>{{1.0, 0.7}, {2.0, 1.8}, {2.8, 3.0}}) {
    const Segment seg = fit_lemniscate(v, a, 0.5, Vec3(0, 0, p.contact_height), 1, Mode::ground());
    ReferenceGenerator gen(HybridTrajectory({seg}, 0.6 * p.weight(), p), p);
    for (double t = 0.0; t <= seg.duration(); t += 0.02) check(gen.at(t));
  }
  return {worst < 0.15 && min_factor > 1.0, "max relative gap to the small-angle formula " + fmt("%.4f", worst) +
                                                 " (< 0.15), min |T_y| / (m |a_l|) " + fmt("%.4f", min_factor) +
                                                 " (> 1), " + std::to_string(n) +
                                                 " samples with |pitch| <= 0.2 rad and |a_l| >= 0.2 m/s^2"};
}

Outcome determinism() {
  std::string detail;
  bool pass = true;
  for (const std::string& name : bundled_scenarios()) {
    const std::string first = first_runs.count(name) ? first_runs[name] : scenario_output(name);
    const std::string second = scenario_output(name);
    const bool same = first == second;
    pass = pass && same;
    detail += (detail.empty() ? "" : ", ") + name + (same ? " identical" : " DIFFERS");
  }
  return {pass, detail};
}

}  // namespace

int main() {
  criterion("flatness-dynamics oracle", 10, flatness_oracle);
  criterion("structural identities", 1, structural_identities);
  criterion("jacobian check", 5, jacobian_check);
  criterion("steering ratio", 1, steering_sweep);
  criterion("traversing width ordering", 1, width_ordering);
  criterion("closed-loop tracking", 120, closed_loop);
  criterion("slippery benchmark", 60, slippery_benchmark);
  criterion("energy comparison", 30, energy);
  criterion("lateral thrust approximation", 5, lateral_approximation);
  criterion("determinism", 600, determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
