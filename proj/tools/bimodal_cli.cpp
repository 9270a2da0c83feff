// Batch runner for the bundled and user scenarios.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bimodal/experiment.hpp"

namespace fs = std::filesystem;
using namespace bimodal;

namespace {

struct Common {
  std::string config;
  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "scenario file (JSON)");
  cmd->add_option("--scenario", c.scenario, "bundled scenario name");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", c.seed, "noise seed, overrides the file");
  cmd->add_flag("--quiet", c.quiet, "no progress output");
}

ScenarioConfig load(const Common& c) {
  if (c.config.empty() == c.scenario.empty()) throw ConfigError("give exactly one of --config and --scenario");
  ScenarioConfig s = c.config.empty() ? bundled_scenario(c.scenario) : load_scenario(c.config);
  if (c.seed) s.seed = *c.seed;
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream s;
  fn(s);
  write_file(path, s.str());
}

void say(const Common& c, const std::string& line) {
  if (!c.quiet) std::cout << line << '\n';
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

int report_track(const Common& c, const ScenarioConfig& s, const TrackResult& r) {
  const fs::path dir(c.out);
  write_with(dir / (s.name + "_runlog.csv"), [&](std::ostream& o) { write_runlog_csv(o, r.log, s.output.decimation); });
  write_file(dir / (s.name + "_summary.json"), summary_json(s.name, r));
  say(c, s.name + ": " + to_string(r.log.outcome) + ", rmse " + fixed(r.summary.rmse) + " m, max error " +
             fixed(r.summary.max_error) + " m, mean power " + fixed(r.summary.mean_power, 1) + " W");
  if (!r.log.completed()) std::cerr << s.name << ": " << r.log.message << '\n';
  return exit_code(r.log.outcome);
}

int run_energy(const Common& c, const ScenarioConfig& s) {
  const EnergyResult r = run_energy_compare(s);
  const fs::path dir(c.out);
  write_with(dir / (s.name + "_ground_runlog.csv"),
             [&](std::ostream& o) { write_runlog_csv(o, r.ground.log, s.output.decimation); });
  write_with(dir / (s.name + "_aerial_runlog.csv"),
             [&](std::ostream& o) { write_runlog_csv(o, r.aerial.log, s.output.decimation); });
  write_file(dir / (s.name + "_summary.json"), energy_json(s.name, r));
  say(c, s.name + ": aerial " + fixed(r.metrics.aerial_power, 1) + " W, ground " + fixed(r.metrics.ground_power, 1) +
             " W, xi " + fixed(r.metrics.xi));
  for (const TrackResult* t : {&r.ground, &r.aerial})
    if (!t->log.completed()) {
      std::cerr << s.name << ": " << t->log.message << '\n';
      return exit_code(t->log.outcome);
    }
  return kExitOk;
}

int run_bench(const Common& c, const ScenarioConfig& s) {
  const BenchmarkResult r = run_benchmark(s);
  const fs::path dir(c.out);
  for (const BenchmarkEntry& e : r.entries) {
    const std::string tag = s.name + "_" + e.variant + "_" + fixed(e.v_max, 2);
    write_with(dir / (tag + "_runlog.csv"),
               [&](std::ostream& o) { write_runlog_csv(o, e.result.log, s.output.decimation); });
    say(c, tag + ": " + (e.failed ? "FAILED" : "finished") + ", rmse " + fixed(e.result.summary.rmse) +
               " m, max lateral " + fixed(e.result.summary.max_lateral_error) + " m, slip ticks " +
               std::to_string(e.result.summary.slip_ticks));
  }
  write_file(dir / (s.name + "_summary.json"), benchmark_json(s.name, r));
  // Variant failures are the measurement, not a process error.
  return kExitOk;
}

int run_width(const Common& c, const ScenarioConfig& s) {
  const std::string table = width_report_csv(s.model_params());
  write_file(fs::path(c.out) / (s.name + ".csv"), table);
  say(c, table);
  return kExitOk;
}

int cmd_track(const Common& c) {
  const ScenarioConfig s = load(c);
  if (s.kind == "energy_compare") return run_energy(c, s);
  if (s.kind == "benchmark_slippery") return run_bench(c, s);
  if (s.kind == "width_report") return run_width(c, s);
  return report_track(c, s, run_track(s));
}

int cmd_benchmark(const Common& c) {
  const ScenarioConfig s = load(c);
  if (s.kind != "benchmark_slippery") throw ConfigError("scenario '" + s.name + "' is not a benchmark_slippery scenario");
  return run_bench(c, s);
}

// References plus an open-loop run on the feed-forward inputs.
int cmd_simulate(const Common& c, double reference_dt, double drift_limit) {
  const ScenarioConfig s = load(c);
  if (s.kind != "track") throw ConfigError("simulate needs a track scenario");
  s.validate();
  const VehicleParams model = s.model_params();
  ReferenceGenerator gen(build_trajectory(s.trajectory, model), model, flatness_options(s));
  const double duration = s.duration.value_or(gen.trajectory().duration());
  const fs::path dir(c.out);
  write_with(dir / (s.name + "_references.csv"),
             [&](std::ostream& o) { write_reference_csv(o, gen, 0.0, duration, reference_dt); });

  const LoopOptions lo = loop_options(s);
  Simulator::Options so;
  so.dt = 1.0 / lo.sim_rate;
  so.slip_model = lo.slip_model;
  so.lateral_slip_threshold = lo.lateral_slip_threshold;
  const ReferencePoint start = gen.at(0.0);
  Simulator sim(s.sim_params(), so, start.state, start.mode);
  const int sub = static_cast<int>(std::lround(lo.sim_rate / lo.control_rate));
  const double period = 1.0 / lo.control_rate;
  const int ticks = static_cast<int>(std::floor(duration / period + 1e-9));

  RunLog log;
  std::string note = "feed-forward run completed";
  for (int k = 0; k < ticks; ++k) {
    const ReferencePoint ref = gen.at(k * period);
    TickRecord rec;
    rec.t = k * period;
    rec.p_ref = ref.state.p;
    rec.q_ref = ref.state.q.wxyz();
    rec.ground_ref = ref.mode.is_ground();
    rec.p = sim.state().p;
    rec.q = sim.state().q.wxyz();
    rec.v = sim.state().v;
    rec.omega = sim.state().omega;
    rec.ground = sim.mode().is_ground();
    rec.u = ref.input;
    rec.min_normal = std::numeric_limits<double>::infinity();
    double energy = 0.0;
    try {
      for (int i = 0; i < sub; ++i) {
        const Simulator::StepReport r = sim.advance(rec.u);
        energy += r.power;
        rec.slipping = rec.slipping || r.slipping;
        rec.lift_off = rec.lift_off || r.lift_off;
        if (i == 0 && r.reaction) {
          rec.F_n_left = r.reaction->F_n_left;
          rec.F_n_right = r.reaction->F_n_right;
          rec.f_l = r.reaction->f_l;
        }
      }
    } catch (const DivergenceError& e) {
      note = std::string("open loop stopped: ") + e.what();
      break;
    }
    rec.power = energy / sub;
    log.ticks.push_back(rec);
    if ((rec.p - rec.p_ref).norm() > drift_limit) {
      note = "open loop drifted past " + fixed(drift_limit, 2) + " m at t = " + fixed(rec.t, 3) + " s";
      break;
    }
  }
  write_with(dir / (s.name + "_openloop.csv"), [&](std::ostream& o) { write_runlog_csv(o, log, s.output.decimation); });
  say(c, s.name + ": " + std::to_string(log.ticks.size()) + " ticks, " + note);
  return kExitOk;
}

int cmd_analyze(const Common& c, const std::string& runlog) {
  if (!runlog.empty()) {
    std::ifstream f(runlog);
    if (!f) throw ConfigError("cannot read " + runlog);
    const RunLog log = read_runlog_csv(f);
    const VehicleParams p = (c.config.empty() && c.scenario.empty()) ? VehicleParams{} : load(c).model_params();
    const RunSummary s = summarize(log, p, false);
    std::cout << "ticks " << s.ticks << "\nrmse " << fixed(s.rmse, 6) << "\nmax_error " << fixed(s.max_error, 6)
              << "\nmax_lateral_error " << fixed(s.max_lateral_error, 6) << "\nmean_power " << fixed(s.mean_power, 3)
              << "\npeak_speed " << fixed(s.peak_speed, 3) << "\nslip_ticks " << s.slip_ticks << '\n';
    return kExitOk;
  }
  const VehicleParams p = (c.config.empty() && c.scenario.empty()) ? VehicleParams{} : load(c).model_params();
  const std::string table = width_report_csv(p);
  std::ostringstream sweep;
  sweep << "cq_over_ct,steering_ratio\n";
  for (int i = 0; i <= 10; ++i) {
    VehicleParams q = p;
    const double r = 0.01 + 0.001 * i;
    q.torque_coeff = r * q.thrust_coeff;
    sweep << fixed(r, 3) << ',' << fixed(steering_ratio(q), 4) << '\n';
  }
  write_file(fs::path(c.out) / "width_report.csv", table);
  write_file(fs::path(c.out) / "steering_sweep.csv", sweep.str());
  if (!c.quiet) std::cout << table << '\n' << sweep.str();
  return kExitOk;
}

int cmd_export(const Common& c, const std::string& runlog) {
  if (runlog.empty()) throw ConfigError("export needs --runlog");
  std::ifstream f(runlog);
  if (!f) throw ConfigError("cannot read " + runlog);
  const RunLog log = read_runlog_csv(f);
  const fs::path target = fs::path(c.out) / (fs::path(runlog).stem().string() + "_long.csv");
  write_with(target, [&](std::ostream& o) { write_long_csv(o, log); });
  say(c, "wrote " + target.string());
  return kExitOk;
}

int cmd_validate(const Common& c, bool all) {
  if (all) {
    for (const std::string& name : bundled_scenarios()) {
      bundled_scenario(name).validate();
      say(c, name + ": ok");
    }
    return kExitOk;
  }
  load(c).validate();
  say(c, "ok");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-modal bi-copter simulation, tracking control and design analysis"};
  app.require_subcommand(1);

  Common common;
  double reference_dt = 0.01, drift_limit = 1.0;
  std::string runlog;
  bool all = false;

  auto* simulate = app.add_subcommand("simulate", "export references and run the plant open loop on them");
  add_common(simulate, common);
  simulate->add_option("--reference-dt", reference_dt, "reference export step [s]")->capture_default_str();
  simulate->add_option("--drift-limit", drift_limit, "stop the open-loop run past this error [m]")->capture_default_str();
  auto* track = app.add_subcommand("track", "closed-loop run of a scenario");
  add_common(track, common);
  auto* analyze = app.add_subcommand("analyze", "layout widths, steering sweep, or metrics of a run log");
  add_common(analyze, common);
  analyze->add_option("--runlog", runlog, "run log CSV to summarize");
  auto* benchmark = app.add_subcommand("benchmark", "slippery-surface comparison of the two controller variants");
  add_common(benchmark, common);
  auto* exporter = app.add_subcommand("export", "convert a run log to long format");
  add_common(exporter, common);
  exporter->add_option("--runlog", runlog, "run log CSV")->required();
  auto* validate = app.add_subcommand("validate", "check scenario files");
  add_common(validate, common);
  validate->add_flag("--all", all, "every bundled scenario");
  auto* list = app.add_subcommand("list", "names of the bundled scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(common, reference_dt, drift_limit);
    if (*track) return cmd_track(common);
    if (*analyze) return cmd_analyze(common, runlog);
    if (*benchmark) return cmd_benchmark(common);
    if (*exporter) return cmd_export(common, runlog);
    if (*validate) return cmd_validate(common, all);
    if (*list) {
      for (const std::string& name : bundled_scenarios()) std::cout << name << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BoundViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleReference& e) {
    std::cerr << "infeasible reference: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOther;
}
