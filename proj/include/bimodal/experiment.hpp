#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bimodal/analysis.hpp"

namespace bimodal {

inline constexpr int kSchemaVersion = 1;

/// One trajectory piece as written in a scenario file. Positions of every piece after the first
/// are derived from its predecessor, so only the first piece needs a start point or altitude.
struct SegmentConfig {
  std::string type;            ///< lemniscate | circle | line | rest | blend | stop
  std::string mode = "aerial";  ///< aerial | ground (blends are always aerial)
  int direction = 1;
  // lemniscate: either (A, B, omega) or a fit to peak speed and acceleration
  std::optional<double> A, B, omega;
  std::optional<double> fit_speed, fit_accel;
  double aspect = 0.5;
  int laps = 1;
  // circle
  double radius = 1.0;
  // line
  Vec3 velocity = Vec3::Zero();
  // shared
  std::optional<double> duration;
  Vec3 start = Vec3::Zero();   ///< x, y of the first piece's start point
  double altitude = 1.0;       ///< first aerial piece
  double rise = 0.0;           ///< blend: height gained (negative to descend)
  std::optional<double> yaw;   ///< aerial: fixed heading instead of following the velocity
};

struct TrajectoryConfig {
  std::vector<SegmentConfig> segments;
  std::optional<double> v_max, a_max;  ///< uniform slow-down of every closed-form piece
  double thrust_ratio = 0.6;           ///< ground T_B,z over m g
  double switch_thrust_ratio = 0.98;   ///< T_B,z reached at take-off and left at landing
  double switch_ramp = 1.0;            ///< [s]
  bool clamp_inputs = false;
};

struct EnvironmentConfig {
  bool slip_model = false;
  std::optional<double> mu;    ///< rolling friction override
  std::optional<double> mu_s;  ///< lateral friction override
  double lateral_slip_threshold = 1e-3;
  double position_noise = 0.0;
  double attitude_noise = 0.0;
  double control_rate = 200.0;
  double sim_rate = 1000.0;
};

struct OutputConfig {
  int decimation = 1;          ///< keep every n-th control tick in the CSV
  bool record_timing = false;  ///< solve times in the CSV (breaks byte-identical reruns)
  bool planar_rmse = false;
};

struct BenchmarkConfig {
  /// (v_max, a_max) levels, slowest first.
  std::vector<std::array<double, 2>> levels{{1.0, 0.7}, {2.0, 1.8}};
  double lateral_failure = 0.15;  ///< [m] cross-track error counted as a slip failure
  double aspect = 0.5;
};

struct EnergyConfig {
  double v_max = 1.0;
  double a_max = 0.6;
  double aspect = 0.5;
  int laps = 1;
  double altitude = 1.0;
  double ground_thrust_ratio = 0.35;
  double standby_power = 0.0;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name = "scenario";
  std::string kind = "track";  ///< track | energy_compare | benchmark_slippery | width_report
  std::string description;
  std::uint64_t seed = 1;
  std::optional<double> duration;
  VehicleParams vehicle;
  TrajectoryConfig trajectory;
  NmpcConfig controller;
  EnvironmentConfig environment;
  OutputConfig output;
  BenchmarkConfig benchmark;
  EnergyConfig energy;

  /// Controller model: the vehicle block with the environment friction overrides.
  VehicleParams model_params() const;
  /// Plant: same as the model (friction included) for this desk-scale simulator.
  VehicleParams sim_params() const { return model_params(); }
  void validate() const;
};

/// Parses and validates; unknown keys, wrong types and out-of-range values raise ConfigError.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& config);

/// Names and texts of the scenarios compiled into the library.
std::vector<std::string> bundled_scenarios();
std::string bundled_scenario_text(const std::string& name);
ScenarioConfig bundled_scenario(const std::string& name);

HybridTrajectory build_trajectory(const TrajectoryConfig& config, const VehicleParams& params);
FlatnessOptions flatness_options(const ScenarioConfig& config);
LoopOptions loop_options(const ScenarioConfig& config);

struct TrackResult {
  RunLog log;
  RunSummary summary;
  Peaks reference_peaks;
};

TrackResult run_track(const ScenarioConfig& config);

struct EnergyResult {
  TrackResult ground;
  TrackResult aerial;
  ExperimentMetrics metrics;
};

EnergyResult run_energy_compare(const ScenarioConfig& config);

struct BenchmarkEntry {
  std::string variant;  ///< full | ablation
  double v_max = 0.0;
  double a_max = 0.0;
  TrackResult result;
  bool failed = false;
};

struct BenchmarkResult {
  std::vector<BenchmarkEntry> entries;
  std::optional<double> full_failure_speed;
  std::optional<double> ablation_failure_speed;
};

BenchmarkResult run_benchmark(const ScenarioConfig& config);

/// Scenario variant for one benchmark level and controller variant.
ScenarioConfig benchmark_scenario(const ScenarioConfig& config, double v_max, double a_max, bool ablation);

// CSV and summary output ----------------------------------------------------

/// Column order of the run log CSV.
const std::vector<std::string>& runlog_columns();
void write_runlog_csv(std::ostream& out, const RunLog& log, int decimation = 1);
/// Reads back a file written by write_runlog_csv (outcome fields are not stored).
RunLog read_runlog_csv(std::istream& in);

/// Long format: series,t,value with one row per logged scalar.
void write_long_csv(std::ostream& out, const RunLog& log);
/// Rebuilds positions from a long-format file and recomputes the summary.
RunLog read_long_csv(std::istream& in);

/// Reference samples: t, flat outputs, x_r, u_r, mode.
void write_reference_csv(std::ostream& out, ReferenceGenerator& generator, double t0, double t1, double dt);

std::string summary_json(const std::string& name, const TrackResult& result);
std::string energy_json(const std::string& name, const EnergyResult& result);
std::string benchmark_json(const std::string& name, const BenchmarkResult& result);
std::string width_report_csv(const VehicleParams& params);

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitInfeasible = 4,
  kExitDivergence = 5,
};
int exit_code(RunOutcome outcome);

}  // namespace bimodal
