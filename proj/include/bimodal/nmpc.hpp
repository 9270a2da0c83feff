#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bimodal/qp.hpp"
#include "bimodal/trajectory.hpp"

namespace bimodal {

using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using InputMatrix = Eigen::Matrix<double, kStateDim, kInputDim>;

struct NmpcConfig {
  int horizon = 20;
  double dt = 0.05;
  Vec3 q_position{1000.0, 1000.0, 500.0};
  Vec3 q_velocity{100.0, 100.0, 100.0};
  Vec4 q_attitude{200.0, 200.0, 200.0, 200.0};  ///< on (w, x, y, z) differences
  Vec3 q_rate{10.0, 10.0, 10.0};
  Vec4 q_input{10.0, 1.0, 1.0, 1.0};  ///< (T1, T2, delta1, delta2)
  /// Input box; the vehicle limits when unset.
  std::optional<InputVector> u_min;
  std::optional<InputVector> u_max;
  double jacobian_step = 1e-6;
  int max_qp_iterations = 500;
  double qp_tolerance = 1e-9;
  /// Per-wheel normal force kept above this value at ground steps [N].
  double normal_force_margin = 0.0;
  /// L1 penalty on normal-force slack when the hard QP is infeasible.
  double slack_penalty = 1e4;
  /// SQP passes per solve: 1 is real-time iteration, more approach the converged solution.
  int sqp_iterations = 1;
  /// Ablation: restrict the inputs to delta1 = -delta2 (no net lateral thrust).
  bool opposed_tilt = false;

  /// Throws ConfigError on a malformed configuration.
  void validate(const VehicleParams& params) const;
  InputVector lower(const VehicleParams& params) const { return u_min.value_or(params.input_lower()); }
  InputVector upper(const VehicleParams& params) const { return u_max.value_or(params.input_upper()); }
  /// Diagonal of the 13-dimensional state weight in packed order.
  StateVector state_weight() const;
};

/// x_next of one RK4 step of the unified model.
StateVector discretize(const StateVector& x, const ControlInput& u, const Mode& mode, double dt,
                       const VehicleParams& params);

struct Linearization {
  StateVector x_next;
  StateMatrix A;  ///< d x_next / d x
  InputMatrix B;  ///< d x_next / d u
};

/// Finite-difference Jacobians of discretize: forward differences, or central when asked.
Linearization linearize(const StateVector& x, const ControlInput& u, const Mode& mode, double dt,
                        const VehicleParams& params, double step = 1e-6, bool central = false);

enum class SolveStatus { Optimal, Relaxed, Degraded };
std::string to_string(SolveStatus status);

struct OcpSolution {
  std::vector<ControlInput> inputs;  ///< K entries
  std::vector<StateVector> states;   ///< K + 1 entries, predicted by the linearized model
  std::vector<double> slacks;        ///< normal-force slack per ground constraint row (empty unless relaxed)
  SolveStatus status = SolveStatus::Optimal;
  QpStatus qp_status = QpStatus::Optimal;
  int qp_iterations = 0;
  double cost = 0.0;
  /// Smallest predicted per-wheel normal over ground steps (+inf without ground steps).
  double min_normal = 0.0;

  double max_slack() const;
};

struct WarmStart {
  std::vector<ControlInput> inputs;  ///< K entries
  std::vector<StateVector> states;   ///< K + 1 entries
};

/// Drops the first input and state and duplicates the last ones.
WarmStart shift_warm_start(const OcpSolution& previous);

/// Tracking cost of a state/input sequence against the references (same weights as the solver).
double tracking_cost(const std::vector<StateVector>& states, const std::vector<ControlInput>& inputs,
                     const std::vector<ReferencePoint>& refs, const NmpcConfig& cfg);

/// One optimal-control solve (real-time iteration, multiple-shooting linearization with defects).
/// The prediction model switches per step with the reference modes. Without a warm start the
/// reference states and inputs (clamped to the box) are the linearization points.
OcpSolution solve(const RobotState& x, const std::vector<ReferencePoint>& refs, const NmpcConfig& cfg,
                  const VehicleParams& params, const WarmStart* warm = nullptr);

struct LoopOptions {
  double control_rate = 200.0;  ///< [Hz]
  double sim_rate = 1000.0;     ///< [Hz]
  bool slip_model = false;
  double lateral_slip_threshold = 1e-3;  ///< [m/s]
  double position_noise = 0.0;  ///< std of measured position [m]
  double attitude_noise = 0.0;  ///< std of measured attitude, small rotation [rad]
  std::uint64_t seed = 1;
  bool record_timing = false;  ///< off keeps logs reproducible
  /// Run length; the trajectory duration when unset.
  std::optional<double> duration;
  /// Consecutive degraded solves tolerated before the run is aborted.
  int max_degraded_ticks = 20;
  /// Position error norm treated as divergence [m].
  double divergence_error = 5.0;
};

enum class RunOutcome { Completed, SolverFailure, InfeasibleReference, Diverged };
std::string to_string(RunOutcome outcome);

struct TickRecord {
  double t = 0.0;
  Vec3 p_ref = Vec3::Zero();
  Vec4 q_ref{1.0, 0.0, 0.0, 0.0};
  Vec3 p = Vec3::Zero();
  Vec4 q{1.0, 0.0, 0.0, 0.0};
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();  ///< body rates
  ControlInput u;
  double solve_time_us = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  double cost = 0.0;
  double slack_max = 0.0;
  bool ground_ref = false;  ///< reference mode
  bool ground = false;      ///< simulator mode at the tick
  bool slipping = false;    ///< any sliding sub-step in the control period
  bool lift_off = false;    ///< any clamped wheel normal in the control period
  double power = 0.0;       ///< mean rotor power over the period [W]
  double min_normal = 0.0;  ///< predicted, +inf when no ground step
  // contact forces at the first simulator step of the period, zero in the air
  double F_n_left = 0.0;
  double F_n_right = 0.0;
  double f_l = 0.0;
};

struct RunLog {
  std::vector<TickRecord> ticks;
  RunOutcome outcome = RunOutcome::Completed;
  std::string message;
  int degraded_ticks = 0;
  int relaxed_ticks = 0;

  bool completed() const { return outcome == RunOutcome::Completed; }
};

/// Closed loop: sample K + 1 references per control tick, solve, hold u(0) over the period
/// while the simulator runs at sim_rate. Errors end the run and are reported in the outcome.
RunLog control_loop(ReferenceGenerator& references, const VehicleParams& sim_params, const NmpcConfig& cfg,
                    const LoopOptions& options);

}  // namespace bimodal
