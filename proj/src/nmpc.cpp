#include "bimodal/nmpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace bimodal {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

InputVector clamp_box(const InputVector& u, const InputVector& lo, const InputVector& hi) {
  return u.cwiseMax(lo).cwiseMin(hi);
}

// Per-wheel normals predicted by the model at one stage.
Eigen::Vector2d stage_normals(const StateVector& x, const InputVector& u, const Mode& mode,
                              const VehicleParams& params) {
  const DerivativeResult r = evaluate(RobotState::unpack(x), ControlInput::unpack(u), mode, params);
  return {r.reaction->F_n_left, r.reaction->F_n_right};
}

struct NormalLinearization {
  Eigen::Vector2d value;
  Eigen::Matrix<double, 2, kStateDim> dx;
  Eigen::Matrix<double, 2, kInputDim> du;
};

NormalLinearization linearize_normals(const StateVector& x, const InputVector& u, const Mode& mode,
                                      const VehicleParams& params, double h) {
  NormalLinearization out;
  out.value = stage_normals(x, u, mode, params);
  for (int i = 0; i < kStateDim; ++i) {
    StateVector xp = x;
    xp[i] += h;
    out.dx.col(i) = (stage_normals(xp, u, mode, params) - out.value) / h;
  }
  for (int i = 0; i < kInputDim; ++i) {
    InputVector up = u;
    up[i] += h;
    out.du.col(i) = (stage_normals(x, up, mode, params) - out.value) / h;
  }
  return out;
}

// Reference state with its quaternion moved to the hemisphere of `x`.
StateVector aligned_reference(const StateVector& x, const RobotState& ref) {
  StateVector r = ref.pack();
  if (r.segment<4>(6).dot(x.segment<4>(6)) < 0.0) r.segment<4>(6) = -r.segment<4>(6);
  return r;
}

bool all_finite(const std::vector<StateVector>& xs) {
  return std::all_of(xs.begin(), xs.end(), [](const StateVector& x) { return x.allFinite(); });
}

double min_ground_normal(const std::vector<StateVector>& xs, const std::vector<InputVector>& u,
                         const std::vector<ReferencePoint>& refs, const VehicleParams& params) {
  double m = kInf;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!refs[k].mode.is_ground()) continue;
    m = std::min(m, stage_normals(xs[k], u[k], refs[k].mode, params).minCoeff());
  }
  return m;
}

}  // namespace

void NmpcConfig::validate(const VehicleParams& params) const {
  if (horizon < 1) throw ConfigError("nmpc: horizon must be at least 1");
  if (!(dt > 0.0)) throw ConfigError("nmpc: dt must be positive");
  auto nonneg = [](const auto& v, const char* what) {
    if ((v.array() < 0.0).any() || !v.allFinite()) throw ConfigError(std::string("nmpc: ") + what + " must be >= 0");
  };
  nonneg(q_position, "q_position");
  nonneg(q_velocity, "q_velocity");
  nonneg(q_attitude, "q_attitude");
  nonneg(q_rate, "q_rate");
  nonneg(q_input, "q_input");
  if (!((lower(params).array() < upper(params).array()).all()))
    throw ConfigError("nmpc: u_min must be below u_max componentwise");
  if (!(jacobian_step > 0.0)) throw ConfigError("nmpc: jacobian_step must be positive");
  if (max_qp_iterations < 1) throw ConfigError("nmpc: max_qp_iterations must be at least 1");
  if (!(qp_tolerance > 0.0)) throw ConfigError("nmpc: qp_tolerance must be positive");
  if (!(slack_penalty > 0.0)) throw ConfigError("nmpc: slack_penalty must be positive");
  if (sqp_iterations < 1) throw ConfigError("nmpc: sqp_iterations must be at least 1");
}

StateVector NmpcConfig::state_weight() const {
  StateVector w;
  w << q_position, q_velocity, q_attitude, q_rate;
  return w;
}

StateVector discretize(const StateVector& x, const ControlInput& u, const Mode& mode, double dt,
                       const VehicleParams& params) {
  return rk4_step(x, u, mode, dt, params);
}

Linearization linearize(const StateVector& x, const ControlInput& u, const Mode& mode, double dt,
                        const VehicleParams& params, double h, bool central) {
  Linearization out;
  out.x_next = discretize(x, u, mode, dt, params);
  const InputVector u0 = u.pack();
  for (int i = 0; i < kStateDim; ++i) {
    StateVector xp = x;
    xp[i] += h;
    const StateVector fp = discretize(xp, u, mode, dt, params);
    if (central) {
      StateVector xm = x;
      xm[i] -= h;
      out.A.col(i) = (fp - discretize(xm, u, mode, dt, params)) / (2.0 * h);
    } else {
      out.A.col(i) = (fp - out.x_next) / h;
    }
  }
  for (int i = 0; i < kInputDim; ++i) {
    InputVector up = u0;
    up[i] += h;
    const StateVector fp = discretize(x, ControlInput::unpack(up), mode, dt, params);
    if (central) {
      InputVector um = u0;
      um[i] -= h;
      out.B.col(i) = (fp - discretize(x, ControlInput::unpack(um), mode, dt, params)) / (2.0 * h);
    } else {
      out.B.col(i) = (fp - out.x_next) / h;
    }
  }
  return out;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Relaxed: return "relaxed";
    case SolveStatus::Degraded: return "degraded";
  }
  return "unknown";
}

double OcpSolution::max_slack() const {
  double m = 0.0;
  for (double s : slacks) m = std::max(m, s);
  return m;
}

WarmStart shift_warm_start(const OcpSolution& previous) {
  WarmStart w;
  if (previous.inputs.empty()) return w;
  w.inputs.assign(previous.inputs.begin() + 1, previous.inputs.end());
  w.inputs.push_back(previous.inputs.back());
  if (!previous.states.empty()) {
    w.states.assign(previous.states.begin() + 1, previous.states.end());
    w.states.push_back(previous.states.back());
  }
  return w;
}

double tracking_cost(const std::vector<StateVector>& states, const std::vector<ControlInput>& inputs,
                     const std::vector<ReferencePoint>& refs, const NmpcConfig& cfg) {
  const StateVector Q = cfg.state_weight();
  double cost = 0.0;
  for (std::size_t k = 0; k < states.size() && k < refs.size(); ++k) {
    const StateVector e = states[k] - aligned_reference(states[k], refs[k].state);
    cost += e.dot(Q.cwiseProduct(e));
  }
  for (std::size_t k = 0; k < inputs.size() && k < refs.size(); ++k) {
    const InputVector e = inputs[k].pack() - refs[k].input.pack();
    cost += e.dot(cfg.q_input.cwiseProduct(e));
  }
  return cost;
}

OcpSolution solve(const RobotState& x_current, const std::vector<ReferencePoint>& refs, const NmpcConfig& cfg,
                  const VehicleParams& params, const WarmStart* warm) {
  const int K = cfg.horizon;
  if (static_cast<int>(refs.size()) != K + 1) throw ConfigError("nmpc: expected horizon + 1 reference points");
  if (!x_current.finite()) throw DivergenceError("nmpc: non-finite current state");
  const InputVector lo = cfg.lower(params), hi = cfg.upper(params);
  const int nu = kInputDim * K;
  const StateVector Qx = cfg.state_weight();

  auto opposed = [&](InputVector u) {
    if (cfg.opposed_tilt) {
      const double d = 0.5 * (u[2] - u[3]);
      u[2] = d;
      u[3] = -d;
    }
    return clamp_box(u, lo, hi);
  };

  // Linearization trajectory: the shifted previous prediction, or the references.
  std::vector<InputVector> ubar(K);
  std::vector<StateVector> xbar(K + 1);
  const bool have_warm = warm && static_cast<int>(warm->inputs.size()) == K &&
                         static_cast<int>(warm->states.size()) == K + 1;
  for (int k = 0; k < K; ++k) ubar[k] = opposed(have_warm ? warm->inputs[k].pack() : refs[k].input.pack());
  for (int k = 0; k <= K; ++k) xbar[k] = have_warm ? warm->states[k] : refs[k].state.pack();
  if (!all_finite(xbar)) {
    for (int k = 0; k <= K; ++k) xbar[k] = refs[k].state.pack();
  }

  StateVector x0 = x_current.pack();
  if (x0.segment<4>(6).dot(xbar[0].segment<4>(6)) < 0.0) x0.segment<4>(6) = -x0.segment<4>(6);

  auto finish = [&](const std::vector<InputVector>& u, std::vector<StateVector> xs, SolveStatus status) {
    OcpSolution s;
    s.status = status;
    for (const InputVector& v : u) s.inputs.push_back(ControlInput::unpack(v));
    for (StateVector& x : xs) x.segment<4>(6).normalize();
    s.states = std::move(xs);
    s.cost = tracking_cost(s.states, s.inputs, refs, cfg);
    s.min_normal = min_ground_normal(s.states, u, refs, params);
    return s;
  };
  auto degraded = [&](QpStatus qs) {
    std::vector<StateVector> xs = xbar;
    xs[0] = x0;
    OcpSolution s = finish(ubar, xs, SolveStatus::Degraded);
    s.qp_status = qs;
    return s;
  };

  OcpSolution best;
  for (int pass = 0; pass < cfg.sqp_iterations; ++pass) {
    // Stage models with defects d_k = f(xbar_k, ubar_k) - xbar_{k+1}; dx_k = G_k du + h_k.
    std::vector<MatrixXd> G(K + 1, MatrixXd::Zero(kStateDim, nu));
    std::vector<StateVector> h(K + 1);
    h[0] = x0 - xbar[0];
    for (int k = 0; k < K; ++k) {
      const Linearization lin =
          linearize(xbar[k], ControlInput::unpack(ubar[k]), refs[k].mode, cfg.dt, params, cfg.jacobian_step);
      if (!lin.x_next.allFinite() || !lin.A.allFinite() || !lin.B.allFinite()) return degraded(QpStatus::Infeasible);
      G[k + 1].leftCols(kInputDim * k) = lin.A * G[k].leftCols(kInputDim * k);
      G[k + 1].middleCols(kInputDim * k, kInputDim) = lin.B;
      h[k + 1] = lin.A * h[k] + (lin.x_next - xbar[k + 1]);
    }

    MatrixXd H = MatrixXd::Zero(nu, nu);
    VectorXd g = VectorXd::Zero(nu);
    for (int k = 1; k <= K; ++k) {
      const StateVector base = xbar[k] + h[k];
      const StateVector e = base - aligned_reference(base, refs[k].state);
      const int c = kInputDim * k;  // only the first k input blocks act on x_k
      const MatrixXd QG = Qx.asDiagonal() * G[k].leftCols(c);
      H.topLeftCorner(c, c).noalias() += G[k].leftCols(c).transpose() * QG;
      g.head(c).noalias() += QG.transpose() * e;
    }
    for (int k = 0; k < K; ++k) {
      const InputVector e = ubar[k] - refs[k].input.pack();
      H.diagonal().segment<kInputDim>(kInputDim * k) += cfg.q_input;
      g.segment<kInputDim>(kInputDim * k) += cfg.q_input.cwiseProduct(e);
    }
    H.diagonal().array() += 1e-9;

    // Input box and linearized per-wheel normals at ground steps.
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < kInputDim; ++i) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nu);
        r[kInputDim * k + i] = 1.0;
        rows.push_back(r);
        rhs.push_back(lo[i] - ubar[k][i]);
        rows.push_back(-r);
        rhs.push_back(ubar[k][i] - hi[i]);
      }
    }
    const std::size_t n_box = rows.size();
    for (int k = 0; k < K; ++k) {
      if (!refs[k].mode.is_ground()) continue;
      const NormalLinearization nl = linearize_normals(xbar[k], ubar[k], refs[k].mode, params, cfg.jacobian_step);
      for (int w = 0; w < 2; ++w) {
        Eigen::RowVectorXd r = nl.dx.row(w) * G[k];
        r.segment<kInputDim>(kInputDim * k) += nl.du.row(w);
        rows.push_back(r);
        rhs.push_back(cfg.normal_force_margin - nl.value[w] - nl.dx.row(w).dot(h[k]));
      }
    }
    const int n_normal = static_cast<int>(rows.size() - n_box);

    QpProblem qp;
    qp.H = H;
    qp.g = g;
    qp.A_in.resize(static_cast<Eigen::Index>(rows.size()), nu);
    qp.b_in.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      qp.A_in.row(static_cast<Eigen::Index>(i)) = rows[i];
      qp.b_in[static_cast<Eigen::Index>(i)] = rhs[i];
    }
    const int n_eq = cfg.opposed_tilt ? K : 0;
    qp.A_eq = MatrixXd::Zero(n_eq, nu);
    qp.b_eq = VectorXd::Zero(n_eq);
    for (int k = 0; k < n_eq; ++k) {
      qp.A_eq(k, kInputDim * k + 2) = 1.0;
      qp.A_eq(k, kInputDim * k + 3) = 1.0;
      qp.b_eq[k] = -(ubar[k][2] + ubar[k][3]);
    }

    QpOptions qopt;
    qopt.max_iterations = cfg.max_qp_iterations;
    qopt.feasibility_tolerance = cfg.qp_tolerance;
    QpResult res = solve_qp(qp, qopt);
    SolveStatus status = SolveStatus::Optimal;
    std::vector<double> slacks;
    VectorXd du;
    if (res.status == QpStatus::Optimal) {
      du = res.x;
    } else if (n_normal > 0) {
      // L1 relaxation of the normal rows: one nonnegative slack per row.
      const int n = nu + n_normal;
      QpProblem rq;
      rq.H = MatrixXd::Zero(n, n);
      rq.H.topLeftCorner(nu, nu) = H;
      rq.H.diagonal().tail(n_normal).setConstant(1e-6);
      rq.g = VectorXd::Zero(n);
      rq.g.head(nu) = g;
      rq.g.tail(n_normal).setConstant(cfg.slack_penalty);
      rq.A_eq = MatrixXd::Zero(n_eq, n);
      rq.A_eq.leftCols(nu) = qp.A_eq;
      rq.b_eq = qp.b_eq;
      const int m = static_cast<int>(rows.size());
      rq.A_in = MatrixXd::Zero(m + n_normal, n);
      rq.A_in.topLeftCorner(m, nu) = qp.A_in;
      rq.b_in = VectorXd::Zero(m + n_normal);
      rq.b_in.head(m) = qp.b_in;
      for (int i = 0; i < n_normal; ++i) {
        rq.A_in(static_cast<int>(n_box) + i, nu + i) = 1.0;
        rq.A_in(m + i, nu + i) = 1.0;
      }
      res = solve_qp(rq, qopt);
      if (res.status != QpStatus::Optimal) return degraded(res.status);
      du = res.x.head(nu);
      slacks.assign(res.x.data() + nu, res.x.data() + n);
      status = SolveStatus::Relaxed;
    } else {
      return degraded(res.status);
    }

    std::vector<InputVector> u(K);
    std::vector<StateVector> xs(K + 1);
    for (int k = 0; k < K; ++k) u[k] = clamp_box(ubar[k] + du.segment<kInputDim>(kInputDim * k), lo, hi);
    for (int k = 0; k <= K; ++k) xs[k] = xbar[k] + h[k] + G[k] * du;
    if (!all_finite(xs)) return degraded(res.status);
    best = finish(u, xs, status);
    best.qp_status = res.status;
    best.qp_iterations += res.iterations;
    best.slacks = std::move(slacks);
    ubar = u;
    xbar = best.states;
  }
  return best;
}

std::string to_string(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::Completed: return "completed";
    case RunOutcome::SolverFailure: return "solver_failure";
    case RunOutcome::InfeasibleReference: return "infeasible_reference";
    case RunOutcome::Diverged: return "diverged";
  }
  return "unknown";
}

RunLog control_loop(ReferenceGenerator& references, const VehicleParams& sim_params, const NmpcConfig& cfg,
                    const LoopOptions& options) {
  const VehicleParams& model = references.params();
  cfg.validate(model);
  if (!(options.control_rate > 0.0) || !(options.sim_rate >= options.control_rate))
    throw ConfigError("control_loop: need sim_rate >= control_rate > 0");
  const double ratio = options.sim_rate / options.control_rate;
  const int sub = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - sub) > 1e-9) throw ConfigError("control_loop: sim_rate must be an integer multiple of control_rate");
  const double period = 1.0 / options.control_rate;
  const double duration = options.duration.value_or(references.trajectory().duration());
  const int ticks = static_cast<int>(std::floor(duration / period + 1e-9));

  RunLog log;
  log.ticks.reserve(static_cast<std::size_t>(ticks));
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::optional<Simulator> sim;
  try {
    const ReferencePoint start = references.at(0.0);
    Simulator::Options so;
    so.dt = 1.0 / options.sim_rate;
    so.slip_model = options.slip_model;
    so.lateral_slip_threshold = options.lateral_slip_threshold;
    sim.emplace(sim_params, so, start.state, start.mode);
  } catch (const InfeasibleReference& e) {
    log.outcome = RunOutcome::InfeasibleReference;
    log.message = e.what();
    return log;
  }

  std::optional<OcpSolution> previous;
  int consecutive_degraded = 0;
  for (int tick = 0; tick < ticks; ++tick) {
    const double t = tick * period;
    TickRecord rec;
    rec.t = t;
    const RobotState truth = sim->state();
    rec.p = truth.p;
    rec.q = truth.q.wxyz();
    rec.v = truth.v;
    rec.omega = truth.omega;
    rec.ground = sim->mode().is_ground();

    std::vector<ReferencePoint> refs;
    try {
      refs = references.sample(t, cfg.horizon, cfg.dt);
    } catch (const InfeasibleReference& e) {
      log.outcome = RunOutcome::InfeasibleReference;
      log.message = e.what();
      return log;
    }
    rec.p_ref = refs[0].state.p;
    rec.q_ref = refs[0].state.q.wxyz();
    rec.ground_ref = refs[0].mode.is_ground();

    RobotState measured = truth;
    if (options.position_noise > 0.0) {
      for (int i = 0; i < 3; ++i) measured.p[i] += options.position_noise * normal(rng);
    }
    if (options.attitude_noise > 0.0) {
      Vec3 rv;
      for (int i = 0; i < 3; ++i) rv[i] = options.attitude_noise * normal(rng);
      const double angle = rv.norm();
      if (angle > 0.0) {
        const Eigen::Quaterniond dq(Eigen::AngleAxisd(angle, rv / angle));
        measured.q = Orientation::from_quaternion(truth.q.quaternion() * dq);
      }
    }

    WarmStart warm;
    if (previous) warm = shift_warm_start(*previous);
    const auto t0 = std::chrono::steady_clock::now();
    OcpSolution sol;
    try {
      sol = solve(measured, refs, cfg, model, previous ? &warm : nullptr);
    } catch (const DivergenceError& e) {
      log.outcome = RunOutcome::Diverged;
      log.message = e.what();
      return log;
    }
    if (options.record_timing)
      rec.solve_time_us =
          std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    rec.status = sol.status;
    rec.cost = sol.cost;
    rec.slack_max = sol.max_slack();
    rec.min_normal = sol.min_normal;
    rec.u = sol.inputs.front();
    if (sol.status == SolveStatus::Relaxed) ++log.relaxed_ticks;
    if (sol.status == SolveStatus::Degraded) {
      ++log.degraded_ticks;
      if (++consecutive_degraded > options.max_degraded_ticks) {
        log.ticks.push_back(rec);
        log.outcome = RunOutcome::SolverFailure;
        log.message = "controller degraded for " + std::to_string(consecutive_degraded) + " consecutive ticks";
        return log;
      }
    } else {
      consecutive_degraded = 0;
    }
    previous = std::move(sol);

    try {
      double energy = 0.0;
      for (int i = 0; i < sub; ++i) {
        const Simulator::StepReport r = sim->advance(rec.u);
        energy += r.power;
        if (i == 0 && r.reaction) {
          rec.F_n_left = r.reaction->F_n_left;
          rec.F_n_right = r.reaction->F_n_right;
          rec.f_l = r.reaction->f_l;
        }
        rec.slipping = rec.slipping || r.slipping;
        rec.lift_off = rec.lift_off || r.lift_off;
      }
      rec.power = energy / sub;
    } catch (const DivergenceError& e) {
      log.ticks.push_back(rec);
      log.outcome = RunOutcome::Diverged;
      log.message = e.what();
      return log;
    }
    log.ticks.push_back(rec);
    if ((rec.p - rec.p_ref).norm() > options.divergence_error) {
      log.outcome = RunOutcome::Diverged;
      log.message = "position error exceeded " + std::to_string(options.divergence_error) + " m at t = " +
                    std::to_string(t) + " s";
      return log;
    }
  }
  return log;
}

}  // namespace bimodal
