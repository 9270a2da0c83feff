#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace bimodal {

/// min 1/2 x'Hx + g'x  s.t.  A_eq x = b_eq,  A_in x >= b_in.  H must be positive definite.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;

  /// Empty constraint blocks sized for n variables.
  static QpProblem unconstrained(const Eigen::MatrixXd& H, const Eigen::VectorXd& g);
};

enum class QpStatus { Optimal, Infeasible, MaxIterations, NotConvex };

std::string to_string(QpStatus status);

struct QpOptions {
  int max_iterations = 1000;
  double feasibility_tolerance = 1e-9;
};

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda_eq;  ///< free-sign multipliers
  Eigen::VectorXd lambda_in;  ///< nonnegative, zero for inactive rows
  std::vector<int> active;    ///< active inequality rows
  int iterations = 0;
  double objective = 0.0;
};

/// Dual active-set method of Goldfarb and Idnani. The start point is the unconstrained
/// minimizer, so no feasible initial guess is needed; constraints are added most-violated first
/// with a deterministic (lowest index) tie break.
QpResult solve_qp(const QpProblem& problem, const QpOptions& options = {});

struct KktResiduals {
  double stationarity = 0.0;   ///< |Hx + g - A_eq' l - A_in' mu|_inf
  double primal = 0.0;         ///< largest equality or inequality violation
  double dual = 0.0;           ///< most negative inequality multiplier (as a positive number)
  double complementarity = 0.0;  ///< max |mu_i (a_i x - b_i)|
};
KktResiduals kkt_residuals(const QpProblem& problem, const QpResult& result);

}  // namespace bimodal
