#include <gtest/gtest.h>

#include <random>

#include "bimodal/qp.hpp"

using namespace bimodal;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = d(rng);
  return M * M.transpose() + 0.5 * MatrixXd::Identity(n, n);
}

VectorXd random_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

TEST(Qp, UnconstrainedMinimizer) {
  std::mt19937_64 rng(1);
  const MatrixXd H = random_spd(5, rng);
  const VectorXd g = random_vec(5, rng);
  const QpResult r = solve_qp(QpProblem::unconstrained(H, g));
  ASSERT_EQ(r.status, QpStatus::Optimal);
  EXPECT_LT((H * r.x + g).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Qp, BoxByHand) {
  // min (x-2)^2 + (y+1)^2 with 0 <= x, y <= 1  ->  (1, 0)
  QpProblem p = QpProblem::unconstrained(2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  p.g << -4.0, 2.0;
  p.A_in.resize(4, 2);
  p.A_in << 1, 0, 0, 1, -1, 0, 0, -1;
  p.b_in.resize(4);
  p.b_in << 0, 0, -1, -1;
  const QpResult r = solve_qp(p);
  ASSERT_EQ(r.status, QpStatus::Optimal);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 0.0, 1e-12);
}

TEST(Qp, EqualityProjection) {
  // min |x|^2 with x0 + x1 + x2 = 3  ->  (1, 1, 1)
  QpProblem p = QpProblem::unconstrained(MatrixXd::Identity(3, 3), VectorXd::Zero(3));
  p.A_eq = MatrixXd::Ones(1, 3);
  p.b_eq = VectorXd::Constant(1, 3.0);
  const QpResult r = solve_qp(p);
  ASSERT_EQ(r.status, QpStatus::Optimal);
  EXPECT_LT((r.x - VectorXd::Ones(3)).norm(), 1e-12);
}

TEST(Qp, InfeasibleDetected) {
  QpProblem p = QpProblem::unconstrained(MatrixXd::Identity(1, 1), VectorXd::Zero(1));
  p.A_in.resize(2, 1);
  p.A_in << 1, -1;
  p.b_in.resize(2);
  p.b_in << 1, 0;  // x >= 1 and x <= 0
  EXPECT_EQ(solve_qp(p).status, QpStatus::Infeasible);
}

TEST(Qp, NonConvexRejected) {
  MatrixXd H = MatrixXd::Identity(2, 2);
  H(1, 1) = -1.0;
  EXPECT_EQ(solve_qp(QpProblem::unconstrained(H, VectorXd::Zero(2))).status, QpStatus::NotConvex);
}

TEST(Qp, RandomProblemsSatisfyKkt) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 8, me = trial % 3, mi = 2 + trial % 12;
    QpProblem p = QpProblem::unconstrained(random_spd(n, rng), random_vec(n, rng));
    const VectorXd x0 = random_vec(n, rng);  // feasible by construction
    p.A_eq = MatrixXd::Zero(me, n);
    for (int i = 0; i < me; ++i) p.A_eq.row(i) = random_vec(n, rng).transpose();
    p.b_eq = p.A_eq * x0;
    p.A_in = MatrixXd::Zero(mi, n);
    for (int i = 0; i < mi; ++i) p.A_in.row(i) = random_vec(n, rng).transpose();
    p.b_in = p.A_in * x0 - random_vec(mi, rng).cwiseAbs();
    const QpResult r = solve_qp(p);
    ASSERT_EQ(r.status, QpStatus::Optimal) << "trial " << trial;
    const KktResiduals k = kkt_residuals(p, r);
    EXPECT_LT(k.stationarity, 1e-8) << trial;
    EXPECT_LT(k.primal, 1e-8) << trial;
    EXPECT_LT(k.dual, 1e-10) << trial;
    EXPECT_LT(k.complementarity, 1e-8) << trial;
  }
}

TEST(Qp, Deterministic) {
  std::mt19937_64 rng(5);
  QpProblem p = QpProblem::unconstrained(random_spd(6, rng), random_vec(6, rng));
  p.A_in = MatrixXd::Identity(6, 6);
  p.b_in = VectorXd::Constant(6, 0.1);
  const QpResult a = solve_qp(p), b = solve_qp(p);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.active, b.active);
}
