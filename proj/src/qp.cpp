#include "bimodal/qp.hpp"

#include <cmath>
#include <limits>

namespace bimodal {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Factorization state of the dual method: J J' = H^-1, and for the active normals N,
// J' N = [R; 0] with R upper triangular.
class ActiveSet {
 public:
  explicit ActiveSet(MatrixXd J) : J_(std::move(J)), R_(MatrixXd::Zero(J_.cols(), J_.cols())) {}

  int size() const { return q_; }
  const MatrixXd& J() const { return J_; }

  // Primal direction z and dual direction r for a candidate normal.
  void directions(const VectorXd& n, VectorXd& d, VectorXd& z, VectorXd& r) const {
    const int dim = static_cast<int>(J_.cols());
    d.noalias() = J_.transpose() * n;
    z.noalias() = J_.rightCols(dim - q_) * d.tail(dim - q_);
    r = R_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(d.head(q_));
  }

  // Returns false when the normal is linearly dependent on the active ones.
  bool add(VectorXd d) {
    const int dim = static_cast<int>(J_.cols());
    for (int j = dim - 1; j > q_; --j) {
      const double a = d[j - 1], b = d[j];
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h, s = b / h;
      d[j - 1] = h;
      d[j] = 0.0;
      rotate_columns(j - 1, c, s);
    }
    if (std::abs(d[q_]) <= 1e-12 * std::max(1.0, d.head(q_ + 1).norm())) return false;
    R_.col(q_).head(q_ + 1) = d.head(q_ + 1);
    ++q_;
    return true;
  }

  void remove(int k) {
    for (int j = k; j < q_ - 1; ++j) R_.col(j).head(q_) = R_.col(j + 1).head(q_);
    R_.col(q_ - 1).setZero();
    for (int j = k; j < q_ - 1; ++j) {
      const double a = R_(j, j), b = R_(j + 1, j);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h, s = b / h;
      for (int col = j; col < q_ - 1; ++col) {
        const double t1 = R_(j, col), t2 = R_(j + 1, col);
        R_(j, col) = c * t1 + s * t2;
        R_(j + 1, col) = -s * t1 + c * t2;
      }
      R_(j + 1, j) = 0.0;
      rotate_columns(j, c, s);
    }
    --q_;
  }

 private:
  void rotate_columns(int j, double c, double s) {
    for (Eigen::Index row = 0; row < J_.rows(); ++row) {
      const double t1 = J_(row, j), t2 = J_(row, j + 1);
      J_(row, j) = c * t1 + s * t2;
      J_(row, j + 1) = -s * t1 + c * t2;
    }
  }

  MatrixXd J_;
  MatrixXd R_;
  int q_ = 0;
};

}  // namespace

QpProblem QpProblem::unconstrained(const MatrixXd& H, const VectorXd& g) {
  const Eigen::Index n = g.size();
  return {H, g, MatrixXd(0, n), VectorXd(0), MatrixXd(0, n), VectorXd(0)};
}

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::MaxIterations: return "max_iterations";
    case QpStatus::NotConvex: return "not_convex";
  }
  return "unknown";
}

QpResult solve_qp(const QpProblem& P, const QpOptions& options) {
  const int n = static_cast<int>(P.g.size());
  const int m_eq = static_cast<int>(P.b_eq.size());
  const int m_in = static_cast<int>(P.b_in.size());
  QpResult out;
  out.x = VectorXd::Zero(n);
  out.lambda_eq = VectorXd::Zero(m_eq);
  out.lambda_in = VectorXd::Zero(m_in);

  Eigen::LLT<MatrixXd> llt(P.H);
  if (llt.info() != Eigen::Success) {
    out.status = QpStatus::NotConvex;
    return out;
  }
  ActiveSet set(llt.matrixU().solve(MatrixXd::Identity(n, n)));

  VectorXd x = -(set.J() * (set.J().transpose() * P.g));
  // Active constraints: ids < m_eq are equalities, the rest inequality rows offset by m_eq.
  std::vector<int> ids;
  std::vector<double> u;
  VectorXd d(n), z(n), r;

  auto normal = [&](int id) -> VectorXd {
    return id < m_eq ? VectorXd(P.A_eq.row(id).transpose()) : VectorXd(P.A_in.row(id - m_eq).transpose());
  };

  for (int j = 0; j < m_eq; ++j) {
    const VectorXd nj = normal(j);
    set.directions(nj, d, z, r);
    const double zn = z.dot(nj);
    const double residual = P.b_eq[j] - nj.dot(x);
    if (std::abs(zn) <= 1e-14 * std::max(1.0, nj.squaredNorm())) {
      if (std::abs(residual) > options.feasibility_tolerance) {
        out.status = QpStatus::Infeasible;
        out.x = x;
        return out;
      }
      continue;  // redundant row
    }
    const double t = residual / zn;
    x += t * z;
    for (int i = 0; i < static_cast<int>(u.size()); ++i) u[i] -= t * r[i];
    if (!set.add(d)) continue;
    ids.push_back(j);
    u.push_back(t);
  }

  std::vector<char> is_active(m_in, 0);
  int iter = 0;
  for (;;) {
    if (iter >= options.max_iterations) {
      out.status = QpStatus::MaxIterations;
      break;
    }
    // Most violated inactive inequality.
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < m_in; ++i) {
      if (is_active[i]) continue;
      const double s = P.A_in.row(i).dot(x) - P.b_in[i];
      const double tol = options.feasibility_tolerance * (1.0 + std::abs(P.b_in[i]));
      if (s < -tol && s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) {
      out.status = QpStatus::Optimal;
      break;
    }
    const VectorXd np = P.A_in.row(p).transpose();
    double up = 0.0;
    bool failed = false;
    for (;;) {
      ++iter;
      if (iter > options.max_iterations) {
        failed = true;
        out.status = QpStatus::MaxIterations;
        break;
      }
      set.directions(np, d, z, r);
      double t1 = kInf;
      int k = -1;
      for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
        if (ids[i] < m_eq || r[i] <= 0.0) continue;
        const double ratio = u[i] / r[i];
        if (ratio < t1) {
          t1 = ratio;
          k = i;
        }
      }
      const double zn = z.dot(np);
      const double sp = np.dot(x) - P.b_in[p];
      const double t2 = zn > 1e-14 * std::max(1.0, np.squaredNorm()) ? -sp / zn : kInf;
      const double t = std::min(t1, t2);
      if (t == kInf) {
        failed = true;
        out.status = QpStatus::Infeasible;
        break;
      }
      for (int i = 0; i < static_cast<int>(u.size()); ++i) u[i] -= t * r[i];
      up += t;
      if (t2 < kInf) x += t * z;
      if (t2 <= t1) {
        if (!set.add(d)) {
          failed = true;
          out.status = QpStatus::Infeasible;
          break;
        }
        ids.push_back(m_eq + p);
        u.push_back(up);
        is_active[p] = 1;
        break;
      }
      // Partial step: the blocking constraint leaves the active set.
      is_active[ids[k] - m_eq] = 0;
      set.remove(k);
      ids.erase(ids.begin() + k);
      u.erase(u.begin() + k);
    }
    if (failed) break;
  }

  out.x = x;
  out.iterations = iter;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < m_eq) {
      out.lambda_eq[ids[i]] = u[i];
    } else {
      out.lambda_in[ids[i] - m_eq] = u[i];
      out.active.push_back(ids[i] - m_eq);
    }
  }
  out.objective = 0.5 * x.dot(P.H * x) + P.g.dot(x);
  return out;
}

KktResiduals kkt_residuals(const QpProblem& P, const QpResult& res) {
  KktResiduals k;
  VectorXd grad = P.H * res.x + P.g;
  if (P.b_eq.size() > 0) grad -= P.A_eq.transpose() * res.lambda_eq;
  if (P.b_in.size() > 0) grad -= P.A_in.transpose() * res.lambda_in;
  k.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (P.b_eq.size() > 0) k.primal = (P.A_eq * res.x - P.b_eq).cwiseAbs().maxCoeff();
  if (P.b_in.size() > 0) {
    const VectorXd s = P.A_in * res.x - P.b_in;
    k.primal = std::max(k.primal, std::max(0.0, -s.minCoeff()));
    k.dual = std::max(0.0, -res.lambda_in.minCoeff());
    k.complementarity = res.lambda_in.cwiseProduct(s).cwiseAbs().maxCoeff();
  }
  return k;
}

}  // namespace bimodal
