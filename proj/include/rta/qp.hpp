#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rta/constraints.hpp"

namespace rta {

enum class QpStatus { Optimal, Infeasible, MaxIterations };

inline const char* qp_status_name(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

// min |u_des - u|^2 + sum_k p_k delta_k^2
// s.t. a_i.u + b_i >= delta_i for slacked rows (0 otherwise), box on u.
struct QpProblem {
  Vec3 u_des{0.0, 0.0, 0.0};
  std::vector<BarrierRow> rows;
  std::vector<int> slack_index;        // per row: slack column, or -1 for hard
  std::vector<double> slack_penalty;   // per slack column
  ControlBounds box;

  int num_slacks() const { return static_cast<int>(slack_penalty.size()); }

  void validate() const {
    if (slack_index.size() != rows.size())
      throw std::invalid_argument("QpProblem: slack_index must match rows");
    const int ns = num_slacks();
    std::vector<char> used(ns, 0);
    int hard = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
      const int si = slack_index[i];
      if (si < 0) {
        ++hard;
        continue;
      }
      if (si >= ns) throw std::invalid_argument("QpProblem: slack index out of range");
      if (used[si]) throw std::invalid_argument("QpProblem: slack column shared by two rows");
      used[si] = 1;
      if (!std::isfinite(rows[i].a[0]) || !std::isfinite(rows[i].b))
        throw std::invalid_argument("QpProblem: non-finite row");
    }
    if (!rows.empty() && hard == 0)
      throw std::invalid_argument("QpProblem: at least one row must be slack-free");
    for (double pk : slack_penalty)
      if (!(pk > 0.0)) throw std::invalid_argument("QpProblem: slack penalties must be positive");
    for (int j = 0; j < 3; ++j)
      if (!(box.lower[j] <= box.upper[j]))
        throw std::invalid_argument("QpProblem: box lower bound exceeds upper bound");
  }
};

struct QpSolution {
  Vec3 u{0.0, 0.0, 0.0};
  std::vector<double> slacks;
  QpStatus status = QpStatus::Optimal;
  int iterations = 0;
  double kkt_residual = 0.0;
  std::vector<double> multipliers;  // rows first, then box lo x3, box hi x3
};

namespace qp_detail {

struct QpData {
  int n = 0;       // decision variables: 3 controls + slacks
  int m = 0;       // inequality constraints: rows + 6 box faces
  int n_rows = 0;
  Eigen::VectorXd g_diag;  // diagonal Hessian
  Eigen::VectorXd g0;      // linear term
  Eigen::MatrixXd ci;      // n x m, columns are constraint normals
  Eigen::VectorXd ci0;     // constraint offsets: ci.z + ci0 >= 0
};

inline QpData build(const QpProblem& prob) {
  const int n_rows = static_cast<int>(prob.rows.size());
  const int ns = prob.num_slacks();
  QpData qp;
  qp.n = 3 + ns;
  qp.m = n_rows + 6;
  qp.n_rows = n_rows;
  qp.g_diag = Eigen::VectorXd::Constant(qp.n, 2.0);
  for (int k = 0; k < ns; ++k) qp.g_diag(3 + k) = 2.0 * prob.slack_penalty[k];
  qp.g0 = Eigen::VectorXd::Zero(qp.n);
  for (int j = 0; j < 3; ++j) qp.g0(j) = -2.0 * prob.u_des[j];
  qp.ci = Eigen::MatrixXd::Zero(qp.n, qp.m);
  qp.ci0 = Eigen::VectorXd::Zero(qp.m);
  for (int i = 0; i < n_rows; ++i) {
    for (int j = 0; j < 3; ++j) qp.ci(j, i) = prob.rows[i].a[j];
    if (prob.slack_index[i] >= 0) qp.ci(3 + prob.slack_index[i], i) = -1.0;
    qp.ci0(i) = prob.rows[i].b;
  }
  for (int j = 0; j < 3; ++j) {
    qp.ci(j, n_rows + j) = 1.0;
    qp.ci0(n_rows + j) = -prob.box.lower[j];
    qp.ci(j, n_rows + 3 + j) = -1.0;
    qp.ci0(n_rows + 3 + j) = prob.box.upper[j];
  }
  return qp;
}

// Rotate the trailing components of d into slot q and mirror the rotations
// onto J; the new column of R is d's head.
inline bool add_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, Eigen::VectorXd& d, int q,
                           double& r_norm) {
  const int n = static_cast<int>(J.rows());
  for (int j = n - 1; j > q; --j) {
    double cc = d(j - 1);
    double ss = d(j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    d(j) = 0.0;
    d(j - 1) = (cc < 0.0) ? -h : h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j - 1);
      const double t2 = J(k, j);
      J(k, j - 1) = t1 * cc + t2 * ss;
      J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
    }
  }
  R.col(q).head(q + 1) = d.head(q + 1);
  const double diag = std::abs(d(q));
  if (diag <= 1e-14 * r_norm) return false;  // linearly dependent
  r_norm = std::max(r_norm, diag);
  return true;
}

// Drop the active constraint at position l and restore R's triangularity.
inline void delete_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, std::vector<int>& active,
                              Eigen::VectorXd& mult, std::vector<char>& is_active, int l) {
  const int n = static_cast<int>(J.rows());
  const int q = static_cast<int>(active.size());
  is_active[active[l]] = 0;
  active.erase(active.begin() + l);
  for (int i = l; i < q - 1; ++i) {
    R.col(i) = R.col(i + 1);
    mult(i) = mult(i + 1);
  }
  mult(q - 1) = mult(q);  // candidate multiplier slides down
  mult(q) = 0.0;
  R.col(q - 1).setZero();
  for (int j = l; j < q - 1; ++j) {
    double cc = R(j, j);
    double ss = R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    R(j + 1, j) = 0.0;
    R(j, j) = (cc < 0.0) ? -h : h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < q - 1; ++k) {
      const double t1 = R(j, k);
      const double t2 = R(j + 1, k);
      R(j, k) = t1 * cc + t2 * ss;
      R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j);
      const double t2 = J(k, j + 1);
      J(k, j) = t1 * cc + t2 * ss;
      J(k, j + 1) = xny * (J(k, j) + t1) - t2;
    }
  }
}

}  // namespace qp_detail

double kkt_residual(const QpProblem& prob, const QpSolution& sol);

// Dual active-set solver (Goldfarb-Idnani). Starts from the unconstrained
// minimum and activates violated constraints one at a time; every iterate
// stays dual feasible, so termination yields machine-precision KKT points.
class QpSolver {
 public:
  static constexpr int kMaxIterations = 200;

  QpSolution solve(const QpProblem& prob) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    prob.validate();
    const qp_detail::QpData qp = qp_detail::build(prob);
    const int n = qp.n;
    const int m = qp.m;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr double kFeasTol = 1e-11;
    constexpr double kDependentDirTol = 1e-24;

    VectorXd x = -qp.g0.cwiseQuotient(qp.g_diag);
    MatrixXd J = MatrixXd::Zero(n, n);
    J.diagonal() = qp.g_diag.cwiseSqrt().cwiseInverse();
    MatrixXd R = MatrixXd::Zero(n, n);
    double r_norm = 1.0;

    std::vector<int> active;
    active.reserve(n);
    std::vector<char> is_active(m, 0);
    VectorXd mult = VectorXd::Zero(n + 1);
    VectorXd d(n), z(n), r(n), s(m);

    QpSolution sol;
    sol.status = QpStatus::Optimal;
    int iter = 0;

    for (;;) {
      // most violated inactive constraint; ties go to the lowest index
      int p = -1;
      double worst = 0.0;
      for (int i = 0; i < m; ++i) {
        s(i) = qp.ci.col(i).dot(x) + qp.ci0(i);
        if (is_active[i]) continue;
        const double tol = kFeasTol * (1.0 + std::abs(qp.ci0(i)));
        if (s(i) < -tol && s(i) < worst) {
          worst = s(i);
          p = i;
        }
      }
      if (p < 0) break;  // primal feasible, hence optimal

      const VectorXd np = qp.ci.col(p);
      mult(active.size()) = 0.0;

      for (;;) {
        if (++iter > kMaxIterations) {
          sol.status = QpStatus::MaxIterations;
          goto finish;
        }
        const int q = static_cast<int>(active.size());
        d.noalias() = J.transpose() * np;
        z.setZero();
        if (q < n) z.noalias() = J.rightCols(n - q) * d.tail(n - q);
        if (q > 0)
          r.head(q) = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));

        double t1 = kInf;
        int l = -1;
        for (int k = 0; k < q; ++k) {
          if (r(k) > 0.0) {
            const double tk = mult(k) / r(k);
            if (tk < t1) {
              t1 = tk;
              l = k;
            }
          }
        }
        const double z_np = (q < n) ? d.tail(n - q).squaredNorm() : 0.0;
        const double t2 = (z_np > kDependentDirTol) ? -s(p) / z_np : kInf;
        const double t = std::min(t1, t2);

        if (t >= kInf) {
          sol.status = QpStatus::Infeasible;
          goto finish;
        }
        if (t2 >= kInf) {
          // dual-only step: the blocking constraint leaves the active set
          for (int k = 0; k < q; ++k) mult(k) -= t * r(k);
          mult(q) += t;
          qp_detail::delete_constraint(R, J, active, mult, is_active, l);
          continue;
        }

        x += t * z;
        for (int k = 0; k < q; ++k) mult(k) -= t * r(k);
        mult(q) += t;

        if (t == t2) {
          if (!qp_detail::add_constraint(R, J, d, q, r_norm)) {
            sol.status = QpStatus::MaxIterations;  // numerical breakdown
            goto finish;
          }
          active.push_back(p);
          is_active[p] = 1;
          break;
        }

        // partial step: drop the blocking constraint, retry the same target
        qp_detail::delete_constraint(R, J, active, mult, is_active, l);
        s(p) = qp.ci.col(p).dot(x) + qp.ci0(p);
      }
    }

  finish:
    sol.iterations = iter;
    // snap controls onto box faces they have effectively reached
    for (int j = 0; j < 3; ++j) {
      double uj = x(j);
      if (std::abs(uj - prob.box.lower[j]) <= 1e-9) uj = prob.box.lower[j];
      if (std::abs(uj - prob.box.upper[j]) <= 1e-9) uj = prob.box.upper[j];
      sol.u[j] = std::clamp(uj, prob.box.lower[j], prob.box.upper[j]);
    }
    sol.slacks.assign(prob.num_slacks(), 0.0);
    for (int k = 0; k < prob.num_slacks(); ++k) sol.slacks[k] = x(3 + k);
    sol.multipliers.assign(m, 0.0);
    for (size_t k = 0; k < active.size(); ++k) sol.multipliers[active[k]] = mult(k);
    sol.kkt_residual = kkt_residual(prob, sol);
    return sol;
  }
};

// Scaled max of stationarity, primal feasibility, dual feasibility, and
// complementary slackness. Uses the solution's multipliers when present,
// otherwise fits least-squares multipliers on the near-active set.
inline double kkt_residual(const QpProblem& prob, const QpSolution& sol) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const qp_detail::QpData qp = qp_detail::build(prob);
  const int n = qp.n;
  const int m = qp.m;

  VectorXd zv(n);
  for (int j = 0; j < 3; ++j) zv(j) = sol.u[j];
  for (int k = 0; k < prob.num_slacks(); ++k)
    zv(3 + k) = (k < static_cast<int>(sol.slacks.size())) ? sol.slacks[k] : 0.0;

  VectorXd s(m);
  for (int i = 0; i < m; ++i) s(i) = qp.ci.col(i).dot(zv) + qp.ci0(i);

  VectorXd lambda = VectorXd::Zero(m);
  if (static_cast<int>(sol.multipliers.size()) == m) {
    for (int i = 0; i < m; ++i) lambda(i) = sol.multipliers[i];
  } else {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (s(i) <= 1e-6 * (1.0 + std::abs(qp.ci0(i)))) act.push_back(i);
    if (!act.empty()) {
      MatrixXd A(n, static_cast<int>(act.size()));
      for (size_t k = 0; k < act.size(); ++k) A.col(k) = qp.ci.col(act[k]);
      const VectorXd grad = qp.g_diag.cwiseProduct(zv) + qp.g0;
      const VectorXd fit = A.colPivHouseholderQr().solve(grad);
      for (size_t k = 0; k < act.size(); ++k) lambda(act[k]) = std::max(0.0, fit(k));
    }
  }

  const VectorXd gz = qp.g_diag.cwiseProduct(zv);
  const VectorXd cl = qp.ci * lambda;
  double res = 0.0;
  for (int j = 0; j < n; ++j) {
    const double stat = gz(j) + qp.g0(j) - cl(j);
    const double scale = std::max(1.0, std::abs(gz(j)) + std::abs(qp.g0(j)) + std::abs(cl(j)));
    res = std::max(res, std::abs(stat) / scale);
  }
  for (int i = 0; i < m; ++i) {
    res = std::max(res, -std::min(0.0, s(i)));       // primal feasibility
    res = std::max(res, -std::min(0.0, lambda(i)));  // dual feasibility
    const double comp = std::abs(lambda(i) * s(i)) / std::max(1.0, std::abs(lambda(i)));
    res = std::max(res, comp);
  }
  return res;
}

}  // namespace rta
