#include "mrnav/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mrnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-12;

// Givens-based update of the factorization after activating the constraint
// whose transformed normal is d. Returns false when d is linearly dependent
// on the current active set.
bool add_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, Eigen::VectorXd& d,
                    int& iq, double& R_norm) {
  const int n = static_cast<int>(d.size());
  for (int j = n - 1; j >= iq + 1; --j) {
    double cc = d[j - 1];
    double ss = d[j];
    const double h = std::hypot(cc, ss);
    if (h < kEps) continue;
    d[j] = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d[j - 1] = -h;
    } else {
      d[j - 1] = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j - 1);
      const double t2 = J(k, j);
      J(k, j - 1) = t1 * cc + t2 * ss;
      J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
    }
  }
  ++iq;
  for (int i = 0; i < iq; ++i) R(i, iq - 1) = d[i];
  if (std::abs(d[iq - 1]) <= kEps * R_norm) return false;
  R_norm = std::max(R_norm, std::abs(d[iq - 1]));
  return true;
}

void delete_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J,
                       std::vector<int>& active, Eigen::VectorXd& u, int n,
                       int num_eq, int& iq, int slot) {
  (void)num_eq;
  for (int i = slot; i < iq - 1; ++i) {
    active[i] = active[i + 1];
    u[i] = u[i + 1];
    R.col(i) = R.col(i + 1);
  }
  // slide the incoming candidate (held one past the active range) down
  active[iq - 1] = active[iq];
  u[iq - 1] = u[iq];
  active[iq] = 0;
  u[iq] = 0.0;
  --iq;
  if (iq == 0) return;
  for (int j = slot; j < iq; ++j) {
    double cc = R(j, j);
    double ss = R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h < kEps) continue;
    cc /= h;
    ss /= h;
    R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < iq; ++k) {
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

void update_r(const Eigen::MatrixXd& R, Eigen::VectorXd& r,
              const Eigen::VectorXd& d, int iq) {
  for (int i = iq - 1; i >= 0; --i) {
    double sum = 0.0;
    for (int j = i + 1; j < iq; ++j) sum += R(i, j) * r[j];
    r[i] = (d[i] - sum) / R(i, i);
  }
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem, double tolerance, int max_iter) {
  const int n = problem.num_vars();
  const int m = problem.num_ineq();
  const int k = problem.num_eq();
  if (max_iter <= 0) max_iter = 20 * (n + m + k) + 200;

  QpSolution sol;
  sol.lambda = Eigen::VectorXd::Zero(m);
  sol.nu = Eigen::VectorXd::Zero(k);

  Eigen::MatrixXd G =
      0.5 * (problem.P + problem.P.transpose()) +
      1e-9 * Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    G += 1e-6 * Eigen::MatrixXd::Identity(n, n);
    llt.compute(G);
  }

  // J = L^{-T}
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  llt.matrixU().solveInPlace(J);

  Eigen::VectorXd x = llt.solve(-problem.q);

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  double R_norm = 1.0;
  int iq = 0;
  std::vector<int> active(n + 1, 0);       // >=0: ineq index, <0: eq index -1-i
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  Eigen::VectorXd d(n), z(n), r(n);

  auto finish = [&](QpStatus status) {
    sol.status = status;
    sol.x = x;
    for (int s = 0; s < iq; ++s) {
      if (active[s] >= 0) {
        sol.lambda[active[s]] = u[s];
      } else {
        sol.nu[-1 - active[s]] = -u[s];
      }
    }
    sol.objective = 0.5 * x.dot(problem.P * x) + problem.q.dot(x);
    return sol;
  };

  auto compute_step_dirs = [&](const Eigen::VectorXd& np) {
    d.noalias() = J.transpose() * np;
    if (iq < n) {
      z.noalias() = J.rightCols(n - iq) * d.tail(n - iq);
    } else {
      z.setZero();
    }
    update_r(R, r, d, iq);
  };

  // Equality constraints enter first and never leave.
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd np = problem.A_eq.row(i).transpose();
    compute_step_dirs(np);
    const double resid = np.dot(x) - problem.b_eq[i];
    double t2 = 0.0;
    const bool movable = z.squaredNorm() > kEps;
    if (movable) {
      t2 = -resid / z.dot(np);
    } else if (std::abs(resid) > tolerance + 1e-7 * (1.0 + std::abs(problem.b_eq[i]))) {
      return finish(QpStatus::kInfeasible);
    }
    x += t2 * z;
    for (int s = 0; s < iq; ++s) u[s] -= t2 * r[s];
    u[iq] = t2;
    active[iq] = -1 - i;
    if (!add_constraint(R, J, d, iq, R_norm)) {
      // linearly dependent and consistent: drop it from the factorization
      --iq;
      u[iq] = 0.0;
      active[iq] = 0;
    }
  }

  int iters = 0;
  while (true) {
    // Step 1: most violated inequality, ties to the lowest index.
    int ip = -1;
    double worst = -tolerance;
    for (int j = 0; j < m; ++j) {
      bool is_active = false;
      for (int s = 0; s < iq; ++s) {
        if (active[s] == j) {
          is_active = true;
          break;
        }
      }
      if (is_active) continue;
      const double sj = problem.b_ineq[j] - problem.A_ineq.row(j).dot(x);
      if (sj < worst) {
        worst = sj;
        ip = j;
      }
    }
    if (ip < 0) return finish(QpStatus::kOptimal);

    const Eigen::VectorXd np = -problem.A_ineq.row(ip).transpose();
    double ss = problem.b_ineq[ip] - problem.A_ineq.row(ip).dot(x);
    u[iq] = 0.0;
    active[iq] = ip;

    while (true) {
      if (++iters > max_iter) return finish(QpStatus::kMaxIterations);
      compute_step_dirs(np);

      double t1 = kInf;
      int l = -1;
      for (int s = 0; s < iq; ++s) {
        if (active[s] < 0) continue;  // equalities never leave
        if (r[s] > kEps && u[s] / r[s] < t1) {
          t1 = u[s] / r[s];
          l = s;
        }
      }
      const bool movable = z.squaredNorm() > kEps;
      const double t2 = movable ? -ss / z.dot(np) : kInf;
      const double t = std::min(t1, t2);
      if (t >= kInf) return finish(QpStatus::kInfeasible);

      if (t2 >= kInf) {
        // dual step only: drop the blocking constraint
        for (int s = 0; s < iq; ++s) u[s] -= t * r[s];
        u[iq] += t;
        delete_constraint(R, J, active, u, n, k, iq, l);
        continue;
      }

      x += t * z;
      for (int s = 0; s < iq; ++s) u[s] -= t * r[s];
      u[iq] += t;

      if (t2 <= t1) {
        if (!add_constraint(R, J, d, iq, R_norm)) {
          // should not happen when z != 0; treat as converged-for-this-row
          --iq;
          u[iq] = 0.0;
          active[iq] = 0;
        }
        break;  // back to step 1
      }
      delete_constraint(R, J, active, u, n, k, iq, l);
      ss = problem.b_ineq[ip] - problem.A_ineq.row(ip).dot(x);
    }
  }
}

double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& lambda, const Eigen::VectorXd& nu) {
  double res = 0.0;
  Eigen::VectorXd stat = problem.P * x + problem.q;
  if (problem.num_ineq() > 0) stat += problem.A_ineq.transpose() * lambda;
  if (problem.num_eq() > 0) stat += problem.A_eq.transpose() * nu;
  res = stat.lpNorm<Eigen::Infinity>();

  for (int j = 0; j < problem.num_ineq(); ++j) {
    const double g = problem.A_ineq.row(j).dot(x) - problem.b_ineq[j];
    res = std::max(res, g);                       // primal violation
    res = std::max(res, -lambda[j]);              // dual negativity
    res = std::max(res, std::abs(lambda[j] * g));  // complementarity
  }
  for (int i = 0; i < problem.num_eq(); ++i) {
    res = std::max(res,
                   std::abs(problem.A_eq.row(i).dot(x) - problem.b_eq[i]));
  }
  return res;
}

}  // namespace mrnav
