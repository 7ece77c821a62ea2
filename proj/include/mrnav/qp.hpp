#pragma once

#include <Eigen/Dense>

namespace mrnav {

// Dense convex QP:
//   minimize   0.5 x'Px + q'x
//   subject to A_ineq x <= b_ineq
//              A_eq   x == b_eq
// P must be symmetric positive semidefinite.
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A_ineq;  // m x n (may be 0 x n)
  Eigen::VectorXd b_ineq;
  Eigen::MatrixXd A_eq;    // k x n (may be 0 x n)
  Eigen::VectorXd b_eq;

  int num_vars() const { return static_cast<int>(q.size()); }
  int num_ineq() const { return static_cast<int>(b_ineq.size()); }
  int num_eq() const { return static_cast<int>(b_eq.size()); }
};

enum class QpStatus { kOptimal, kInfeasible, kMaxIterations };

struct QpSolution {
  Eigen::VectorXd x;
  QpStatus status{QpStatus::kInfeasible};
  double objective{0.0};
  Eigen::VectorXd lambda;  // inequality multipliers, >= 0
  Eigen::VectorXd nu;      // equality multipliers, free sign
};

// Dual active-set method (Goldfarb-Idnani). Starts from the unconstrained
// minimizer and adds violated constraints one at a time, so no phase-1 is
// needed; an unbounded dual step signals primal infeasibility. P is
// regularized by 1e-9*I before factorization. Ties among violated
// constraints break toward the lowest index.
QpSolution solve_qp(const QpProblem& problem, double tolerance = 1e-9,
                    int max_iter = 0 /* 0 = auto */);

// Max of stationarity norm, primal violation, dual negativity, and
// complementarity gap at (x, lambda, nu). Stationarity convention:
// Px + q + A_ineq'lambda + A_eq'nu = 0.
double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& lambda, const Eigen::VectorXd& nu);

}  // namespace mrnav
