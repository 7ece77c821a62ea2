#include "mrnav/mh.hpp"

#include <cmath>

namespace mrnav {

namespace {

constexpr int kCp = 6;  // quintic Bezier control points per segment

// Gram matrix of the cubic Bernstein basis on [0,1]:
// integral of b_i b_j = C(3,i) C(3,j) / (7 C(6,i+j)).
Eigen::Matrix4d cubic_bernstein_gram() {
  auto choose = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      m(i, j) = choose(3, i) * choose(3, j) / (7.0 * choose(6, i + j));
    }
  return m;
}

}  // namespace

std::optional<PiecewiseTrajectory> optimize_spline(
    std::span<const TimedPosition> path, const Vec3& start_velocity,
    std::span<const Hyperplane> respected_planes, const MhConfig& cfg) {
  const int segments = int(path.size()) - 1;
  if (segments < 1) return std::nullopt;

  std::vector<double> durations(segments);
  for (int s = 0; s < segments; ++s) {
    durations[s] = path[s + 1].time - path[s].time;
    if (durations[s] <= 1e-6) return std::nullopt;
  }

  const int n = segments * kCp * 3;
  auto idx = [&](int seg, int cp, int axis) {
    return (seg * kCp + cp) * 3 + axis;
  };

  QpProblem qp;
  qp.P = Eigen::MatrixXd::Zero(n, n);
  qp.q = Eigen::VectorXd::Zero(n);

  // Acceleration-energy objective. The acceleration of a quintic segment is a
  // cubic Bezier with control points (20/T^2) * second differences, so the
  // energy is T * (20/T^2)^2 * a^T G a with G the cubic Bernstein Gram matrix.
  const Eigen::Matrix4d gram = cubic_bernstein_gram();
  for (int s = 0; s < segments; ++s) {
    const double T = durations[s];
    const double scale = T * std::pow(20.0 / (T * T), 2);
    // d maps the 6 position cps to the 4 second differences
    Eigen::Matrix<double, 4, 6> d = Eigen::Matrix<double, 4, 6>::Zero();
    for (int i = 0; i < 4; ++i) {
      d(i, i) = 1.0;
      d(i, i + 1) = -2.0;
      d(i, i + 2) = 1.0;
    }
    const Eigen::Matrix<double, 6, 6> h = scale * d.transpose() * gram * d;
    for (int axis = 0; axis < 3; ++axis)
      for (int i = 0; i < kCp; ++i)
        for (int j = 0; j < kCp; ++j) {
          qp.P(idx(s, i, axis), idx(s, j, axis)) += 2.0 * h(i, j);
        }
  }
  // Waypoint tracking on the interior junctions.
  for (int s = 0; s + 1 < segments; ++s) {
    const Vec3& wp = path[s + 1].position;
    for (int axis = 0; axis < 3; ++axis) {
      const int v = idx(s, kCp - 1, axis);
      qp.P(v, v) += 2.0 * cfg.tracking_weight;
      qp.q(v) += -2.0 * cfg.tracking_weight * wp[axis];
    }
  }

  // Equalities: start state, C0/C1/C2 junctions, final position. The final
  // velocity stays free: plans are re-issued every replan period and the
  // clamped evaluation holds the endpoint if no successor plan arrives.
  const int eq_rows = 3 + 3 + (segments - 1) * 9 + 3;
  qp.A_eq = Eigen::MatrixXd::Zero(eq_rows, n);
  qp.b_eq = Eigen::VectorXd::Zero(eq_rows);
  int row = 0;
  for (int axis = 0; axis < 3; ++axis) {  // start position
    qp.A_eq(row, idx(0, 0, axis)) = 1.0;
    qp.b_eq(row++) = path[0].position[axis];
  }
  for (int axis = 0; axis < 3; ++axis) {  // start velocity
    const double c = 5.0 / durations[0];
    qp.A_eq(row, idx(0, 1, axis)) = c;
    qp.A_eq(row, idx(0, 0, axis)) = -c;
    qp.b_eq(row++) = start_velocity[axis];
  }
  for (int s = 0; s + 1 < segments; ++s) {
    const double ca = 5.0 / durations[s];
    const double cb = 5.0 / durations[s + 1];
    const double da = 20.0 / (durations[s] * durations[s]);
    const double db = 20.0 / (durations[s + 1] * durations[s + 1]);
    for (int axis = 0; axis < 3; ++axis) {
      qp.A_eq(row, idx(s, 5, axis)) = 1.0;
      qp.A_eq(row, idx(s + 1, 0, axis)) = -1.0;
      ++row;
      qp.A_eq(row, idx(s, 5, axis)) = ca;
      qp.A_eq(row, idx(s, 4, axis)) = -ca;
      qp.A_eq(row, idx(s + 1, 1, axis)) = -cb;
      qp.A_eq(row, idx(s + 1, 0, axis)) = cb;
      ++row;
      qp.A_eq(row, idx(s, 5, axis)) = da;
      qp.A_eq(row, idx(s, 4, axis)) = -2.0 * da;
      qp.A_eq(row, idx(s, 3, axis)) = da;
      qp.A_eq(row, idx(s + 1, 2, axis)) = -db;
      qp.A_eq(row, idx(s + 1, 1, axis)) = 2.0 * db;
      qp.A_eq(row, idx(s + 1, 0, axis)) = -db;
      ++row;
    }
  }
  for (int axis = 0; axis < 3; ++axis) {  // final position
    qp.A_eq(row, idx(segments - 1, 5, axis)) = 1.0;
    qp.b_eq(row++) = path[segments].position[axis];
  }

  // Inequalities: per-segment corridors, respected hyperplanes, per-axis
  // velocity / acceleration control-point limits.
  const double corridor_pad = std::max(cfg.search_cell - cfg.robot_radius, 0.05);
  std::vector<Eigen::VectorXd> ineq_rows_a;
  std::vector<double> ineq_b;
  auto add_ineq = [&](const Eigen::VectorXd& a, double b) {
    ineq_rows_a.push_back(a);
    ineq_b.push_back(b);
  };

  for (int s = 0; s < segments; ++s) {
    AxisAlignedBox corridor{
        path[s].position.cwiseMin(path[s + 1].position),
        path[s].position.cwiseMax(path[s + 1].position)};
    corridor = corridor.inflated(corridor_pad);
    for (int cp = 0; cp < kCp; ++cp)
      for (int axis = 0; axis < 3; ++axis) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        a(idx(s, cp, axis)) = 1.0;
        add_ineq(a, corridor.max[axis]);
        a(idx(s, cp, axis)) = -1.0;
        add_ineq(a, -corridor.min[axis]);
      }
    for (const Hyperplane& h : respected_planes) {
      for (int cp = 0; cp < kCp; ++cp) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (int axis = 0; axis < 3; ++axis) {
          a(idx(s, cp, axis)) = h.normal[axis];
        }
        add_ineq(a, h.offset - cfg.robot_radius);
      }
    }
    const double cv = 5.0 / durations[s];
    for (int i = 0; i < 5; ++i) {
      if (s == 0 && i == 0) continue;  // start velocity fixed by equality
      for (int axis = 0; axis < 3; ++axis) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        a(idx(s, i + 1, axis)) = cv;
        a(idx(s, i, axis)) = -cv;
        add_ineq(a, cfg.v_ref);
        a(idx(s, i + 1, axis)) = -cv;
        a(idx(s, i, axis)) = cv;
        add_ineq(a, cfg.v_ref);
      }
    }
    const double cacc = 20.0 / (durations[s] * durations[s]);
    for (int i = 0; i < 4; ++i) {
      for (int axis = 0; axis < 3; ++axis) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        a(idx(s, i, axis)) = cacc;
        a(idx(s, i + 1, axis)) = -2.0 * cacc;
        a(idx(s, i + 2, axis)) = cacc;
        add_ineq(a, cfg.a_ref);
        a *= -1.0;
        add_ineq(a, cfg.a_ref);
      }
    }
  }

  qp.A_ineq = Eigen::MatrixXd::Zero(int(ineq_rows_a.size()), n);
  qp.b_ineq = Eigen::VectorXd::Zero(int(ineq_b.size()));
  for (size_t i = 0; i < ineq_rows_a.size(); ++i) {
    qp.A_ineq.row(int(i)) = ineq_rows_a[i].transpose();
    qp.b_ineq(int(i)) = ineq_b[i];
  }

  const QpSolution sol = solve_qp(qp);
  if (sol.status != QpStatus::kOptimal) return std::nullopt;

  std::vector<BezierPiece> pieces(segments);
  for (int s = 0; s < segments; ++s) {
    pieces[s].duration = durations[s];
    pieces[s].control_points.resize(kCp);
    for (int cp = 0; cp < kCp; ++cp)
      for (int axis = 0; axis < 3; ++axis) {
        pieces[s].control_points[cp][axis] = sol.x(idx(s, cp, axis));
      }
  }
  return PiecewiseTrajectory(std::move(pieces), path[0].time);
}

}  // namespace mrnav
