#include "mrnav/sh.hpp"

#include <algorithm>
#include <cmath>

namespace mrnav {

Vec3 pd_desired_acceleration(const TrajectorySample& ref,
                             const RobotState& state, const ShConfig& cfg) {
  const Vec3 a = ref.acceleration + cfg.kp * (ref.position - state.position) +
                 cfg.kd * (ref.velocity - state.velocity);
  return clamp_norm(a, cfg.a_max);
}

std::vector<SbcNeighbor> sbc_neighbors(const RobotState& ego,
                                       std::span<const RobotState> teammates,
                                       std::span<const DynamicObstacle> obstacles,
                                       const VoxelMap& static_map,
                                       const ShConfig& cfg) {
  std::vector<SbcNeighbor> out;
  for (const RobotState& mate : teammates) {
    if (mate.id == ego.id) continue;
    if ((mate.position - ego.position).norm() > cfg.activation) continue;
    out.push_back({mate.position, mate.velocity, 0.5 * mate.shape.diagonal(),
                   0.5, {EntityKind::kRobot, mate.id}});
  }
  for (const DynamicObstacle& obs : obstacles) {
    if ((obs.position - ego.position).norm() > cfg.activation) continue;
    out.push_back({obs.position, obs.velocity, 0.5 * obs.shape.diagonal(), 1.0,
                   {EntityKind::kObstacle, obs.id}});
  }
  // Static cells enter as zero-radius closest points so narrow gaps between
  // obstacles stay passable.
  const AxisAlignedBox probe = AxisAlignedBox::from_center_half_extents(
      ego.position, Vec3::Constant(cfg.static_activation));
  std::vector<std::pair<double, Vec3>> points;
  for (const AxisAlignedBox& cell : static_map.query(probe)) {
    const Vec3 cp = cell.closest_point(ego.position);
    points.emplace_back((cp - ego.position).norm(), cp);
  }
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const int count =
      std::min<int>(cfg.max_static_entities, int(points.size()));
  for (int i = 0; i < count; ++i) {
    out.push_back(
        {points[i].second, Vec3::Zero(), 0.0, 1.0, {EntityKind::kStatic, i}});
  }
  // Arena faces keep robots inside the flight volume.
  const AxisAlignedBox& arena = static_map.bounds();
  if (arena.valid() && (arena.max - arena.min).norm() > 0.0) {
    for (int axis = 0; axis < 3; ++axis) {
      for (int side = 0; side < 2; ++side) {
        Vec3 p = ego.position;
        p[axis] = side == 0 ? arena.min[axis] : arena.max[axis];
        if (std::abs(p[axis] - ego.position[axis]) > cfg.static_activation) {
          continue;
        }
        out.push_back({p, Vec3::Zero(), 0.0, 1.0,
                       {EntityKind::kStatic, 100 + 2 * axis + side}});
      }
    }
  }
  return out;
}

SbcResult sbc_filter(const RobotState& ego, const Vec3& desired_accel,
                     std::span<const SbcNeighbor> neighbors,
                     const ShConfig& cfg) {
  SbcResult result;
  const double alpha = 0.5 * cfg.a_max;

  for (const SbcNeighbor& nb : neighbors) {
    const Vec3 dp = ego.position - nb.position;
    const Vec3 dv = ego.velocity - nb.velocity;
    const double dist = dp.norm();
    if (dist < 1e-9) continue;  // coincident centers: no usable direction
    const Vec3 dir = dp / dist;
    // kDiscreteMargin covers one control period of relative motion: the
    // certificate is continuous-time, and a fast tangential pass can overshoot
    // the boundary by up to v_rel * dt between filter updates.
    constexpr double kDiscreteMargin = 0.02;
    const double safe =
        cfg.robot_radius + nb.radius + cfg.clearance + kDiscreteMargin;
    // While the margin is intact the exact (singular) barrier keeps forward
    // invariance. Once breached the certificate is void and the diverging
    // 2*alpha*closing/root term would lock the QP infeasible, so floor the
    // gap there to keep the filter solvable and able to steer back out.
    const double gap = dist > safe ? (dist - safe) : 1e-4;
    const double root = std::sqrt(4.0 * alpha * gap);
    const double closing = dir.dot(dv);
    const double h = root + closing;
    const double tangential = dv.squaredNorm() - closing * closing;
    const double bound =
        nb.responsibility * (cfg.gamma * h * h * h + tangential / dist +
                             2.0 * alpha * closing / root);
    result.constraints.push_back({-dir, bound, h, nb.source});
  }

  if (result.constraints.empty()) {
    result.accel = desired_accel;
    return result;
  }

  QpProblem qp;
  qp.P = 2.0 * Eigen::Matrix3d::Identity();
  qp.q = -2.0 * desired_accel;
  qp.A_ineq.resize(int(result.constraints.size()), 3);
  qp.b_ineq.resize(int(result.constraints.size()));
  for (size_t i = 0; i < result.constraints.size(); ++i) {
    qp.A_ineq.row(int(i)) = result.constraints[i].normal.transpose();
    qp.b_ineq(int(i)) = result.constraints[i].bound;
  }

  const QpSolution sol = solve_qp(qp);
  if (sol.status == QpStatus::kOptimal) {
    result.accel = clamp_norm(Vec3(sol.x), cfg.a_max);
    // a solution beyond the actuation limit cannot actually satisfy the
    // certificate once clamped; report it as a (best-effort) fallback
    if (Vec3(sol.x).norm() > cfg.a_max + 1e-9) result.used_fallback = true;
    return result;
  }

  // Infeasible constraint set: brake as hard as possible. At rest braking is
  // vacuous and would pin the robot in the infeasible pocket forever, so push
  // away from the entities whose constraints reject zero acceleration.
  result.used_fallback = true;
  // The slow-speed band is handled by the escape push rather than the brake:
  // braking every time the push gains a little momentum would pin the robot
  // in a persistently infeasible pocket while traffic closes in.
  const double speed = ego.velocity.norm();
  if (speed > 0.3) {
    result.accel = -cfg.a_max * ego.velocity / speed;
  } else {
    Vec3 away = Vec3::Zero();
    for (const SbcConstraint& c : result.constraints) {
      if (c.bound < 0.0) away -= c.normal;
    }
    result.accel = away.norm() > 1e-9 ? Vec3(cfg.a_max * away.normalized())
                                      : Vec3::Zero();
  }
  return result;
}

}  // namespace mrnav
