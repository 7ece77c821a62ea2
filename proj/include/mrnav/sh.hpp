#pragma once

#include <vector>

#include "mrnav/bezier.hpp"
#include "mrnav/qp.hpp"
#include "mrnav/sim.hpp"
#include "mrnav/voxel_map.hpp"

namespace mrnav {

struct ShConfig {
  double kp{8.0};
  double kd{5.0};
  double a_max{5.0};
  double robot_radius{0.3};
  double clearance{0.1};        // extra margin added to the safety distance
  double activation{3.0};         // consider moving entities within this range
  double static_activation{3.0};  // consider static cells within this range
  int max_static_entities{8};
  double gamma{1.0};            // class-K gain on h^3
};

// Reference-tracking PD law with acceleration feed-forward; the result is
// norm-clamped to a_max.
Vec3 pd_desired_acceleration(const TrajectorySample& ref,
                             const RobotState& state, const ShConfig& cfg);

// One barrier constraint row  n^T a <= b  on the ego acceleration.
struct SbcConstraint {
  Vec3 normal{Vec3::Zero()};
  double bound{0.0};
  double h{0.0};  // barrier value; >= 0 means currently safe
  EntityRef source;
};

struct SbcNeighbor {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  double radius{0.0};
  double responsibility{1.0};  // 1/2 for teammates (shared), 1 otherwise
  EntityRef source;
};

struct SbcResult {
  Vec3 accel{Vec3::Zero()};
  bool used_fallback{false};
  std::vector<SbcConstraint> constraints;
};

// Builds the neighbor list for one robot: teammates (shared responsibility),
// dynamic obstacles, and the closest points of nearby occupied static cells.
std::vector<SbcNeighbor> sbc_neighbors(const RobotState& ego,
                                       std::span<const RobotState> teammates,
                                       std::span<const DynamicObstacle> obstacles,
                                       const VoxelMap& static_map,
                                       const ShConfig& cfg);

// Safety-barrier filter: minimally perturbs `desired_accel` subject to one
// double-integrator barrier constraint per neighbor. Falls back to maximum
// braking when the constraint set is infeasible.
SbcResult sbc_filter(const RobotState& ego, const Vec3& desired_accel,
                     std::span<const SbcNeighbor> neighbors,
                     const ShConfig& cfg);

}  // namespace mrnav
