#pragma once

#include <random>
#include <string>
#include <vector>

#include "mrnav/sim.hpp"
#include "mrnav/voxel_map.hpp"

namespace mrnav {

enum class EnvironmentKind { kForest, kMaze };

struct ModuleCombination {
  bool lh{true};
  bool mh{true};
  bool sh{true};

  bool any() const { return lh || mh || sh; }
  std::string label() const;
  static ModuleCombination parse(const std::string& text);  // e.g. "LH+MH+SH"
};

struct ScenarioConfig {
  EnvironmentKind environment{EnvironmentKind::kForest};
  AxisAlignedBox arena{{-13.0, -13.0, 0.0}, {13.0, 13.0, 3.5}};
  int pillar_count{25};
  double pillar_side_min{0.4};
  double pillar_side_max{0.8};
  double pillar_spacing{2.2};  // center spacing; never below the 1.5 m floor
  int dynamic_obstacle_count{0};
  int robot_count{4};
  double robot_radius{0.3};
  ModuleCombination modules;
  double duration{120.0};
  uint64_t seed{0};
  double drop_probability{0.0};
  double delay_low{0.0};
  double delay_high{0.0};

  void validate() const;  // throws std::invalid_argument
};

// Uniformly spreads robot start positions along the arena mid-height ring.
std::vector<RobotState> default_robot_starts(const ScenarioConfig& cfg);

// Moves any start that intersects the static map (with margin) to the nearest
// free position on a coarse search pattern. Throws when none can be found.
void adjust_starts_to_free(std::vector<RobotState>& robots,
                           const VoxelMap& static_map, double margin = 0.2);

// Axis-aligned full-height box pillars at rejection-sampled positions with a
// minimum center spacing (>= 1.5 m) and an optional keepout list. Throws
// std::runtime_error after 10^4 consecutive rejections.
VoxelMap generate_forest(const AxisAlignedBox& bounds, int pillar_count,
                         double side_min, double side_max, std::mt19937_64& rng,
                         double min_spacing = 1.5,
                         std::span<const Vec3> keepout = {},
                         double keepout_radius = 1.5);

// Wall layout with two U-shaped pockets opening toward the arena interior
// plus two center wall segments; pocket placement is jittered by the rng.
// Degenerate bounds (too small for the template) fall back to a single wall.
VoxelMap generate_maze(const AxisAlignedBox& bounds, std::mt19937_64& rng);

// Cubes with diagonal U[1.2, 1.6] m rotating about the world z-axis through
// the origin at a per-obstacle constant speed U[0.25, 0.35] m/s; positions
// uniform in the arena away from the keepout points.
std::vector<DynamicObstacle> generate_dynamic_obstacles(
    int count, const AxisAlignedBox& bounds, std::mt19937_64& rng,
    std::span<const Vec3> keepout = {}, double keepout_radius = 2.0);

// Movement field of the rotating obstacles: s * (-y, x, 0) / ||(x, y)||,
// zero on the rotation axis.
Vec3 rotation_field(const Vec3& p, double speed);

// Candidate models the robots reason over: the nominal rotating motion and a
// stationary model.
std::vector<BehaviorModel> candidate_behavior_models(double nominal_speed = 0.3);

// True iff every free cell of a coarse occupancy rasterization is reachable
// from every other (used as a generation-time postcondition).
bool free_space_connected(const VoxelMap& map, const AxisAlignedBox& bounds,
                          double cell = 0.5);

}  // namespace mrnav
