#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mrnav/bezier.hpp"
#include "mrnav/geometry.hpp"
#include "mrnav/voxel_map.hpp"

namespace mrnav {

struct RobotState {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  AxisAlignedBox shape;  // body frame, centered at the origin
  int id{0};

  AxisAlignedBox world_box() const { return shape.translated(position); }
};

// Movement model M: position -> desired velocity.
// Interaction model I: (obstacle position, desired velocity, ego position,
// ego velocity) -> obstacle velocity.
struct BehaviorModel {
  std::function<Vec3(const Vec3&)> movement;
  std::function<Vec3(const Vec3&, const Vec3&, const Vec3&, const Vec3&)>
      interaction;
  double speed_cap{1.0};

  static BehaviorModel identity_interaction(
      std::function<Vec3(const Vec3&)> movement, double speed_cap);

  Vec3 predicted_velocity(const Vec3& pos) const;
};

struct DynamicObstacle {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  AxisAlignedBox shape;  // body frame, centered at the origin
  BehaviorModel behavior;  // ground truth, hidden from the robots
  int id{0};

  AxisAlignedBox world_box() const { return shape.translated(position); }
};

struct WorldConfig {
  double dt_physics{0.005};
  double a_max{5.0};
  double v_max{1.5};
  double drop_probability{0.0};
  double delay_low{0.0};
  double delay_high{0.0};
  double sensing_noise_pos{0.0};  // stddev, 0 disables
  double sensing_noise_vel{0.0};
  uint64_t seed{0};
};

enum class EntityKind { kRobot, kObstacle, kStatic };

struct EntityRef {
  EntityKind kind{EntityKind::kRobot};
  int id{0};
  bool operator==(const EntityRef&) const = default;
  std::string label() const;
};

struct CollisionEvent {
  double time{0.0};
  EntityRef a;  // always a robot
  EntityRef b;
};

// Advances the obstacle by dt: velocity from the interaction model applied to
// the movement model's desired velocity and the nearest ego robot.
void propagate_dynamic_obstacle(DynamicObstacle& obs,
                                std::span<const RobotState> egos, double dt);

class World {
 public:
  World() = default;
  World(WorldConfig cfg, std::vector<RobotState> robots,
        std::vector<DynamicObstacle> obstacles, VoxelMap static_map);

  double time() const { return time_; }
  const WorldConfig& config() const { return cfg_; }
  const std::vector<RobotState>& robots() const { return robots_; }
  const std::vector<DynamicObstacle>& obstacles() const { return obstacles_; }
  const VoxelMap& static_map() const { return static_map_; }
  const std::vector<CollisionEvent>& collisions() const { return collisions_; }
  const std::vector<Vec3>& applied_accelerations() const { return applied_; }

  // Semi-implicit Euler step with per-robot acceleration commands.
  // Accelerations are norm-clamped to a_max, velocities to v_max.
  // Throws std::runtime_error naming the robot on non-finite input.
  void step(std::span<const Vec3> commanded_accels);

  // New contact episodes that began during the most recent step.
  const std::vector<CollisionEvent>& last_step_collisions() const {
    return last_new_contacts_;
  }

  RobotState sensed_robot_state(int id);
  std::mt19937_64& sensing_rng() { return sense_rng_; }

 private:
  void detect_collisions();

  WorldConfig cfg_;
  double time_{0.0};
  std::vector<RobotState> robots_;
  std::vector<DynamicObstacle> obstacles_;
  VoxelMap static_map_;
  std::vector<CollisionEvent> collisions_;
  std::vector<CollisionEvent> last_new_contacts_;
  std::vector<std::pair<int, std::pair<int, int>>> active_contacts_;
  std::vector<Vec3> applied_;
  std::mt19937_64 sense_rng_{12345};
};

inline Vec3 clamp_norm(const Vec3& v, double max_norm) {
  const double n = v.norm();
  if (n <= max_norm || n == 0.0) return v;
  return v * (max_norm / n);
}

}  // namespace mrnav
