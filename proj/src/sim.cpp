#include "mrnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrnav {

BehaviorModel BehaviorModel::identity_interaction(
    std::function<Vec3(const Vec3&)> movement, double speed_cap) {
  BehaviorModel b;
  b.movement = std::move(movement);
  b.interaction = [](const Vec3&, const Vec3& desired, const Vec3&,
                     const Vec3&) { return desired; };
  b.speed_cap = speed_cap;
  return b;
}

Vec3 BehaviorModel::predicted_velocity(const Vec3& pos) const {
  return clamp_norm(movement(pos), speed_cap);
}

std::string EntityRef::label() const {
  switch (kind) {
    case EntityKind::kRobot:
      return "robot" + std::to_string(id);
    case EntityKind::kObstacle:
      return "obstacle" + std::to_string(id);
    case EntityKind::kStatic:
      return "static";
  }
  return "?";
}

void propagate_dynamic_obstacle(DynamicObstacle& obs,
                                std::span<const RobotState> egos, double dt) {
  const Vec3 desired = clamp_norm(obs.behavior.movement(obs.position),
                                  obs.behavior.speed_cap);
  Vec3 ego_pos = Vec3::Zero();
  Vec3 ego_vel = Vec3::Zero();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : egos) {
    const double d = (r.position - obs.position).squaredNorm();
    if (d < best) {
      best = d;
      ego_pos = r.position;
      ego_vel = r.velocity;
    }
  }
  obs.velocity = clamp_norm(
      obs.behavior.interaction(obs.position, desired, ego_pos, ego_vel),
      obs.behavior.speed_cap);
  obs.position += obs.velocity * dt;
}

World::World(WorldConfig cfg, std::vector<RobotState> robots,
             std::vector<DynamicObstacle> obstacles, VoxelMap static_map)
    : cfg_(cfg),
      robots_(std::move(robots)),
      obstacles_(std::move(obstacles)),
      static_map_(std::move(static_map)),
      sense_rng_(cfg.seed ^ 0x9e3779b97f4a7c15ull) {
  applied_.assign(robots_.size(), Vec3::Zero());
  detect_collisions();
  last_new_contacts_.clear();
  collisions_.clear();
}

void World::step(std::span<const Vec3> commanded_accels) {
  const double dt = cfg_.dt_physics;
  for (size_t i = 0; i < robots_.size(); ++i) {
    const Vec3& a_cmd = commanded_accels[i];
    if (!a_cmd.allFinite()) {
      throw std::runtime_error("non-finite acceleration command for robot " +
                               std::to_string(robots_[i].id));
    }
    const Vec3 a = clamp_norm(a_cmd, cfg_.a_max);
    applied_[i] = a;
    robots_[i].velocity = clamp_norm(robots_[i].velocity + a * dt, cfg_.v_max);
    robots_[i].position += robots_[i].velocity * dt;
  }
  for (auto& obs : obstacles_) {
    propagate_dynamic_obstacle(obs, robots_, dt);
  }
  time_ += dt;
  detect_collisions();
}

void World::detect_collisions() {
  // contact key: (robot index, (entity kind, entity id)); static collapses to
  // one entity per robot so a slide along a wall is one episode
  std::vector<std::pair<int, std::pair<int, int>>> current;
  last_new_contacts_.clear();
  for (size_t i = 0; i < robots_.size(); ++i) {
    const AxisAlignedBox bi = robots_[i].world_box();
    for (size_t j = i + 1; j < robots_.size(); ++j) {
      if (boxes_overlap(bi, robots_[j].world_box())) {
        current.push_back({int(i), {0, int(j)}});
      }
    }
    for (const auto& obs : obstacles_) {
      if (boxes_overlap(bi, obs.world_box())) {
        current.push_back({int(i), {1, obs.id}});
      }
    }
    if (static_map_.any_occupied(bi)) {
      current.push_back({int(i), {2, 0}});
    }
  }
  for (const auto& c : current) {
    if (std::find(active_contacts_.begin(), active_contacts_.end(), c) ==
        active_contacts_.end()) {
      CollisionEvent ev;
      ev.time = time_;
      ev.a = {EntityKind::kRobot, robots_[c.first].id};
      switch (c.second.first) {
        case 0:
          ev.b = {EntityKind::kRobot, robots_[c.second.second].id};
          break;
        case 1:
          ev.b = {EntityKind::kObstacle, c.second.second};
          break;
        default:
          ev.b = {EntityKind::kStatic, 0};
      }
      collisions_.push_back(ev);
      last_new_contacts_.push_back(ev);
    }
  }
  active_contacts_ = std::move(current);
}

RobotState World::sensed_robot_state(int id) {
  RobotState s = robots_.at(id);
  if (cfg_.sensing_noise_pos > 0.0 || cfg_.sensing_noise_vel > 0.0) {
    std::normal_distribution<double> np(0.0, cfg_.sensing_noise_pos);
    std::normal_distribution<double> nv(0.0, cfg_.sensing_noise_vel);
    for (int a = 0; a < 3; ++a) {
      if (cfg_.sensing_noise_pos > 0.0) s.position[a] += np(sense_rng_);
      if (cfg_.sensing_noise_vel > 0.0) s.velocity[a] += nv(sense_rng_);
    }
  }
  return s;
}

}  // namespace mrnav
