#include "mrnav/mh.hpp"

namespace mrnav {

MhPlanner::MhPlanner(int robot_id, MhConfig cfg,
                     std::vector<BehaviorModel> candidate_models)
    : robot_id_(robot_id),
      cfg_(cfg),
      candidates_(std::move(candidate_models)) {}

void MhPlanner::observe_obstacle(const SensedObstacle& obs, double dt) {
  auto it = beliefs_.find(obs.id);
  if (it == beliefs_.end()) {
    it = beliefs_.emplace(obs.id, BehaviorBelief::uniform(int(candidates_.size())))
             .first;
  }
  update_behavior_belief(it->second, candidates_, obs.position, obs.velocity,
                         dt, cfg_.sigma_v);
}

const BehaviorBelief& MhPlanner::belief_for(int obstacle_id) {
  auto it = beliefs_.find(obstacle_id);
  if (it == beliefs_.end()) {
    it = beliefs_
             .emplace(obstacle_id,
                      BehaviorBelief::uniform(int(candidates_.size())))
             .first;
  }
  return it->second;
}

void MhPlanner::append_pair_dsht(const RobotState& ego,
                                 const RobotState& teammate, double now) {
  dsht_.append(teammate.id, ego.world_box(), teammate.world_box(), now);
}

void MhPlanner::on_plan_success(int teammate, double plan_stamp) {
  dsht_.prune(teammate, plan_stamp);
}

bool MhPlanner::replan(const RobotState& ego,
                       const PiecewiseTrajectory* desired,
                       const VoxelMap& static_map,
                       std::span<const SensedObstacle> obstacles, double now) {
  Vec3 goal;
  double goal_time;
  if (desired != nullptr) {
    std::tie(goal, goal_time) = select_goal(*desired, ego, cfg_, now);
  } else {
    // no assignment yet: hold position
    goal = ego.position;
    goal_time = now + cfg_.horizon;
  }

  std::vector<BehaviorBelief> beliefs;
  beliefs.reserve(obstacles.size());
  for (const auto& obs : obstacles) beliefs.push_back(belief_for(obs.id));

  const auto search = spatiotemporal_search(ego, goal, goal_time, static_map,
                                            obstacles, beliefs, candidates_,
                                            dsht_, cfg_, now);
  if (!search) {
    ++plan_failures_;
    return false;
  }
  const auto planes =
      respected_planes_for_path(dsht_, search->path, cfg_.robot_radius);
  auto spline = optimize_spline(search->path, ego.velocity, planes, cfg_);
  if (!spline) {
    ++plan_failures_;
    return false;
  }
  reference_ = std::move(*spline);
  last_plan_stamp_ = now;
  ++plan_successes_;
  return true;
}

TrajectorySample MhPlanner::reference_sample(
    double t, const Vec3& fallback_position) const {
  if (!reference_) {
    TrajectorySample s;
    s.position = fallback_position;
    return s;
  }
  return reference_->evaluate_clamped(t);
}

}  // namespace mrnav
