#include "mrnav/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mrnav {

MetricsReport compute_metrics(const ExperimentLog& log) {
  MetricsReport r;
  r.robot_count = int(log.robot_positions.size());
  r.task_count = int(log.tasks.size());
  r.collision_event_count = int(log.collisions.size());

  // Deadlock: active unreached goal at the end and (near-)zero displacement
  // over the final window.
  for (int i = 0; i < r.robot_count; ++i) {
    if (i >= int(log.active_goal_at_end.size()) || !log.active_goal_at_end[i]) {
      continue;
    }
    const auto& samples = log.robot_positions[i];
    if (samples.empty()) continue;
    const int window_samples = std::min<int>(
        int(samples.size()),
        int(std::lround(log.deadlock_window / log.sample_period)) + 1);
    double max_disp = 0.0;
    const Vec3& last = samples.back();
    for (int k = int(samples.size()) - window_samples; k < int(samples.size());
         ++k) {
      max_disp = std::max(max_disp, (samples[size_t(k)] - last).norm());
    }
    if (max_disp < log.deadlock_displacement) ++r.deadlocked_robots;
  }

  // Attribute collision events to the task active on that robot at that time.
  for (const TaskRecord& task : log.tasks) {
    const double t0 = task.issue_time;
    const double t1 = task.completion_time.value_or(log.duration);
    bool collided = false;
    for (const CollisionEvent& c : log.collisions) {
      if (c.a.kind == EntityKind::kRobot && c.a.id == task.robot_id &&
          c.time >= t0 && c.time <= t1) {
        collided = true;
        break;
      }
    }
    if (collided) {
      ++r.collided_tasks;
    } else if (task.completion_time) {
      ++r.completed_clean_tasks;
      r.avg_nav_duration += *task.completion_time - task.issue_time;
    }
  }
  if (r.completed_clean_tasks > 0) {
    r.avg_nav_duration /= r.completed_clean_tasks;
  }
  if (r.robot_count > 0) {
    r.deadlock_rate = double(r.deadlocked_robots) / r.robot_count;
  }
  if (r.task_count > 0) {
    r.collision_rate = double(r.collided_tasks) / r.task_count;
    r.completion_rate = double(r.completed_clean_tasks) / r.task_count;
  }
  return r;
}

}  // namespace mrnav
