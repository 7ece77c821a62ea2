#pragma once

#include <vector>

#include "mrnav/lh.hpp"
#include "mrnav/sim.hpp"

namespace mrnav {

struct MetricsReport {
  int robot_count{0};
  int deadlocked_robots{0};
  int task_count{0};
  int collided_tasks{0};
  int completed_clean_tasks{0};
  int collision_event_count{0};

  double deadlock_rate{0.0};    // deadlocked robots / robots
  double collision_rate{0.0};   // collided tasks / tasks
  double completion_rate{0.0};  // completed no-collision tasks / tasks
  double avg_nav_duration{0.0};  // over completed no-collision tasks; 0 if none
};

struct ExperimentLog {
  std::vector<TaskRecord> tasks;
  std::vector<CollisionEvent> collisions;
  double sample_period{0.1};
  std::vector<std::vector<Vec3>> robot_positions;  // [robot][sample index]
  std::vector<bool> active_goal_at_end;            // per robot
  double duration{0.0};
  double deadlock_window{30.0};
  double deadlock_displacement{0.1};
};

// A robot is deadlocked iff it still has an unreached goal at the end and its
// displacement over the final window stays below the threshold. A task counts
// as collided iff any collision event involving its robot falls inside the
// task's active interval.
MetricsReport compute_metrics(const ExperimentLog& log);

}  // namespace mrnav
