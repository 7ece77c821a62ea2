#pragma once

#include <optional>
#include <random>
#include <vector>

#include "mrnav/bezier.hpp"
#include "mrnav/bus.hpp"
#include "mrnav/voxel_map.hpp"

namespace mrnav {

struct GridSpec {
  double cell_size{0.5};
  AxisAlignedBox bounds;
  double inflation{0.3};  // robot bounding-sphere radius

  Eigen::Vector3i dims() const;
  Vec3 cell_center(const Eigen::Vector3i& c) const;
  Eigen::Vector3i cell_of(const Vec3& p) const;
  bool in_grid(const Eigen::Vector3i& c) const;
};

// True iff the inflated robot box centered at the cell center is free of
// prior static obstacles.
bool cell_free(const VoxelMap& prior_map, const GridSpec& grid,
               const Eigen::Vector3i& cell);

// Uniformly sampled free cell center. Throws std::runtime_error when no free
// cell exists.
Vec3 sample_goal(const VoxelMap& prior_map, const GridSpec& grid,
                 std::mt19937_64& rng);

// 26-connected shortest grid path with Euclidean edge costs, endpoints
// replaced by the exact start/goal. Throws std::runtime_error when the goal
// is unreachable.
std::vector<Vec3> plan_grid_path(const Vec3& start, const Vec3& goal,
                                 const VoxelMap& prior_map,
                                 const GridSpec& grid);

// One degree-1 piece per segment; duration = length / nominal_speed.
// A zero-length path degenerates to a 1 s hold piece.
PiecewiseTrajectory path_to_trajectory(const std::vector<Vec3>& waypoints,
                                       double nominal_speed,
                                       double issue_time);

struct Task {
  int robot_id{0};
  int task_id{0};
  Vec3 goal{Vec3::Zero()};
  double issue_time{0.0};
  PiecewiseTrajectory desired;
};

struct TaskRecord {
  int robot_id{0};
  int task_id{0};
  Vec3 goal{Vec3::Zero()};
  double issue_time{0.0};
  std::optional<double> completion_time;
};

struct LhConfig {
  GridSpec grid;
  double nominal_speed{1.3};
  double goal_tolerance{0.2};
  double goal_speed_max{0.1};
  double tick_period{1.0};  // task checks and retransmission
  int node_id{255};
  double goal_separation{2.0};  // min distance between concurrent goals
  // Skip grid planning and emit straight start->goal desired paths (used when
  // the long-horizon planner is ablated; goals are still sampled from free
  // space so tasks remain well defined).
  bool straight_line_paths{false};
};

// Centralized long-horizon module: random goal generation and A* desired
// trajectories against the prior static map only. Runs on-demand at a slow
// tick; the current task message is re-broadcast every tick so a dropped
// assignment heals.
class LhPlanner {
 public:
  LhPlanner(LhConfig cfg, VoxelMap prior_map, int robot_count, uint64_t seed);

  // `states` are the centrally tracked robot states.
  void tick(std::span<const RobotState> states, Bus& bus, double now);

  const std::vector<TaskRecord>& task_log() const { return log_; }
  const std::optional<Task>& current_task(int robot) const {
    return current_[robot];
  }
  bool task_reached(const Task& task, const RobotState& s) const;

 private:
  void issue_task(int robot, const Vec3& from, double now);

  LhConfig cfg_;
  VoxelMap prior_map_;
  std::vector<Eigen::Vector3i> free_cells_;
  std::vector<std::optional<Task>> current_;
  std::vector<TaskRecord> log_;
  std::mt19937_64 rng_;
  std::mt19937_64 bus_rng_;
  int next_task_id_{0};
};

// One "minx miny minz maxx maxy maxz" box per line.
VoxelMap load_prior_map_file(const std::string& path, double resolution,
                             const AxisAlignedBox& bounds);

}  // namespace mrnav
