#include "mrnav/lh.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace mrnav {

Eigen::Vector3i GridSpec::dims() const {
  const Vec3 span = bounds.max - bounds.min;
  return {std::max(1, int(std::floor(span.x() / cell_size + 1e-9))),
          std::max(1, int(std::floor(span.y() / cell_size + 1e-9))),
          std::max(1, int(std::floor(span.z() / cell_size + 1e-9)))};
}

Vec3 GridSpec::cell_center(const Eigen::Vector3i& c) const {
  return bounds.min + cell_size * (c.cast<double>() + Vec3::Constant(0.5));
}

Eigen::Vector3i GridSpec::cell_of(const Vec3& p) const {
  const Vec3 rel = (p - bounds.min) / cell_size;
  Eigen::Vector3i c(int(std::floor(rel.x())), int(std::floor(rel.y())),
                    int(std::floor(rel.z())));
  const Eigen::Vector3i d = dims();
  for (int a = 0; a < 3; ++a) c[a] = std::clamp(c[a], 0, d[a] - 1);
  return c;
}

bool GridSpec::in_grid(const Eigen::Vector3i& c) const {
  const Eigen::Vector3i d = dims();
  return (c.array() >= 0).all() && (c.array() < d.array()).all();
}

bool cell_free(const VoxelMap& prior_map, const GridSpec& grid,
               const Eigen::Vector3i& cell) {
  // inflate the whole cell, not just its center, so every position inside a
  // free cell is admissible for the robot (matches the mid-horizon probe)
  const Vec3 center = grid.cell_center(cell);
  const AxisAlignedBox robot = AxisAlignedBox::from_center_half_extents(
      center, Vec3::Constant(grid.inflation + 0.5 * grid.cell_size));
  return !prior_map.any_occupied(robot);
}

Vec3 sample_goal(const VoxelMap& prior_map, const GridSpec& grid,
                 std::mt19937_64& rng) {
  const Eigen::Vector3i d = grid.dims();
  std::vector<Eigen::Vector3i> free;
  for (int x = 0; x < d.x(); ++x)
    for (int y = 0; y < d.y(); ++y)
      for (int z = 0; z < d.z(); ++z) {
        const Eigen::Vector3i c(x, y, z);
        if (cell_free(prior_map, grid, c)) free.push_back(c);
      }
  if (free.empty()) throw std::runtime_error("sample_goal: no free cell");
  std::uniform_int_distribution<size_t> pick(0, free.size() - 1);
  return grid.cell_center(free[pick(rng)]);
}

namespace {

struct AStarNode {
  double f;
  double h;
  int idx;
  bool operator>(const AStarNode& o) const {
    return std::tie(f, h, idx) > std::tie(o.f, o.h, o.idx);
  }
};

}  // namespace

std::vector<Vec3> plan_grid_path(const Vec3& start, const Vec3& goal,
                                 const VoxelMap& prior_map,
                                 const GridSpec& grid) {
  const Eigen::Vector3i d = grid.dims();
  const int nx = d.x(), ny = d.y(), nz = d.z();
  const int n = nx * ny * nz;
  auto lin = [&](const Eigen::Vector3i& c) {
    return (c.z() * ny + c.y()) * nx + c.x();
  };
  auto unlin = [&](int i) {
    return Eigen::Vector3i(i % nx, (i / nx) % ny, i / (nx * ny));
  };

  std::vector<uint8_t> blocked(n);
  for (int i = 0; i < n; ++i) {
    blocked[i] = !cell_free(prior_map, grid, unlin(i));
  }

  Eigen::Vector3i sc = grid.cell_of(start);
  const Eigen::Vector3i gc = grid.cell_of(goal);
  if (blocked[lin(sc)]) {
    // the robot can drift into the inflation band; snap to the nearest free cell
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector3i best_c = sc;
    for (int dx = -2; dx <= 2; ++dx)
      for (int dy = -2; dy <= 2; ++dy)
        for (int dz = -2; dz <= 2; ++dz) {
          const Eigen::Vector3i c = sc + Eigen::Vector3i(dx, dy, dz);
          if (!grid.in_grid(c) || blocked[lin(c)]) continue;
          const double dist = (grid.cell_center(c) - start).squaredNorm();
          if (dist < best) {
            best = dist;
            best_c = c;
          }
        }
    if (best == std::numeric_limits<double>::infinity()) {
      throw std::runtime_error("plan_grid_path: start is not in free space");
    }
    sc = best_c;
  }
  if (blocked[lin(gc)]) {
    throw std::runtime_error("plan_grid_path: goal is not in free space");
  }

  const Vec3 goal_center = grid.cell_center(gc);
  auto heuristic = [&](const Eigen::Vector3i& c) {
    return (grid.cell_center(c) - goal_center).norm();
  };

  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::vector<uint8_t> closed(n, 0);
  std::priority_queue<AStarNode, std::vector<AStarNode>, std::greater<>> open;
  g[lin(sc)] = 0.0;
  open.push({heuristic(sc), heuristic(sc), lin(sc)});
  double last_f = -std::numeric_limits<double>::infinity();

  while (!open.empty()) {
    const AStarNode top = open.top();
    open.pop();
    if (closed[top.idx]) continue;
    closed[top.idx] = 1;
    // admissible consistent heuristic: expanded f-values never decrease
    if (top.f < last_f - 1e-9) {
      throw std::logic_error("plan_grid_path: f-value decreased");
    }
    last_f = top.f;
    if (top.idx == lin(gc)) break;
    const Eigen::Vector3i c = unlin(top.idx);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const Eigen::Vector3i nb = c + Eigen::Vector3i(dx, dy, dz);
          if (!grid.in_grid(nb) || blocked[lin(nb)]) continue;
          // diagonal moves with every axis-neighbor blocked are forbidden
          const int axes = std::abs(dx) + std::abs(dy) + std::abs(dz);
          if (axes > 1) {
            bool any_axis_free = false;
            if (dx != 0) {
              const Eigen::Vector3i a = c + Eigen::Vector3i(dx, 0, 0);
              any_axis_free |= grid.in_grid(a) && !blocked[lin(a)];
            }
            if (dy != 0) {
              const Eigen::Vector3i a = c + Eigen::Vector3i(0, dy, 0);
              any_axis_free |= grid.in_grid(a) && !blocked[lin(a)];
            }
            if (dz != 0) {
              const Eigen::Vector3i a = c + Eigen::Vector3i(0, 0, dz);
              any_axis_free |= grid.in_grid(a) && !blocked[lin(a)];
            }
            if (!any_axis_free) continue;
          }
          const double step = grid.cell_size * std::sqrt(double(axes));
          const double ng = g[top.idx] + step;
          const int nidx = lin(nb);
          if (ng < g[nidx] - 1e-12) {
            g[nidx] = ng;
            parent[nidx] = top.idx;
            open.push({ng + heuristic(nb), heuristic(nb), nidx});
          }
        }
  }

  if (!closed[lin(gc)]) {
    throw std::runtime_error("plan_grid_path: goal unreachable");
  }

  std::vector<Vec3> waypoints;
  for (int i = lin(gc); i != -1; i = parent[i]) {
    waypoints.push_back(grid.cell_center(unlin(i)));
  }
  std::reverse(waypoints.begin(), waypoints.end());
  waypoints.front() = start;
  waypoints.back() = goal;
  if (waypoints.size() == 1) waypoints.push_back(goal);
  return waypoints;
}

PiecewiseTrajectory path_to_trajectory(const std::vector<Vec3>& waypoints,
                                       double nominal_speed,
                                       double issue_time) {
  std::vector<BezierPiece> pieces;
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const double len = (waypoints[i + 1] - waypoints[i]).norm();
    if (len <= 1e-12) continue;
    BezierPiece p;
    p.control_points = {waypoints[i], waypoints[i + 1]};
    p.duration = len / nominal_speed;
    pieces.push_back(std::move(p));
  }
  if (pieces.empty()) {
    return hold_trajectory(waypoints.front(), issue_time, 1.0);
  }
  return PiecewiseTrajectory(std::move(pieces), issue_time);
}

LhPlanner::LhPlanner(LhConfig cfg, VoxelMap prior_map, int robot_count,
                     uint64_t seed)
    : cfg_(cfg),
      prior_map_(std::move(prior_map)),
      current_(robot_count),
      rng_(seed),
      bus_rng_(seed ^ 0xabcdef1234567ull) {
  const Eigen::Vector3i d = cfg_.grid.dims();
  for (int x = 0; x < d.x(); ++x)
    for (int y = 0; y < d.y(); ++y)
      for (int z = 0; z < d.z(); ++z) {
        const Eigen::Vector3i c(x, y, z);
        if (cell_free(prior_map_, cfg_.grid, c)) free_cells_.push_back(c);
      }
  if (free_cells_.empty()) {
    throw std::runtime_error("LhPlanner: prior map has no free space");
  }
}

bool LhPlanner::task_reached(const Task& task, const RobotState& s) const {
  return (s.position - task.goal).norm() <= cfg_.goal_tolerance &&
         s.velocity.norm() < cfg_.goal_speed_max;
}

void LhPlanner::issue_task(int robot, const Vec3& from, double now) {
  std::uniform_int_distribution<size_t> pick(0, free_cells_.size() - 1);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Vec3 goal = cfg_.grid.cell_center(free_cells_[pick(rng_)]);
    // keep concurrent goals apart so robots cannot block each other's goal
    // region at the barrier standoff distance
    bool conflict = false;
    for (size_t other = 0; other < current_.size(); ++other) {
      if (int(other) == robot || !current_[other]) continue;
      if ((current_[other]->goal - goal).norm() < cfg_.goal_separation) {
        conflict = true;
        break;
      }
    }
    if (conflict && attempt + 1 < 64) continue;
    std::vector<Vec3> waypoints;
    try {
      if (cfg_.straight_line_paths || prior_map_.empty()) {
        waypoints = {from, goal};
      } else {
        waypoints = plan_grid_path(from, goal, prior_map_, cfg_.grid);
      }
    } catch (const std::runtime_error&) {
      continue;  // unreachable sample; try another goal
    }
    Task task;
    task.robot_id = robot;
    task.task_id = next_task_id_++;
    task.goal = goal;
    task.issue_time = now;
    task.desired = path_to_trajectory(waypoints, cfg_.nominal_speed, now);
    current_[robot] = task;
    log_.push_back({robot, task.task_id, goal, now, std::nullopt});
    return;
  }
  throw std::runtime_error("LhPlanner: could not find a reachable goal");
}

void LhPlanner::tick(std::span<const RobotState> states, Bus& bus,
                     double now) {
  for (size_t i = 0; i < current_.size(); ++i) {
    auto& task = current_[i];
    if (task && task_reached(*task, states[i])) {
      for (auto it = log_.rbegin(); it != log_.rend(); ++it) {
        if (it->task_id == task->task_id) {
          it->completion_time = now;
          break;
        }
      }
      task.reset();
    }
    if (!task) {
      issue_task(int(i), states[i].position, now);
    }
    // re-broadcast the current assignment; dropped copies heal next tick
    DesiredTrajectoryMsg msg;
    msg.robot_id = int(i);
    msg.goal = task->goal;
    msg.issue_time = task->issue_time;
    msg.task_id = task->task_id;
    msg.desired = task->desired;
    bus.send(cfg_.node_id, int(i), msg, now, bus_rng_);
  }
}

VoxelMap load_prior_map_file(const std::string& path, double resolution,
                             const AxisAlignedBox& bounds) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open prior map file: " + path);
  VoxelMap map(resolution, bounds);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Vec3 mn, mx;
    if (ls >> mn.x() >> mn.y() >> mn.z() >> mx.x() >> mx.y() >> mx.z()) {
      map.insert({mn, mx});
    }
  }
  return map;
}

}  // namespace mrnav
