#include "mrnav/mh.hpp"

#include <cmath>
#include <queue>
#include <unordered_map>

namespace mrnav {

std::pair<Vec3, double> select_goal(const PiecewiseTrajectory& desired,
                                    const RobotState& state,
                                    const MhConfig& cfg, double now) {
  const double t_hi = now + cfg.horizon;
  // The walk below is purely geometric: a robot that runs behind the desired
  // schedule (v_ref < nominal speed, detours) must keep following the path
  // shape, not cut straight toward the endpoint once the schedule expires.
  // Walk forward along the desired path from the point nearest the robot,
  // spending the arc length the search can cover within the horizon. This
  // follows the path geometry instead of cutting straight toward points that
  // may lie behind obstacles.
  const int samples = 400;
  const double t0 = desired.start_time();
  const double span = desired.total_duration();
  double best = std::numeric_limits<double>::infinity();
  int nearest = 0;
  std::vector<Vec3> pts(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    const double t = t0 + span * (double(i) / samples);
    pts[size_t(i)] = desired.evaluate_clamped(t).position;
    const double d = (pts[size_t(i)] - state.position).squaredNorm();
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  const double arc_budget =
      cfg.horizon * cfg.search_cell / cfg.primitive_duration;
  double arc = 0.0;
  int pick = nearest;
  while (pick < samples && arc < arc_budget) {
    arc += (pts[size_t(pick + 1)] - pts[size_t(pick)]).norm();
    ++pick;
  }
  return {pts[size_t(pick)], t_hi};
}

namespace {

struct CellKey {
  int x, y, z, step;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  size_t operator()(const CellKey& k) const {
    uint64_t h = 1469598103934665603ull;
    for (int64_t c : {int64_t(k.x), int64_t(k.y), int64_t(k.z),
                      int64_t(k.step)}) {
      h ^= static_cast<uint64_t>(c);
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

struct OpenNode {
  double f;
  double g;
  CellKey key;
  bool operator>(const OpenNode& o) const {
    return std::tie(f, g, key.x, key.y, key.z, key.step) >
           std::tie(o.f, o.g, o.key.x, o.key.y, o.key.z, o.key.step);
  }
};

struct NodeInfo {
  double g{std::numeric_limits<double>::infinity()};
  double collision_cost{0.0};
  double static_cost{0.0};
  CellKey parent{0, 0, 0, -1};
  bool closed{false};
};

}  // namespace

std::vector<Hyperplane> respected_planes_for_path(
    const DshtStore& dsht, std::span<const TimedPosition> path,
    double robot_radius) {
  std::vector<Hyperplane> out;
  for (const Hyperplane& h : dsht.all_planes()) {
    bool violated = false;
    for (const auto& tp : path) {
      if (signed_plane_distance(h, tp.position) > -robot_radius + 1e-9) {
        violated = true;
        break;
      }
    }
    if (!violated) out.push_back(h);
  }
  return out;
}

std::optional<SearchResult> spatiotemporal_search(
    const RobotState& state, const Vec3& goal, double goal_time,
    const VoxelMap& static_map, std::span<const SensedObstacle> obstacles,
    std::span<const BehaviorBelief> beliefs,
    std::span<const BehaviorModel> candidates, const DshtStore& dsht,
    const MhConfig& cfg, double now) {
  const double cell = cfg.search_cell;
  const double dt = cfg.primitive_duration;
  const int max_steps =
      std::clamp(int(std::lround((goal_time - now) / dt)), 2,
                 std::max(2, int(std::lround(cfg.horizon / dt))));

  auto cell_of = [&](const Vec3& p) {
    return Eigen::Vector3i(int(std::floor(p.x() / cell)),
                           int(std::floor(p.y() / cell)),
                           int(std::floor(p.z() / cell)));
  };
  auto center_of = [&](int x, int y, int z) {
    return Vec3((x + 0.5) * cell, (y + 0.5) * cell, (z + 0.5) * cell);
  };

  const Eigen::Vector3i start_cell = cell_of(state.position);
  Eigen::Vector3i goal_cell = cell_of(goal);

  // The goal may sit inside a static obstacle (e.g. a straight desired path
  // through a wall); retarget the free neighbor cell closest to it so the
  // search can still terminate instead of exhausting its budget.
  const AxisAlignedBox& arena = static_map.bounds();
  const bool bounded = arena.valid() && (arena.max - arena.min).norm() > 0.0;
  auto cell_blocked = [&](const Eigen::Vector3i& c) {
    const AxisAlignedBox probe =
        AxisAlignedBox::from_center_half_extents(
            center_of(c.x(), c.y(), c.z()), Vec3::Constant(0.5 * cell))
            .inflated(cfg.robot_radius);
    if (bounded &&
        !(arena.contains(probe.min) && arena.contains(probe.max))) {
      return true;  // cells poking outside the flight volume are off limits
    }
    return static_map.any_occupied(probe);
  };
  bool goal_retargeted = false;
  if (cell_blocked(goal_cell)) {
    goal_retargeted = true;
    double best_d = std::numeric_limits<double>::infinity();
    Eigen::Vector3i best_c = goal_cell;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const Eigen::Vector3i c =
              goal_cell + Eigen::Vector3i(dx, dy, dz);
          if (cell_blocked(c)) continue;
          const double d =
              (center_of(c.x(), c.y(), c.z()) - state.position).norm();
          if (d < best_d) {
            best_d = d;
            best_c = c;
          }
        }
    goal_cell = best_c;
  }

  // Belief-weighted dynamic occupancy per (cell, step), from forward rollout
  // of each candidate model, obstacle boxes inflated by the robot radius.
  std::unordered_map<CellKey, double, CellKeyHash> dyn_cost;
  const double reach =
      max_steps * cell * std::sqrt(3.0) + 2.0;  // ignore unreachable obstacles
  for (size_t oi = 0; oi < obstacles.size(); ++oi) {
    const auto& obs = obstacles[oi];
    if ((obs.position - state.position).norm() >
        reach + obs.shape.diagonal() + max_steps * dt * 1.0) {
      continue;
    }
    for (int k = 0; k < int(candidates.size()); ++k) {
      const double prob = beliefs[oi].probabilities[k];
      if (prob < 1e-3) continue;
      Vec3 p = obs.position;
      for (int step = 0; step <= max_steps; ++step) {
        const AxisAlignedBox box = obs.shape.translated(p).inflated(
            cfg.robot_radius + cfg.dyn_clearance);
        const Eigen::Vector3i lo = cell_of(box.min);
        const Eigen::Vector3i hi = cell_of(box.max);
        for (int x = lo.x(); x <= hi.x(); ++x)
          for (int y = lo.y(); y <= hi.y(); ++y)
            for (int z = lo.z(); z <= hi.z(); ++z) {
              dyn_cost[{x, y, z, step}] += cfg.w_dynamic * prob;
            }
        p += candidates[k].predicted_velocity(p) * dt;
      }
    }
  }

  // Static occupancy cost, cached per cell.
  std::unordered_map<CellKey, double, CellKeyHash> static_cache;
  auto static_cost = [&](int x, int y, int z) {
    const CellKey key{x, y, z, 0};
    auto it = static_cache.find(key);
    if (it != static_cache.end()) return it->second;
    const double c = cell_blocked({x, y, z}) ? cfg.w_static : 0.0;
    static_cache.emplace(key, c);
    return c;
  };

  const std::vector<Hyperplane> planes = dsht.all_planes();
  auto dsht_cost = [&](const Vec3& p) {
    int violated = 0;
    for (const auto& h : planes) {
      if (signed_plane_distance(h, p) > -cfg.robot_radius) ++violated;
    }
    return cfg.w_dsht * violated;
  };

  auto node_cost = [&](int x, int y, int z, int step) {
    double c = static_cost(x, y, z);
    auto it = dyn_cost.find({x, y, z, step});
    if (it != dyn_cost.end()) c += it->second;
    c += dsht_cost(center_of(x, y, z));
    return c;
  };

  // Small distance term so straight paths beat cost-equivalent zigzags;
  // admissible since the straight-line distance lower-bounds path length.
  constexpr double kDistWeight = 0.1;
  const double max_step_dist = cell * std::sqrt(3.0);
  auto heuristic = [&](int x, int y, int z) {
    const double d = (center_of(x, y, z) - goal).norm();
    return cfg.w_time * dt * std::floor(d / max_step_dist) + kDistWeight * d;
  };

  std::unordered_map<CellKey, NodeInfo, CellKeyHash> nodes;
  std::priority_queue<OpenNode, std::vector<OpenNode>, std::greater<>> open;

  const CellKey start_key{start_cell.x(), start_cell.y(), start_cell.z(), 0};
  nodes[start_key] = {0.0, 0.0, 0.0, {0, 0, 0, -1}, false};
  open.push({heuristic(start_key.x, start_key.y, start_key.z), 0.0, start_key});

  std::optional<CellKey> goal_key;
  CellKey best_progress = start_key;
  double best_progress_dist =
      (center_of(start_key.x, start_key.y, start_key.z) - goal).norm();
  double best_progress_static = 0.0;
  double best_progress_cc = 0.0;
  int expansions = 0;

  while (!open.empty() && expansions < cfg.expansion_budget) {
    const OpenNode top = open.top();
    open.pop();
    auto& info = nodes[top.key];
    if (info.closed) continue;
    info.closed = true;
    ++expansions;

    const Vec3 pos = center_of(top.key.x, top.key.y, top.key.z);
    const double dist = (pos - goal).norm();
    // Fallback ranking: never trade into statically blocked cells, but prefer
    // progress toward the goal over avoiding probabilistic dynamic cost —
    // standing still in traffic is worse than a risk-weighted advance.
    if (std::tie(info.static_cost, dist, info.collision_cost) <
        std::tie(best_progress_static, best_progress_dist, best_progress_cc)) {
      best_progress = top.key;
      best_progress_static = info.static_cost;
      best_progress_cc = info.collision_cost;
      best_progress_dist = dist;
    }

    // A goal route that crosses static cells must not be adopted: the spline
    // would track the reference into the wall and the safety filter would pin
    // the robot there. Keep searching; if no static-free route exists within
    // the horizon, the (static-free) best-progress prefix is returned instead.
    if (top.key.x == goal_cell.x() && top.key.y == goal_cell.y() &&
        top.key.z == goal_cell.z() && info.static_cost == 0.0) {
      goal_key = top.key;
      break;
    }
    if (top.key.step >= max_steps) continue;

    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const CellKey nb{top.key.x + dx, top.key.y + dy, top.key.z + dz,
                           top.key.step + 1};
          const double move_dist =
              cell * std::sqrt(double(std::abs(dx) + std::abs(dy) +
                                      std::abs(dz)));
          const double step_cost =
              cfg.w_time * dt + kDistWeight * move_dist +
              node_cost(nb.x, nb.y, nb.z, nb.step);
          const double ng = top.g + step_cost;
          auto& ninfo = nodes[nb];
          if (ninfo.closed || ng >= ninfo.g - 1e-12) continue;
          ninfo.g = ng;
          ninfo.collision_cost =
              nodes[top.key].collision_cost +
              node_cost(nb.x, nb.y, nb.z, nb.step);
          ninfo.static_cost =
              nodes[top.key].static_cost + static_cost(nb.x, nb.y, nb.z);
          ninfo.parent = top.key;
          open.push({ng + heuristic(nb.x, nb.y, nb.z), ng, nb});
        }
  }

  const CellKey end_key = goal_key.value_or(best_progress);
  if (!goal_key && end_key == start_key) {
    return std::nullopt;  // nothing expanded improves on standing still
  }

  std::vector<TimedPosition> rev;
  for (CellKey k = end_key;;) {
    rev.push_back({center_of(k.x, k.y, k.z), now + k.step * dt});
    const auto& info = nodes[k];
    if (info.parent.step < 0) break;
    k = info.parent;
  }
  std::reverse(rev.begin(), rev.end());
  // keep the cell center when the goal itself sits inside an obstacle
  const Vec3 end_target =
      goal_retargeted ? center_of(end_key.x, end_key.y, end_key.z) : goal;
  if (rev.size() < 2) {
    if (!goal_key) return std::nullopt;
    // already inside the goal cell: emit a short segment onto the goal point
    rev = {{state.position, now}, {end_target, now + dt}};
  } else {
    rev.front().position = state.position;
    if (goal_key) rev.back().position = end_target;
  }

  SearchResult result;
  result.path = std::move(rev);
  result.reached_goal = goal_key.has_value();
  result.cost = nodes[end_key].g;
  result.collision_cost = nodes[end_key].collision_cost;
  return result;
}

}  // namespace mrnav
