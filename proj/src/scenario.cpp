#include "mrnav/scenario.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace mrnav {

std::string ModuleCombination::label() const {
  std::string s;
  auto add = [&](const char* name) {
    if (!s.empty()) s += '+';
    s += name;
  };
  if (lh) add("LH");
  if (mh) add("MH");
  if (sh) add("SH");
  return s.empty() ? "none" : s;
}

ModuleCombination ModuleCombination::parse(const std::string& text) {
  ModuleCombination combo{false, false, false};
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part == "LH" || part == "lh") {
      combo.lh = true;
    } else if (part == "MH" || part == "mh") {
      combo.mh = true;
    } else if (part == "SH" || part == "sh") {
      combo.sh = true;
    } else if (!part.empty()) {
      throw std::invalid_argument("unknown module: " + part);
    }
  }
  if (!combo.any()) throw std::invalid_argument("empty module combination");
  return combo;
}

void ScenarioConfig::validate() const {
  if (duration <= 0.0) throw std::invalid_argument("duration must be > 0");
  if (!modules.any()) throw std::invalid_argument("module combination empty");
  if (robot_count < 1) throw std::invalid_argument("need at least one robot");
  if (dynamic_obstacle_count < 0) {
    throw std::invalid_argument("negative obstacle count");
  }
  if (!arena.valid()) throw std::invalid_argument("invalid arena bounds");
  if (pillar_spacing < 1.5) {
    throw std::invalid_argument("pillar spacing below the 1.5 m floor");
  }
}

std::vector<RobotState> default_robot_starts(const ScenarioConfig& cfg) {
  std::vector<RobotState> robots(cfg.robot_count);
  const Vec3 center = cfg.arena.center();
  const Vec3 half = cfg.arena.half_extents();
  const double ring = 0.75 * std::min(half.x(), half.y());
  const double z = cfg.arena.min.z() + 0.5 * (cfg.arena.max.z() - cfg.arena.min.z());
  for (int i = 0; i < cfg.robot_count; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / cfg.robot_count;
    robots[i].id = i;
    robots[i].position =
        Vec3(center.x() + ring * std::cos(theta),
             center.y() + ring * std::sin(theta), z);
    const double r = cfg.robot_radius / std::sqrt(3.0);  // bounding sphere fit
    robots[i].shape = AxisAlignedBox::from_center_half_extents(
        Vec3::Zero(), Vec3::Constant(r));
  }
  return robots;
}

void adjust_starts_to_free(std::vector<RobotState>& robots,
                           const VoxelMap& static_map, double margin) {
  for (RobotState& r : robots) {
    if (!static_map.any_occupied(r.world_box().inflated(margin))) continue;
    bool placed = false;
    for (double radius = 0.5; radius <= 6.0 && !placed; radius += 0.5) {
      for (int k = 0; k < 16 && !placed; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / 16;
        const Vec3 cand = r.position + radius * Vec3(std::cos(theta),
                                                     std::sin(theta), 0.0);
        if (!static_map.bounds().contains(cand)) continue;
        if (!static_map.any_occupied(
                r.shape.translated(cand).inflated(margin))) {
          r.position = cand;
          placed = true;
        }
      }
    }
    if (!placed) {
      throw std::runtime_error("adjust_starts_to_free: no free start found");
    }
  }
}

VoxelMap generate_forest(const AxisAlignedBox& bounds, int pillar_count,
                         double side_min, double side_max, std::mt19937_64& rng,
                         double min_spacing, std::span<const Vec3> keepout,
                         double keepout_radius) {
  if (pillar_count < 0) throw std::invalid_argument("negative pillar count");
  min_spacing = std::max(min_spacing, 1.5);
  VoxelMap map(0.25, bounds);
  std::vector<Vec3> centers;
  std::uniform_real_distribution<double> ux(bounds.min.x(), bounds.max.x());
  std::uniform_real_distribution<double> uy(bounds.min.y(), bounds.max.y());
  std::uniform_real_distribution<double> uside(side_min, side_max);

  int rejections = 0;
  while (int(centers.size()) < pillar_count) {
    if (rejections >= 10000) {
      throw std::runtime_error("generate_forest: pillar density too high");
    }
    const Vec3 c(ux(rng), uy(rng), 0.0);
    bool ok = c.x() > bounds.min.x() + side_max &&
              c.x() < bounds.max.x() - side_max &&
              c.y() > bounds.min.y() + side_max &&
              c.y() < bounds.max.y() - side_max;
    for (const Vec3& prev : centers) {
      if (!ok) break;
      ok = (Eigen::Vector2d(c.x() - prev.x(), c.y() - prev.y()).norm() >=
            min_spacing);
    }
    for (const Vec3& k : keepout) {
      if (!ok) break;
      ok = (Eigen::Vector2d(c.x() - k.x(), c.y() - k.y()).norm() >=
            keepout_radius);
    }
    if (!ok) {
      ++rejections;
      continue;
    }
    rejections = 0;
    centers.push_back(c);
    const double half = 0.5 * uside(rng);
    map.insert({{c.x() - half, c.y() - half, bounds.min.z()},
                {c.x() + half, c.y() + half, bounds.max.z()}});
  }
  return map;
}

namespace {

void insert_wall(VoxelMap& map, const AxisAlignedBox& bounds, double x0,
                 double x1, double y0, double y1) {
  map.insert({{x0, y0, bounds.min.z()}, {x1, y1, bounds.max.z()}});
}

}  // namespace

VoxelMap generate_maze(const AxisAlignedBox& bounds, std::mt19937_64& rng) {
  VoxelMap map(0.25, bounds);
  const Vec3 half = bounds.half_extents();
  const Vec3 c = bounds.center();
  constexpr double kThickness = 0.5;

  if (half.x() < 8.0 || half.y() < 8.0) {
    // degenerate bounds: a single wall across part of the arena
    insert_wall(map, bounds, c.x() - 0.5 * kThickness, c.x() + 0.5 * kThickness,
                bounds.min.y(), c.y());
    return map;
  }

  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  // One C-shaped pocket per side, each opening toward the arena center. The
  // short lips turned outward at the arm tips pin wall-sliding robots in a
  // corner instead of letting them slip around the tip. West/east arms are
  // 9 m, north/south arms 6 m; lip lengths keep every corridor >= 1.8 m
  // (3x the robot bounding-sphere diameter).
  constexpr double kLip = 0.7;
  const auto pocket_x = [&](double back_lo, double arm_dir, double arm_len,
                            double cy) {
    insert_wall(map, bounds, back_lo, back_lo + kThickness, cy - 3.0, cy + 3.0);
    const double a0 = arm_dir > 0 ? back_lo + kThickness : back_lo - arm_len;
    const double a1 = arm_dir > 0 ? back_lo + kThickness + arm_len : back_lo;
    insert_wall(map, bounds, a0, a1, cy + 2.5, cy + 3.0);
    insert_wall(map, bounds, a0, a1, cy - 3.0, cy - 2.5);
    const double tip_lo = arm_dir > 0 ? a1 - kThickness : a0;
    insert_wall(map, bounds, tip_lo, tip_lo + kThickness, cy + 3.0,
                cy + 3.0 + kLip);
    insert_wall(map, bounds, tip_lo, tip_lo + kThickness, cy - 3.0 - kLip,
                cy - 3.0);
  };
  const auto pocket_y = [&](double back_lo, double arm_dir, double arm_len,
                            double cx) {
    insert_wall(map, bounds, cx - 3.0, cx + 3.0, back_lo, back_lo + kThickness);
    const double a0 = arm_dir > 0 ? back_lo + kThickness : back_lo - arm_len;
    const double a1 = arm_dir > 0 ? back_lo + kThickness + arm_len : back_lo;
    insert_wall(map, bounds, cx + 2.5, cx + 3.0, a0, a1);
    insert_wall(map, bounds, cx - 3.0, cx - 2.5, a0, a1);
    const double tip_lo = arm_dir > 0 ? a1 - kThickness : a0;
    insert_wall(map, bounds, cx + 3.0, cx + 3.0 + kLip, tip_lo,
                tip_lo + kThickness);
    insert_wall(map, bounds, cx - 3.0 - kLip, cx - 3.0, tip_lo,
                tip_lo + kThickness);
  };
  pocket_x(bounds.min.x() + 2.0, +1.0, 9.0, c.y() + jitter(rng));  // west
  pocket_x(bounds.max.x() - 2.0 - kThickness, -1.0, 9.0,
           c.y() + jitter(rng));                                   // east
  pocket_y(bounds.max.y() - 2.0 - kThickness, -1.0, 5.5,
           c.x() + jitter(rng));                                   // north
  pocket_y(bounds.min.y() + 2.0, +1.0, 5.5, c.x() + jitter(rng));  // south

  if (!free_space_connected(map, bounds)) {
    throw std::logic_error("generate_maze: free space disconnected");
  }
  return map;
}

Vec3 rotation_field(const Vec3& p, double speed) {
  const double r = std::hypot(p.x(), p.y());
  if (r < 1e-9) return Vec3::Zero();
  return speed * Vec3(-p.y(), p.x(), 0.0) / r;
}

std::vector<BehaviorModel> candidate_behavior_models(double nominal_speed) {
  std::vector<BehaviorModel> models;
  models.push_back(BehaviorModel::identity_interaction(
      [nominal_speed](const Vec3& p) { return rotation_field(p, nominal_speed); },
      nominal_speed));
  models.push_back(BehaviorModel::identity_interaction(
      [](const Vec3&) { return Vec3::Zero(); }, 0.0));
  return models;
}

std::vector<DynamicObstacle> generate_dynamic_obstacles(
    int count, const AxisAlignedBox& bounds, std::mt19937_64& rng,
    std::span<const Vec3> keepout, double keepout_radius) {
  if (count < 0) throw std::invalid_argument("negative obstacle count");
  std::vector<DynamicObstacle> out;
  out.reserve(count);
  std::uniform_real_distribution<double> udiag(1.2, 1.6);
  std::uniform_real_distribution<double> uspeed(0.25, 0.35);
  std::uniform_real_distribution<double> ux(bounds.min.x(), bounds.max.x());
  std::uniform_real_distribution<double> uy(bounds.min.y(), bounds.max.y());
  std::uniform_real_distribution<double> uz(bounds.min.z(), bounds.max.z());
  const double max_radius =
      0.95 * std::min(bounds.half_extents().x(), bounds.half_extents().y());

  for (int i = 0; i < count; ++i) {
    const double diagonal = udiag(rng);
    const double speed = uspeed(rng);  // constant for this obstacle's lifetime
    const double half = 0.5 * diagonal / std::sqrt(3.0);

    Vec3 p;
    for (int attempt = 0;; ++attempt) {
      p = Vec3(ux(rng), uy(rng), uz(rng));
      p.z() = std::clamp(p.z(), bounds.min.z() + half, bounds.max.z() - half);
      bool ok = std::hypot(p.x(), p.y()) <= max_radius;
      for (const Vec3& k : keepout) {
        if (!ok) break;
        ok = (p - k).norm() >= keepout_radius;
      }
      if (ok || attempt >= 1000) break;
    }

    DynamicObstacle obs;
    obs.id = i;
    obs.position = p;
    obs.shape = AxisAlignedBox::from_center_half_extents(Vec3::Zero(),
                                                         Vec3::Constant(half));
    obs.behavior = BehaviorModel::identity_interaction(
        [speed](const Vec3& q) { return rotation_field(q, speed); }, speed);
    obs.velocity = rotation_field(p, speed);
    out.push_back(std::move(obs));
  }
  return out;
}

bool free_space_connected(const VoxelMap& map, const AxisAlignedBox& bounds,
                          double cell) {
  const Vec3 span = bounds.max - bounds.min;
  const int nx = std::max(1, int(std::floor(span.x() / cell)));
  const int ny = std::max(1, int(std::floor(span.y() / cell)));
  const int nz = std::max(1, int(std::floor(span.z() / cell)));
  auto lin = [&](int x, int y, int z) { return (z * ny + y) * nx + x; };

  std::vector<uint8_t> blocked(size_t(nx) * ny * nz, 0);
  std::vector<int> free_cells;
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        const Vec3 lo = bounds.min + cell * Vec3(x, y, z);
        if (map.any_occupied({lo, lo + Vec3::Constant(cell)})) {
          blocked[lin(x, y, z)] = 1;
        } else {
          free_cells.push_back(lin(x, y, z));
        }
      }
  if (free_cells.empty()) return false;

  std::vector<uint8_t> seen(blocked.size(), 0);
  std::queue<int> frontier;
  frontier.push(free_cells.front());
  seen[free_cells.front()] = 1;
  size_t reached = 0;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    ++reached;
    const int x = i % nx, y = (i / nx) % ny, z = i / (nx * ny);
    constexpr int d[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                             {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
    for (const auto& dd : d) {
      const int xx = x + dd[0], yy = y + dd[1], zz = z + dd[2];
      if (xx < 0 || xx >= nx || yy < 0 || yy >= ny || zz < 0 || zz >= nz) {
        continue;
      }
      const int j = lin(xx, yy, zz);
      if (blocked[j] || seen[j]) continue;
      seen[j] = 1;
      frontier.push(j);
    }
  }
  return reached == free_cells.size();
}

}  // namespace mrnav
