#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <queue>
#include <random>

#include "mrnav/lh.hpp"

using namespace mrnav;

namespace {

GridSpec make_grid(const Vec3& lo, const Vec3& hi, double cell = 1.0,
                   double inflation = 0.3) {
  GridSpec g;
  g.cell_size = cell;
  g.bounds = {lo, hi};
  g.inflation = inflation;
  return g;
}

// Independent shortest-path oracle: plain Dijkstra over the same 26-connected
// grid with the same blocking and no-corner-cutting rules, no heuristic.
struct DijkstraResult {
  double cost{std::numeric_limits<double>::infinity()};
  std::vector<Eigen::Vector3i> path;
};

DijkstraResult dijkstra_oracle(const Eigen::Vector3i& sc,
                               const Eigen::Vector3i& gc, const VoxelMap& map,
                               const GridSpec& grid) {
  const Eigen::Vector3i d = grid.dims();
  auto lin = [&](const Eigen::Vector3i& c) {
    return (c.z() * d.y() + c.y()) * d.x() + c.x();
  };
  const int n = d.prod();
  std::vector<uint8_t> blocked(n);
  for (int x = 0; x < d.x(); ++x)
    for (int y = 0; y < d.y(); ++y)
      for (int z = 0; z < d.z(); ++z) {
        blocked[lin({x, y, z})] = !cell_free(map, grid, {x, y, z});
      }
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  g[lin(sc)] = 0.0;
  open.push({0.0, lin(sc)});
  std::vector<uint8_t> done(n, 0);
  while (!open.empty()) {
    const auto [dist, idx] = open.top();
    open.pop();
    if (done[idx]) continue;
    done[idx] = 1;
    const Eigen::Vector3i c(idx % d.x(), (idx / d.x()) % d.y(),
                            idx / (d.x() * d.y()));
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          if (!dx && !dy && !dz) continue;
          const Eigen::Vector3i nb = c + Eigen::Vector3i(dx, dy, dz);
          if (!grid.in_grid(nb) || blocked[lin(nb)]) continue;
          const int axes = std::abs(dx) + std::abs(dy) + std::abs(dz);
          if (axes > 1) {
            bool any_axis_free = false;
            for (auto a : {Eigen::Vector3i(dx, 0, 0), Eigen::Vector3i(0, dy, 0),
                           Eigen::Vector3i(0, 0, dz)}) {
              if (a.isZero()) continue;
              const Eigen::Vector3i ac = c + a;
              any_axis_free |= grid.in_grid(ac) && !blocked[lin(ac)];
            }
            if (!any_axis_free) continue;
          }
          const double ng = dist + grid.cell_size * std::sqrt(double(axes));
          if (ng < g[lin(nb)] - 1e-15) {
            g[lin(nb)] = ng;
            parent[lin(nb)] = idx;
            open.push({ng, lin(nb)});
          }
        }
  }
  DijkstraResult out;
  if (!done[lin(gc)]) return out;
  out.cost = g[lin(gc)];
  for (int i = lin(gc); i != -1; i = parent[i]) {
    out.path.push_back({i % d.x(), (i / d.x()) % d.y(), i / (d.x() * d.y())});
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

// Order-independent path cost: sorted sum of the segment lengths, so two
// optimal paths with the same step multiset compare exactly equal.
double canonical_cost(const std::vector<Vec3>& waypoints) {
  std::vector<double> lens;
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    lens.push_back((waypoints[i + 1] - waypoints[i]).norm());
  }
  std::sort(lens.begin(), lens.end());
  double s = 0.0;
  for (double l : lens) s += l;
  return s;
}

double canonical_cost_cells(const std::vector<Eigen::Vector3i>& cells,
                            const GridSpec& grid) {
  std::vector<Vec3> pts;
  for (const auto& c : cells) pts.push_back(grid.cell_center(c));
  return canonical_cost(pts);
}

}  // namespace

TEST_CASE("sampled goals from an empty map are in-bounds free cell centers") {
  const GridSpec grid = make_grid(Vec3::Zero(), Vec3(10.0, 10.0, 3.0));
  VoxelMap map(0.5, grid.bounds);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 goal = sample_goal(map, grid, rng);
    REQUIRE(grid.bounds.contains(goal));
    REQUIRE(cell_free(map, grid, grid.cell_of(goal)));
  }
}

TEST_CASE("a fully occupied map has no goal to sample") {
  const GridSpec grid = make_grid(Vec3::Zero(), Vec3(3.0, 3.0, 2.0));
  VoxelMap map(0.5, grid.bounds);
  map.insert(grid.bounds);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(sample_goal(map, grid, rng), std::runtime_error);
}

TEST_CASE("a map with one free cell always samples that cell") {
  const GridSpec grid = make_grid(Vec3::Zero(), Vec3(5.0, 1.0, 1.0), 1.0, 0.0);
  VoxelMap map(1.0, grid.bounds);
  // occupy every cell except (2,0,0)
  map.insert({Vec3(0.0, 0.0, 0.0), Vec3(2.0, 1.0, 1.0)});
  map.insert({Vec3(3.0, 0.0, 0.0), Vec3(5.0, 1.0, 1.0)});
  std::mt19937_64 rng(1);
  const Vec3 expect = grid.cell_center({2, 0, 0});
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_goal(map, grid, rng).isApprox(expect));
  }
}

TEST_CASE("empty map start to goal gives the straight path") {
  const GridSpec grid =
      make_grid(Vec3(-0.5, -0.5, -0.5), Vec3(9.5, 0.5, 0.5));
  VoxelMap map(0.5, grid.bounds);
  const Vec3 start(0.0, 0.0, 0.0), goal(5.0, 0.0, 0.0);
  const auto path = plan_grid_path(start, goal, map, grid);
  REQUIRE(path.size() >= 2);
  CHECK(path.front().isApprox(start));
  CHECK(path.back().isApprox(goal));
  for (const Vec3& p : path) {
    CHECK(std::abs(p.y()) < 0.51);
    CHECK(std::abs(p.z()) < 0.51);
  }
  CHECK(canonical_cost(path) == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("path through a wall gap matches the Dijkstra oracle cost") {
  const GridSpec grid = make_grid(Vec3::Zero(), Vec3(11.0, 11.0, 1.0), 1.0, 0.2);
  VoxelMap map(0.5, grid.bounds);
  // wall at x in [5,6] with a gap at y in [7.5,9.5] (wide enough after the
  // inflation the planner applies to whole cells)
  map.insert({Vec3(5.0, 0.0, 0.0), Vec3(6.0, 7.5, 1.0)});
  map.insert({Vec3(5.0, 9.5, 0.0), Vec3(6.0, 11.0, 1.0)});
  const Vec3 start = grid.cell_center({1, 1, 0});
  const Vec3 goal = grid.cell_center({9, 1, 0});
  const auto path = plan_grid_path(start, goal, map, grid);
  // the path passes through the gap column
  bool through_gap = false;
  for (const Vec3& p : path) {
    if (p.x() > 5.0 && p.x() < 6.0) {
      CHECK(p.y() > 8.0);
      through_gap = true;
    }
  }
  CHECK(through_gap);
  const auto oracle =
      dijkstra_oracle(grid.cell_of(start), grid.cell_of(goal), map, grid);
  CHECK(canonical_cost(path) == canonical_cost_cells(oracle.path, grid));
}

TEST_CASE("goal sealed inside a closed box is unreachable") {
  const GridSpec grid =
      make_grid(Vec3::Zero(), Vec3(11.0, 11.0, 11.0), 1.0, 0.2);
  VoxelMap map(0.5, grid.bounds);
  // hollow shell around the free interior [4,7]^3
  map.insert({Vec3(3.0, 3.0, 3.0), Vec3(4.0, 8.0, 8.0)});
  map.insert({Vec3(7.0, 3.0, 3.0), Vec3(8.0, 8.0, 8.0)});
  map.insert({Vec3(3.0, 3.0, 3.0), Vec3(8.0, 4.0, 8.0)});
  map.insert({Vec3(3.0, 7.0, 3.0), Vec3(8.0, 8.0, 8.0)});
  map.insert({Vec3(3.0, 3.0, 3.0), Vec3(8.0, 8.0, 4.0)});
  map.insert({Vec3(3.0, 3.0, 7.0), Vec3(8.0, 8.0, 8.0)});
  const Vec3 goal(5.5, 5.5, 5.5);
  REQUIRE(cell_free(map, grid, grid.cell_of(goal)));
  CHECK_THROWS_AS(
      plan_grid_path(Vec3(1.0, 1.0, 1.0), goal, map, grid),
      std::runtime_error);
}

TEST_CASE("A* equals the Dijkstra oracle on 200 random maps") {
  std::mt19937_64 rng(11);
  const GridSpec grid = make_grid(Vec3::Zero(), Vec3(20.0, 20.0, 5.0), 1.0, 0.2);
  std::uniform_real_distribution<double> ux(0.0, 20.0), uz(0.0, 5.0);
  std::uniform_real_distribution<double> usz(0.5, 3.0);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    VoxelMap map(0.5, grid.bounds);
    std::uniform_int_distribution<int> nobs(5, 25);
    const int count = nobs(rng);
    for (int i = 0; i < count; ++i) {
      const Vec3 c(ux(rng), ux(rng), uz(rng));
      const Vec3 h(0.5 * usz(rng), 0.5 * usz(rng), 0.5 * usz(rng));
      map.insert(AxisAlignedBox::from_center_half_extents(c, h));
    }
    // random free start/goal cells
    std::vector<Eigen::Vector3i> free;
    const Eigen::Vector3i d = grid.dims();
    for (int x = 0; x < d.x(); ++x)
      for (int y = 0; y < d.y(); ++y)
        for (int z = 0; z < d.z(); ++z) {
          if (cell_free(map, grid, {x, y, z})) free.push_back({x, y, z});
        }
    if (free.size() < 2) continue;
    std::uniform_int_distribution<size_t> pick(0, free.size() - 1);
    const Eigen::Vector3i sc = free[pick(rng)];
    const Eigen::Vector3i gc = free[pick(rng)];
    const auto oracle = dijkstra_oracle(sc, gc, map, grid);
    const Vec3 start = grid.cell_center(sc);
    const Vec3 goal = grid.cell_center(gc);
    if (!std::isfinite(oracle.cost)) {
      CHECK_THROWS_AS(plan_grid_path(start, goal, map, grid),
                      std::runtime_error);
      continue;
    }
    const auto path = plan_grid_path(start, goal, map, grid);
    // exact equality of the order-independent costs
    REQUIRE(canonical_cost(path) == canonical_cost_cells(oracle.path, grid));
    // every waypoint's inflated robot box is collision free
    for (const Vec3& p : path) {
      const AxisAlignedBox robot = AxisAlignedBox::from_center_half_extents(
          p, Vec3::Constant(grid.inflation));
      REQUIRE(!map.any_occupied(robot));
    }
    ++compared;
  }
  CHECK(compared > 100);  // most trials must exercise the full comparison
}

TEST_CASE("5 m straight path at 1 m/s becomes one 5 s piece") {
  const auto traj =
      path_to_trajectory({Vec3::Zero(), Vec3(5.0, 0.0, 0.0)}, 1.0, 2.0);
  REQUIRE(traj.pieces().size() == 1);
  CHECK(traj.pieces()[0].duration == doctest::Approx(5.0));
  CHECK(traj.start_time() == 2.0);
  CHECK(traj.end_position().isApprox(Vec3(5.0, 0.0, 0.0)));
}

TEST_CASE("L-shaped 3 m + 4 m path at 2 m/s gets durations 1.5 s and 2 s") {
  const auto traj = path_to_trajectory(
      {Vec3::Zero(), Vec3(3.0, 0.0, 0.0), Vec3(3.0, 4.0, 0.0)}, 2.0, 0.0);
  REQUIRE(traj.pieces().size() == 2);
  CHECK(traj.pieces()[0].duration == doctest::Approx(1.5));
  CHECK(traj.pieces()[1].duration == doctest::Approx(2.0));
}

TEST_CASE("coincident start and goal degenerate to a 1 s hold piece") {
  const Vec3 p(1.0, 2.0, 3.0);
  const auto traj = path_to_trajectory({p, p}, 1.0, 0.0);
  REQUIRE(traj.pieces().size() == 1);
  CHECK(traj.total_duration() == doctest::Approx(1.0));
  CHECK(traj.evaluate(0.5).position.isApprox(p));
  CHECK(traj.evaluate(0.5).velocity.norm() == doctest::Approx(0.0));
}

TEST_CASE("trajectory duration times nominal speed equals the path length") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> waypoints;
    for (int i = 0; i < 6; ++i) waypoints.push_back({u(rng), u(rng), u(rng)});
    double length = 0.0;
    for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
      length += (waypoints[i + 1] - waypoints[i]).norm();
    }
    const double speed = 0.5 + std::abs(u(rng));
    const auto traj = path_to_trajectory(waypoints, speed, 0.0);
    CHECK(traj.total_duration() * speed == doctest::Approx(length).epsilon(1e-9));
  }
}

TEST_CASE("lh planner issues tasks, heals dropped messages, and logs completion") {
  const GridSpec grid = make_grid(Vec3::Zero(), Vec3(10.0, 10.0, 2.0));
  VoxelMap map(0.5, grid.bounds);
  LhConfig cfg;
  cfg.grid = grid;
  LhPlanner lh(cfg, map, 2, 99);
  Bus bus(0.0, 0.0, 0.0);
  std::vector<RobotState> states(2);
  states[0].position = Vec3(1.0, 1.0, 1.0);
  states[1].position = Vec3(9.0, 9.0, 1.0);

  lh.tick(states, bus, 0.0);
  REQUIRE(lh.current_task(0).has_value());
  REQUIRE(lh.current_task(1).has_value());
  CHECK(lh.task_log().size() == 2);
  // concurrent goals stay separated
  CHECK((lh.current_task(0)->goal - lh.current_task(1)->goal).norm() >= 2.0);
  // assignments are broadcast every tick (retransmission heals drops)
  CHECK(bus.poll(0, 0.0).size() == 1);
  lh.tick(states, bus, 1.0);
  CHECK(bus.poll(0, 1.0).size() == 1);

  // teleport robot 0 onto its goal: completion is logged and a new task issued
  states[0].position = lh.current_task(0)->goal;
  states[0].velocity = Vec3::Zero();
  const int old_id = lh.current_task(0)->task_id;
  lh.tick(states, bus, 2.0);
  CHECK(lh.current_task(0)->task_id != old_id);
  bool completed = false;
  for (const auto& rec : lh.task_log()) {
    if (rec.task_id == old_id) completed = rec.completion_time.has_value();
  }
  CHECK(completed);
}
