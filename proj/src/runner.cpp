#include "mrnav/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace mrnav {

namespace {

constexpr double kEps = 1e-9;
constexpr double kFastPeriod = 0.1;   // beliefs, DSHT, logging
constexpr double kSenseRadius = 12.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ExperimentRunner::ExperimentRunner(ScenarioConfig cfg, std::string out_dir)
    : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)) {
  cfg_.validate();

  std::mt19937_64 map_rng(cfg_.seed ^ 0x6d61700000000001ull);
  std::mt19937_64 obs_rng(cfg_.seed ^ 0x6f62730000000002ull);
  msg_rng_.seed(cfg_.seed ^ 0x6d73670000000003ull);

  std::vector<RobotState> robots = default_robot_starts(cfg_);
  std::vector<Vec3> starts;
  for (const auto& r : robots) starts.push_back(r.position);

  VoxelMap static_map;
  if (cfg_.environment == EnvironmentKind::kForest) {
    static_map = generate_forest(cfg_.arena, cfg_.pillar_count,
                                 cfg_.pillar_side_min, cfg_.pillar_side_max,
                                 map_rng, cfg_.pillar_spacing, starts, 1.5);
  } else {
    static_map = generate_maze(cfg_.arena, map_rng);
  }
  adjust_starts_to_free(robots, static_map);
  starts.clear();
  for (const auto& r : robots) starts.push_back(r.position);

  std::vector<DynamicObstacle> obstacles = generate_dynamic_obstacles(
      cfg_.dynamic_obstacle_count, cfg_.arena, obs_rng, starts, 2.0);

  WorldConfig wcfg;
  wcfg.seed = cfg_.seed;
  world_ = std::make_unique<World>(wcfg, std::move(robots),
                                   std::move(obstacles), static_map);

  bus_ = Bus(cfg_.drop_probability, cfg_.delay_low, cfg_.delay_high);

  LhConfig lh_cfg;
  // inset so sampled goals keep clear of the arena-face barrier standoff
  lh_cfg.grid = GridSpec{0.5, cfg_.arena.inflated(-0.5), cfg_.robot_radius};
  lh_cfg.straight_line_paths = !cfg_.modules.lh;
  lh_ = std::make_unique<LhPlanner>(lh_cfg, static_map, cfg_.robot_count,
                                    cfg_.seed ^ 0x6c680000000004ull);

  MhConfig mh_cfg;
  mh_cfg.robot_radius = cfg_.robot_radius;
  for (int i = 0; i < cfg_.robot_count; ++i) {
    mh_.push_back(std::make_unique<MhPlanner>(i, mh_cfg,
                                              candidate_behavior_models()));
    // stagger replans so the central CPU cost spreads across steps
    next_replan_.push_back(mh_cfg.replan_period * double(i) /
                           cfg_.robot_count);
  }
  desired_.resize(cfg_.robot_count);

  sh_cfg_.robot_radius = cfg_.robot_radius;
  sh_cfg_.a_max = wcfg.a_max;

  log_.sample_period = kFastPeriod;
  log_.duration = cfg_.duration;
  log_.robot_positions.resize(cfg_.robot_count);

  traj_csv_ << "time,robot_id,px,py,pz,vx,vy,vz,ax,ay,az\n";
  safety_csv_ << "time,robot_id,constraints,fallback,correction\n";
  goal_csv_ << "time,robot_id,goal_distance\n";
}

std::vector<SensedObstacle> ExperimentRunner::sense_obstacles(
    const RobotState& ego) const {
  std::vector<SensedObstacle> out;
  for (const DynamicObstacle& obs : world_->obstacles()) {
    if ((obs.position - ego.position).norm() > kSenseRadius) continue;
    out.push_back({obs.id, obs.position, obs.velocity, obs.shape});
  }
  return out;
}

void ExperimentRunner::handle_messages() {
  const double t = world_->time();
  for (int i = 0; i < cfg_.robot_count; ++i) {
    for (const BusMessage& msg : bus_.poll(i, t)) {
      if (const auto* dt = std::get_if<DesiredTrajectoryMsg>(&msg.payload)) {
        if (!desired_[i] || dt->task_id >= desired_[i]->task_id) {
          desired_[i] = *dt;
        }
      } else if (const auto* ps = std::get_if<PlanSuccessMsg>(&msg.payload)) {
        mh_[i]->on_plan_success(ps->robot_id, ps->plan_stamp);
      }
      if (on_delivery) on_delivery(i, msg);
    }
  }
}

void ExperimentRunner::control_and_step() {
  const double t = world_->time();
  const bool log_now = t + kEps >= next_fast_;
  const auto& robots = world_->robots();

  std::vector<Vec3> accels(robots.size());
  for (size_t i = 0; i < robots.size(); ++i) {
    const RobotState& robot = robots[i];
    TrajectorySample ref;
    if (cfg_.modules.mh) {
      ref = mh_[i]->reference_sample(t, robot.position);
    } else if (desired_[i]) {
      ref = desired_[i]->desired.evaluate_clamped(t);
    } else {
      ref.position = robot.position;
    }
    const Vec3 a_des = pd_desired_acceleration(ref, robot, sh_cfg_);
    Vec3 a = a_des;
    bool fallback = false;
    size_t n_constraints = 0;
    if (cfg_.modules.sh) {
      const auto neighbors = sbc_neighbors(robot, robots, world_->obstacles(),
                                           world_->static_map(), sh_cfg_);
      const SbcResult res = sbc_filter(robot, a_des, neighbors, sh_cfg_);
      a = res.accel;
      fallback = res.used_fallback;
      n_constraints = res.constraints.size();
      ++counters_.sbc_invocations;
      if (fallback) ++counters_.sbc_fallbacks;
    }
    accels[i] = a;
    if (log_now) {
      safety_csv_ << fmt(t) << ',' << robot.id << ',' << n_constraints << ','
                  << (fallback ? 1 : 0) << ',' << fmt((a - a_des).norm())
                  << '\n';
      traj_csv_ << fmt(t) << ',' << robot.id << ',' << fmt(robot.position.x())
                << ',' << fmt(robot.position.y()) << ','
                << fmt(robot.position.z()) << ',' << fmt(robot.velocity.x())
                << ',' << fmt(robot.velocity.y()) << ','
                << fmt(robot.velocity.z()) << ',' << fmt(a.x()) << ','
                << fmt(a.y()) << ',' << fmt(a.z()) << '\n';
      log_.robot_positions[i].push_back(robot.position);
      const auto& task = lh_->current_task(int(i));
      goal_csv_ << fmt(t) << ',' << robot.id << ','
                << fmt(task ? (robot.position - task->goal).norm() : 0.0)
                << '\n';
    }
  }
  if (log_now) next_fast_ += kFastPeriod;
  world_->step(accels);
}

void ExperimentRunner::step() {
  const double t = world_->time();

  if (t + kEps >= next_lh_) {
    lh_->tick(world_->robots(), bus_, t);
    next_lh_ += 1.0;
  }

  handle_messages();

  // beliefs and DSHT appends share the fast cadence; note control_and_step
  // advances next_fast_, so probe it here before stepping
  if (t + kEps >= next_fast_) {
    const auto& robots = world_->robots();
    for (size_t i = 0; i < robots.size(); ++i) {
      if (!cfg_.modules.mh) continue;
      for (const SensedObstacle& obs : sense_obstacles(robots[i])) {
        mh_[i]->observe_obstacle(obs, kFastPeriod);
      }
      for (size_t j = 0; j < robots.size(); ++j) {
        if (j == i) continue;
        mh_[i]->append_pair_dsht(robots[i], robots[j], t);
      }
    }
  }

  if (cfg_.modules.mh) {
    const auto& robots = world_->robots();
    for (size_t i = 0; i < robots.size(); ++i) {
      if (t + kEps < next_replan_[i]) continue;
      const auto sensed = sense_obstacles(robots[i]);
      const PiecewiseTrajectory* des =
          desired_[i] ? &desired_[i]->desired : nullptr;
      const bool ok = mh_[i]->replan(robots[i], des, world_->static_map(),
                                     sensed, t);
      if (ok) {
        ++counters_.plan_successes;
        PlanSuccessMsg msg{int(i), mh_[i]->last_plan_stamp()};
        for (size_t j = 0; j < robots.size(); ++j) {
          if (j == i) continue;
          bus_.send(int(i), int(j), msg, t, msg_rng_);
        }
        // the planner constrained itself with its current store, so its own
        // pairs prune locally right away
        for (size_t j = 0; j < robots.size(); ++j) {
          if (j != i) mh_[i]->on_plan_success(int(j), msg.plan_stamp);
        }
      } else {
        ++counters_.plan_failures;
      }
      next_replan_[i] += mh_[i]->config().replan_period;
    }
  }

  control_and_step();
}

void ExperimentRunner::run_to_completion() {
  const long total =
      std::lround(cfg_.duration / world_->config().dt_physics);
  while (std::lround(world_->time() / world_->config().dt_physics) < total) {
    step();
  }
}

RunResult ExperimentRunner::finish() {
  log_.tasks = lh_->task_log();
  log_.collisions = world_->collisions();
  log_.active_goal_at_end.assign(size_t(cfg_.robot_count), false);
  for (int i = 0; i < cfg_.robot_count; ++i) {
    const auto& task = lh_->current_task(i);
    log_.active_goal_at_end[size_t(i)] =
        task && !lh_->task_reached(*task, world_->robots()[size_t(i)]);
  }
  counters_.metrics = compute_metrics(log_);
  counters_.bus_sent = bus_.sent_count();
  counters_.bus_dropped = bus_.dropped_count();

  if (!out_dir_.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir_);
    auto write = [&](const std::string& name, const std::string& content) {
      std::ofstream(fs::path(out_dir_) / name) << content;
    };
    write("trajectory.csv", traj_csv_.str());
    write("safety.csv", safety_csv_.str());
    write("goal_distance.csv", goal_csv_.str());
    std::ostringstream coll;
    coll << "time,entity_a,entity_b\n";
    for (const CollisionEvent& c : log_.collisions) {
      coll << fmt(c.time) << ',' << c.a.label() << ',' << c.b.label() << '\n';
    }
    write("collisions.csv", coll.str());
    const MetricsReport& m = counters_.metrics;
    std::ostringstream ms;
    ms << "combination,environment,seed,robots,tasks,deadlock_rate,"
          "collision_rate,completion_rate,avg_nav_duration,deadlocked,"
          "collided_tasks,completed_clean,plan_failures,sbc_fallbacks\n"
       << cfg_.modules.label() << ','
       << (cfg_.environment == EnvironmentKind::kForest ? "forest" : "maze")
       << ',' << cfg_.seed << ',' << m.robot_count << ',' << m.task_count
       << ',' << fmt(m.deadlock_rate) << ',' << fmt(m.collision_rate) << ','
       << fmt(m.completion_rate) << ',' << fmt(m.avg_nav_duration) << ','
       << m.deadlocked_robots << ',' << m.collided_tasks << ','
       << m.completed_clean_tasks << ',' << counters_.plan_failures << ','
       << counters_.sbc_fallbacks << '\n';
    write("metrics.csv", ms.str());
  }
  return counters_;
}

RunResult run_experiment(const ScenarioConfig& cfg,
                         const std::string& out_dir) {
  ExperimentRunner runner(cfg, out_dir);
  runner.run_to_completion();
  return runner.finish();
}

}  // namespace mrnav
