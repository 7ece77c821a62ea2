#pragma once

#include <functional>
#include <memory>
#include <sstream>
#include <string>

#include "mrnav/bus.hpp"
#include "mrnav/lh.hpp"
#include "mrnav/metrics.hpp"
#include "mrnav/mh.hpp"
#include "mrnav/scenario.hpp"
#include "mrnav/sh.hpp"
#include "mrnav/sim.hpp"

namespace mrnav {

struct RunResult {
  MetricsReport metrics;
  int plan_successes{0};
  int plan_failures{0};
  long sbc_invocations{0};
  long sbc_fallbacks{0};
  uint64_t bus_sent{0};
  uint64_t bus_dropped{0};
};

// Wires the configured module combination around the simulated world and
// steps it in virtual time. Ablations substitute the next-cruder signal:
// without LH the desired paths are straight lines, without MH the controller
// tracks the desired trajectory directly, without SH the PD output is applied
// unfiltered.
class ExperimentRunner {
 public:
  explicit ExperimentRunner(ScenarioConfig cfg, std::string out_dir = "");

  void step();  // one physics step (1 / dt_physics per simulated second)
  void run_to_completion();
  RunResult finish();  // metrics + optional CSV emission

  double time() const { return world_->time(); }
  const ScenarioConfig& config() const { return cfg_; }
  const World& world() const { return *world_; }
  const Bus& bus() const { return bus_; }
  const LhPlanner& lh() const { return *lh_; }
  const MhPlanner& mh(int robot) const { return *mh_[size_t(robot)]; }

  // Invoked for every delivered bus message (protocol invariant tests).
  std::function<void(int receiver, const BusMessage&)> on_delivery;

 private:
  std::vector<SensedObstacle> sense_obstacles(const RobotState& ego) const;
  void handle_messages();
  void control_and_step();

  ScenarioConfig cfg_;
  std::string out_dir_;
  ShConfig sh_cfg_;
  std::unique_ptr<World> world_;
  Bus bus_;
  std::unique_ptr<LhPlanner> lh_;
  std::vector<std::unique_ptr<MhPlanner>> mh_;
  std::vector<std::optional<DesiredTrajectoryMsg>> desired_;
  std::mt19937_64 msg_rng_;

  double next_lh_{0.0};
  double next_fast_{0.0};  // beliefs, DSHT appends, logging cadence
  std::vector<double> next_replan_;

  ExperimentLog log_;
  RunResult counters_;
  std::ostringstream traj_csv_;
  std::ostringstream safety_csv_;
  std::ostringstream goal_csv_;
};

RunResult run_experiment(const ScenarioConfig& cfg,
                         const std::string& out_dir = "");

}  // namespace mrnav
