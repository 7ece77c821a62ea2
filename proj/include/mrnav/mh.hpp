#pragma once

#include <map>
#include <optional>
#include <vector>

#include "mrnav/bezier.hpp"
#include "mrnav/geometry.hpp"
#include "mrnav/qp.hpp"
#include "mrnav/sim.hpp"
#include "mrnav/voxel_map.hpp"

namespace mrnav {

// Probability distribution over a shared candidate behavior model list.
struct BehaviorBelief {
  Eigen::VectorXd probabilities;

  static BehaviorBelief uniform(int count) {
    BehaviorBelief b;
    b.probabilities = Eigen::VectorXd::Constant(count, 1.0 / count);
    return b;
  }
  bool valid(double tol = 1e-9) const {
    return probabilities.minCoeff() >= 0.0 &&
           std::abs(probabilities.sum() - 1.0) <= tol;
  }
};

// Bayesian update: the likelihood of model k is a zero-mean isotropic
// Gaussian (stddev sigma_v) on the residual between the measured velocity
// and the model-predicted velocity. Probabilities are floored at 1e-6 and
// renormalized.
void update_behavior_belief(BehaviorBelief& belief,
                            std::span<const BehaviorModel> candidates,
                            const Vec3& obs_position,
                            const Vec3& measured_velocity, double dt,
                            double sigma_v);

// Per-teammate timestamped separating hyperplanes with prune state.
class DshtStore {
 public:
  struct PairState {
    std::vector<Hyperplane> planes;  // stamps strictly increasing
    double last_ack{-std::numeric_limits<double>::infinity()};
    bool overlap_flag{false};
  };

  // Appends the max-margin plane between the two world-frame boxes with
  // stamp = now. Overlapping shapes set the pair's flag and change nothing.
  void append(int teammate, const AxisAlignedBox& ego_box,
              const AxisAlignedBox& teammate_box, double now);

  // Removes planes with stamp <= plan_stamp. Idempotent; stamps older than
  // the last acknowledged one are ignored.
  void prune(int teammate, double plan_stamp);

  const std::map<int, PairState>& pairs() const { return pairs_; }
  std::vector<Hyperplane> all_planes() const;

 private:
  std::map<int, PairState> pairs_;
};

struct MhConfig {
  double replan_period{0.5};
  double horizon{6.0};
  double primitive_duration{0.75};
  double search_cell{0.5};
  double v_ref{1.2};  // per-axis reference velocity limit
  double a_ref{3.0};  // per-axis reference acceleration limit
  double tracking_weight{10.0};
  double w_static{1000.0};
  double w_dynamic{1000.0};
  double w_dsht{10.0};
  double w_time{1.0};
  int expansion_budget{8000};
  double robot_radius{0.3};
  double dyn_clearance{0.3};  // extra margin around predicted obstacle sweeps
  double sigma_v{0.2};
  double dsht_rate{10.0};
  double goal_tolerance{0.2};
};

// Latest point on the desired trajectory (within the horizon) reachable in a
// straight line at the reference speed; falls back to the closest point.
std::pair<Vec3, double> select_goal(const PiecewiseTrajectory& desired,
                                    const RobotState& state,
                                    const MhConfig& cfg, double now);

struct SensedObstacle {
  int id{0};
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  AxisAlignedBox shape;  // body frame
};

struct TimedPosition {
  Vec3 position{Vec3::Zero()};
  double time{0.0};
};

struct SearchResult {
  std::vector<TimedPosition> path;
  bool reached_goal{false};
  double cost{0.0};
  double collision_cost{0.0};  // static + dynamic + dsht share of the cost
};

// Best-first search over per-step motion primitives (26 axis moves + wait)
// in (cell, time step) space. Node cost adds static occupancy hits, the
// belief-weighted predicted overlap with each dynamic obstacle, DSHT
// violations, and elapsed time. Returns the best-progress prefix when the
// goal cell is not reached; std::nullopt when no progress is possible.
std::optional<SearchResult> spatiotemporal_search(
    const RobotState& state, const Vec3& goal, double goal_time,
    const VoxelMap& static_map, std::span<const SensedObstacle> obstacles,
    std::span<const BehaviorBelief> beliefs,
    std::span<const BehaviorModel> candidates, const DshtStore& dsht,
    const MhConfig& cfg, double now);

// Quintic spline through the discrete path: minimum acceleration energy plus
// waypoint tracking, subject to C0/C1/C2 continuity, start state, zero final
// velocity, per-segment corridors, respected DSHT hyperplanes, and per-axis
// derivative limits. std::nullopt when the QP is infeasible.
std::optional<PiecewiseTrajectory> optimize_spline(
    std::span<const TimedPosition> path, const Vec3& start_velocity,
    std::span<const Hyperplane> respected_planes, const MhConfig& cfg);

// Planes from the store that the discrete path never violates (these become
// hard constraints; violated ones were already paid for in search cost).
std::vector<Hyperplane> respected_planes_for_path(
    const DshtStore& dsht, std::span<const TimedPosition> path,
    double robot_radius);

// On-board receding-horizon planner for one robot.
class MhPlanner {
 public:
  MhPlanner(int robot_id, MhConfig cfg,
            std::vector<BehaviorModel> candidate_models);

  int robot_id() const { return robot_id_; }
  const MhConfig& config() const { return cfg_; }
  DshtStore& dsht() { return dsht_; }
  const DshtStore& dsht() const { return dsht_; }

  void observe_obstacle(const SensedObstacle& obs, double dt);
  const BehaviorBelief& belief_for(int obstacle_id);

  void append_pair_dsht(const RobotState& ego, const RobotState& teammate,
                        double now);
  void on_plan_success(int teammate, double plan_stamp);

  // Returns true when a new reference trajectory was adopted. On failure the
  // previous reference stays in force.
  bool replan(const RobotState& ego, const PiecewiseTrajectory* desired,
              const VoxelMap& static_map,
              std::span<const SensedObstacle> obstacles, double now);

  // Reference sample for the controller; holds position when no plan exists.
  TrajectorySample reference_sample(double t, const Vec3& fallback_position) const;

  bool has_reference() const { return reference_.has_value(); }
  const std::optional<PiecewiseTrajectory>& reference() const {
    return reference_;
  }
  int plan_successes() const { return plan_successes_; }
  int plan_failures() const { return plan_failures_; }
  double last_plan_stamp() const { return last_plan_stamp_; }

 private:
  int robot_id_;
  MhConfig cfg_;
  std::vector<BehaviorModel> candidates_;
  DshtStore dsht_;
  std::map<int, BehaviorBelief> beliefs_;
  std::optional<PiecewiseTrajectory> reference_;
  int plan_successes_{0};
  int plan_failures_{0};
  double last_plan_stamp_{0.0};
};

}  // namespace mrnav
