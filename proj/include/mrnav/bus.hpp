#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "mrnav/bezier.hpp"
#include "mrnav/sim.hpp"

namespace mrnav {

struct PlanSuccessMsg {
  int robot_id{0};
  double plan_stamp{0.0};
};

struct DesiredTrajectoryMsg {
  int robot_id{0};
  Vec3 goal{Vec3::Zero()};
  double issue_time{0.0};
  int task_id{0};
  PiecewiseTrajectory desired;
};

struct StateReportMsg {
  RobotState state;
  double time{0.0};
};

using BusPayload =
    std::variant<PlanSuccessMsg, DesiredTrajectoryMsg, StateReportMsg>;

struct BusMessage {
  int sender{0};
  int receiver{0};
  BusPayload payload;
  double send_time{0.0};
  double deliver_time{0.0};
  uint64_t sequence{0};
};

// Lossy message bus: each send is dropped with drop_probability, otherwise
// delayed by a uniform sample from [delay_low, delay_high]. Re-ordering
// arises from random per-message delays.
class Bus {
 public:
  Bus() = default;
  Bus(double drop_probability, double delay_low, double delay_high)
      : drop_probability_(drop_probability),
        delay_low_(delay_low),
        delay_high_(delay_high) {}

  void send(int sender, int receiver, BusPayload payload, double now,
            std::mt19937_64& rng);

  // One independent send per receiver.
  void broadcast(int sender, std::span<const int> receivers,
                 const BusPayload& payload, double now, std::mt19937_64& rng);

  // All messages for `receiver` with deliver_time <= now, in deliver_time
  // order (ties by send sequence). Delivered messages leave the bus.
  std::vector<BusMessage> poll(int receiver, double now);

  size_t pending() const { return queue_.size(); }
  uint64_t sent_count() const { return sent_; }
  uint64_t dropped_count() const { return dropped_; }

 private:
  double drop_probability_{0.0};
  double delay_low_{0.0};
  double delay_high_{0.0};
  std::vector<BusMessage> queue_;
  uint64_t sequence_{0};
  uint64_t sent_{0};
  uint64_t dropped_{0};
};

}  // namespace mrnav
